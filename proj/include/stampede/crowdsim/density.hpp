#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "stampede/crowdsim/geometry.hpp"
#include "stampede/crowdsim/model.hpp"
#include "stampede/error.hpp"
#include "stampede/risk.hpp"

namespace stampede::crowdsim {

struct DensityGrid {
  Vec2 origin;
  double cell_size = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<int> counts;  // row-major, iy * nx + ix

  double density(std::size_t ix, std::size_t iy) const noexcept {
    return counts[iy * nx + ix] / (cell_size * cell_size);
  }
  long total() const noexcept {
    long t = 0;
    for (int c : counts) t += c;
    return t;
  }
  double max_density() const noexcept {
    int m = 0;
    for (int c : counts) m = std::max(m, c);
    return m / (cell_size * cell_size);
  }
  Rect bounds() const noexcept {
    return {origin.x, origin.y, origin.x + static_cast<double>(nx) * cell_size, origin.y + static_cast<double>(ny) * cell_size};
  }
};

/// Grid of `cell_size` cells covering `area`, anchored at the floor of its
/// lower-left corner.
inline DensityGrid make_grid(const Rect& area, double cell_size) {
  if (!(cell_size > 0.0)) throw Error(ErrorKind::InvalidConfig, "density cell size must be > 0");
  DensityGrid g;
  g.cell_size = cell_size;
  g.origin = {std::floor(area.x_min / cell_size) * cell_size, std::floor(area.y_min / cell_size) * cell_size};
  g.nx = static_cast<std::size_t>(std::max(1.0, std::ceil((area.x_max - g.origin.x) / cell_size)));
  g.ny = static_cast<std::size_t>(std::max(1.0, std::ceil((area.y_max - g.origin.y) / cell_size)));
  g.counts.assign(g.nx * g.ny, 0);
  return g;
}

/// Point-in-cell count of active agents; agents outside the grid are ignored.
inline void accumulate(DensityGrid& g, std::span<const Agent> agents) {
  std::fill(g.counts.begin(), g.counts.end(), 0);
  for (const auto& a : agents) {
    if (a.status != AgentStatus::Active) continue;
    const double fx = std::floor((a.position.x - g.origin.x) / g.cell_size);
    const double fy = std::floor((a.position.y - g.origin.y) / g.cell_size);
    if (fx < 0.0 || fy < 0.0 || fx >= static_cast<double>(g.nx) || fy >= static_cast<double>(g.ny)) continue;
    ++g.counts[static_cast<std::size_t>(fy) * g.nx + static_cast<std::size_t>(fx)];
  }
}

inline DensityGrid density_grid(std::span<const Agent> agents, const Rect& area, double cell_size = 1.0) {
  auto g = make_grid(area, cell_size);
  accumulate(g, agents);
  return g;
}

struct BreachEvent {
  double time = 0.0;  // s
  std::size_t ix = 0;
  std::size_t iy = 0;
  double density = 0.0;
  risk::DensityLevel level = risk::DensityLevel::Elevated;
};

/// Every cell at or above the elevated threshold, in row-major order.
inline std::vector<BreachEvent> detect_breach(const DensityGrid& g, const risk::RiskThresholds& th = {}, double time = 0.0) {
  if (th.elevated > th.critical) throw Error(ErrorKind::InvalidConfig, "elevated threshold exceeds critical");
  std::vector<BreachEvent> out;
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double rho = g.density(ix, iy);
      const auto level = risk::classify_density(rho, th);
      if (level != risk::DensityLevel::Safe) out.push_back({time, ix, iy, rho, level});
    }
  }
  return out;
}

}  // namespace stampede::crowdsim

#pragma once

// Social-force terms and the neighbor index.
//
//   f_drive = m (v_des e - v) / tau
//   f_ij    = (A exp((r_ij - d_ij) / B) + k g(r_ij - d_ij)) n_ij
//           + kappa g(r_ij - d_ij) dv_ji^t t_ij
//   f_iW    = same form against the closest point of each wall
//
// g(x) = max(x, 0). The integrator takes the friction coefficient and
// tangent from each Contact and treats the agent's own velocity implicitly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "stampede/crowdsim/geometry.hpp"
#include "stampede/crowdsim/model.hpp"

namespace stampede::crowdsim {

constexpr double g_contact(double x) noexcept { return x > 0.0 ? x : 0.0; }

struct Contact {
  Vec2 normal_force;          // repulsion + body force
  Vec2 tangent;
  double friction = 0.0;      // kappa * g(overlap)
  double compression = 0.0;   // body-force magnitude, N
  Vec2 force;                 // total, friction evaluated explicitly
};

inline Vec2 drive_force(const Agent& a, Vec2 direction, const SimParams& p) noexcept {
  return (p.mass / p.relaxation_time) * (a.desired_speed * direction - a.velocity);
}

/// Force exerted on `i` by `j`. `fallback_normal` replaces n_ij when the
/// centers coincide.
inline Contact pair_force(const Agent& i, const Agent& j, const SimParams& p, Vec2 fallback_normal = {1.0, 0.0}) noexcept {
  Vec2 diff = i.position - j.position;
  double d = norm(diff);
  Vec2 n;
  if (d > 0.0) {
    n = (1.0 / d) * diff;
  } else {
    n = fallback_normal;
    d = 1e-6;
  }
  const double rij = i.radius + j.radius;
  if (d - rij > p.interaction_range) return {};
  const double overlap = g_contact(rij - d);
  const double body = p.body_stiffness * overlap;
  Contact c;
  c.normal_force = (p.repulsion_strength * std::exp((rij - d) / p.repulsion_range) + body) * n;
  c.compression = body;
  c.tangent = perp(n);
  c.friction = p.sliding_friction * overlap;
  c.force = c.normal_force + (c.friction * dot(j.velocity - i.velocity, c.tangent)) * c.tangent;
  return c;
}

inline Contact wall_force(const Agent& a, const Segment& wall, const SimParams& p) noexcept {
  const Vec2 q = closest_point(wall, a.position);
  const Vec2 diff = a.position - q;
  double d = norm(diff);
  Vec2 n;
  if (d > 0.0) {
    n = (1.0 / d) * diff;
  } else {
    n = normalized(perp(wall.b - wall.a));
  }
  if (d - a.radius > p.interaction_range) return {};
  const double overlap = g_contact(a.radius - d);
  const double body = p.body_stiffness * overlap;
  Contact c;
  c.normal_force = (p.repulsion_strength * std::exp((a.radius - d) / p.repulsion_range) + body) * n;
  c.compression = body;
  c.tangent = perp(n);
  c.friction = p.sliding_friction * overlap;
  c.force = c.normal_force - (c.friction * dot(a.velocity, c.tangent)) * c.tangent;
  return c;
}

/// Total force on `a` from the drive term, every neighbor and every wall.
inline Vec2 social_force(const Agent& a, Vec2 direction, std::span<const Agent> neighbors,
                         std::span<const Segment> walls, const SimParams& p) noexcept {
  Vec2 f = drive_force(a, direction, p);
  for (const auto& other : neighbors) f += pair_force(a, other, p).force;
  for (const auto& w : walls) f += wall_force(a, w, p).force;
  return f;
}

/// Deterministic unit vector for the pair (i, j), i < j, used when the two
/// centers coincide exactly. The agent with the larger index gets the
/// opposite direction.
inline Vec2 coincidence_normal(std::uint64_t seed, std::size_t i, std::size_t j) noexcept {
  const bool flip = i > j;
  if (flip) std::swap(i, j);
  std::uint64_t h = seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)) ^ (0xC2B2AE3D27D4EB4FULL * (j + 1));
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 31;
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * 3.14159265358979323846;
  const Vec2 n{std::cos(angle), std::sin(angle)};
  return flip ? -n : n;
}

/// Uniform grid over agent positions. `neighbors` returns every indexed agent
/// within `cutoff` of a point, in ascending index order, so sums over the list
/// match a brute-force loop term for term.
class SpatialHash {
 public:
  explicit SpatialHash(double cell_size) : cell_(cell_size) {}

  void build(std::span<const Agent> agents, std::span<const std::size_t> indices) {
    entries_.clear();
    entries_.reserve(indices.size());
    for (std::size_t idx : indices) entries_.push_back({key(cell_of(agents[idx].position)), idx});
    std::sort(entries_.begin(), entries_.end());
  }

  void neighbors(std::span<const Agent> agents, Vec2 p, double cutoff, std::vector<std::size_t>& out) const {
    out.clear();
    const auto [cx, cy] = cell_of(p);
    const double cut2 = cutoff * cutoff;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const std::int64_t k = key({cx + dx, cy + dy});
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair<std::int64_t, std::size_t>{k, 0});
        for (; it != entries_.end() && it->first == k; ++it) {
          const Vec2 d = agents[it->second].position - p;
          if (dot(d, d) <= cut2) out.push_back(it->second);
        }
      }
    }
    std::sort(out.begin(), out.end());
  }

  double cell_size() const noexcept { return cell_; }

 private:
  std::pair<std::int64_t, std::int64_t> cell_of(Vec2 p) const noexcept {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)), static_cast<std::int64_t>(std::floor(p.y / cell_))};
  }
  static std::int64_t key(std::pair<std::int64_t, std::int64_t> c) noexcept {
    return ((c.first + (1LL << 30)) << 32) | ((c.second + (1LL << 30)) & 0xFFFFFFFFLL);
  }

  double cell_;
  std::vector<std::pair<std::int64_t, std::size_t>> entries_;
};

}  // namespace stampede::crowdsim

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stampede/crowdsim/geometry.hpp"
#include "stampede/dataset.hpp"
#include "stampede/error.hpp"

namespace stampede::crowdsim {

struct Exit {
  Segment segment;
  bool open = true;
};

/// Waypoint line an agent must pass before heading for the exits. Gates are
/// visited in order; an agent has passed a gate once it stands strictly on
/// the side of the gate's line away from the spawn region.
struct Gate {
  Segment segment;
  int far_side = 0;
};

struct Scenario {
  std::vector<Segment> walls;
  std::vector<Exit> exits;
  std::vector<Gate> gates;
  Rect spawn;
  int agent_count = 0;
  double chokepoint_width = 0.0;  // m
  double duration = 120.0;        // s
  std::optional<int> preset_year;

  std::size_t open_exit_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(exits.begin(), exits.end(), [](const Exit& e) { return e.open; }));
  }

  /// Walls plus closed exits: everything an agent collides with.
  std::vector<Segment> obstacles() const {
    std::vector<Segment> out = walls;
    for (const auto& e : exits) {
      if (!e.open) out.push_back(e.segment);
    }
    return out;
  }

  Rect bounds() const noexcept {
    Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const auto grow = [&r](Vec2 p) {
      r.x_min = std::min(r.x_min, p.x);
      r.y_min = std::min(r.y_min, p.y);
      r.x_max = std::max(r.x_max, p.x);
      r.y_max = std::max(r.y_max, p.y);
    };
    for (const auto& w : walls) {
      grow(w.a);
      grow(w.b);
    }
    for (const auto& e : exits) {
      grow(e.segment.a);
      grow(e.segment.b);
    }
    grow({spawn.x_min, spawn.y_min});
    grow({spawn.x_max, spawn.y_max});
    return r;
  }
};

namespace detail {

/// Flood fill on a 0.1 m raster from the spawn centre; cells within 0.075 m
/// of an obstacle are blocked. True when some open exit midpoint is reached.
inline bool exit_reachable(const Scenario& s) {
  constexpr double cell = 0.1;
  constexpr double block = 0.075;
  Rect b = s.bounds();
  b.x_min -= 1.0;
  b.y_min -= 1.0;
  b.x_max += 1.0;
  b.y_max += 1.0;
  const auto nx = static_cast<long>(std::ceil(b.width() / cell));
  const auto ny = static_cast<long>(std::ceil(b.height() / cell));
  std::vector<char> blocked(static_cast<std::size_t>(nx * ny), 0);
  const auto idx = [nx](long ix, long iy) { return static_cast<std::size_t>(iy * nx + ix); };
  const auto center = [&](long ix, long iy) { return Vec2{b.x_min + (ix + 0.5) * cell, b.y_min + (iy + 0.5) * cell}; };
  for (const auto& w : s.obstacles()) {
    const long x0 = std::max(0L, static_cast<long>((std::min(w.a.x, w.b.x) - b.x_min) / cell) - 2);
    const long x1 = std::min(nx - 1, static_cast<long>((std::max(w.a.x, w.b.x) - b.x_min) / cell) + 2);
    const long y0 = std::max(0L, static_cast<long>((std::min(w.a.y, w.b.y) - b.y_min) / cell) - 2);
    const long y1 = std::min(ny - 1, static_cast<long>((std::max(w.a.y, w.b.y) - b.y_min) / cell) + 2);
    for (long iy = y0; iy <= y1; ++iy) {
      for (long ix = x0; ix <= x1; ++ix) {
        if (distance(w, center(ix, iy)) <= block) blocked[idx(ix, iy)] = 1;
      }
    }
  }
  const auto cell_of = [&](Vec2 p) {
    return std::pair<long, long>{static_cast<long>((p.x - b.x_min) / cell), static_cast<long>((p.y - b.y_min) / cell)};
  };
  std::vector<char> seen(blocked.size(), 0);
  const auto [sx, sy] = cell_of(s.spawn.center());
  if (blocked[idx(sx, sy)]) return false;
  std::deque<std::pair<long, long>> queue{{sx, sy}};
  seen[idx(sx, sy)] = 1;
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    const std::pair<long, long> next[] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
    for (const auto& [qx, qy] : next) {
      if (qx < 0 || qy < 0 || qx >= nx || qy >= ny) continue;
      const auto i = idx(qx, qy);
      if (seen[i] || blocked[i]) continue;
      seen[i] = 1;
      queue.emplace_back(qx, qy);
    }
  }
  for (const auto& e : s.exits) {
    if (!e.open) continue;
    const auto [ex, ey] = cell_of(e.segment.midpoint());
    if (seen[idx(ex, ey)]) return true;
  }
  return false;
}

}  // namespace detail

/// Checks the scenario invariants, fills in derived fields (gate sides and a
/// missing chokepoint width) and returns the result.
inline Scenario finalize(Scenario s) {
  if (s.agent_count < 0) throw Error(ErrorKind::InvalidConfig, "agent count must be >= 0");
  if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) throw Error(ErrorKind::InvalidConfig, "duration must be >= 0");
  if (!(s.spawn.width() > 0.0 && s.spawn.height() > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "spawn region must have positive area");
  }
  if (s.open_exit_count() == 0) throw Error(ErrorKind::NoOpenExit, "scenario has no open exit");
  for (const auto& w : s.obstacles()) {
    if (segment_touches_rect(w, s.spawn)) throw Error(ErrorKind::InvalidConfig, "spawn region overlaps a wall");
  }
  for (auto& g : s.gates) {
    g.far_side = -side(g.segment, s.spawn.center());
    if (g.far_side == 0) throw Error(ErrorKind::InvalidConfig, "gate line passes through the spawn centre");
  }
  if (s.chokepoint_width <= 0.0) {
    double narrowest = std::numeric_limits<double>::infinity();
    for (const auto& e : s.exits) {
      if (e.open) narrowest = std::min(narrowest, e.segment.length());
    }
    for (const auto& g : s.gates) narrowest = std::min(narrowest, g.segment.length());
    s.chokepoint_width = narrowest;
  }
  if (!detail::exit_reachable(s)) {
    throw Error(ErrorKind::UnreachableTarget, "no open exit is reachable from the spawn region");
  }
  return s;
}

struct PresetOptions {
  int agents = 200;
  double duration = 120.0;
  bool vip_closure = true;
};

namespace preset_layout {
constexpr double kHoldingLength = 12.0;  // m, along the corridor axis
constexpr double kHoldingWidth = 20.0;
constexpr double kCorridorLength = 3.0;
constexpr double kPlazaLength = 10.0;
constexpr double kExitExtra = 1.0;  // exits are this much wider than the chokepoint
constexpr double kPillar = 0.5;
constexpr double kSpawnMargin = 0.5;
}  // namespace preset_layout

/// Holding area -> corridor of the venue's chokepoint width -> plaza whose far
/// wall carries the venue's exits. The corridor axis is y = 0. With VIP
/// closure the `vip_routes` highest-indexed exits are closed.
inline Scenario build_preset(const dataset::VenueGeometry& venue, const PresetOptions& opt = {}) {
  using namespace preset_layout;
  const double w = venue.chokepoint_width;
  const double half_w = 0.5 * w;
  const double half_hold = 0.5 * kHoldingWidth;
  const int n = venue.exits;
  const double exit_w = w + kExitExtra;
  const double half_plaza = 0.5 * (n * exit_w + (n + 1) * kPillar);
  const double x_c0 = kHoldingLength;
  const double x_c1 = x_c0 + kCorridorLength;
  const double x_far = x_c1 + kPlazaLength;
  if (half_w >= half_hold) throw Error(ErrorKind::InvalidConfig, "chokepoint wider than the holding area");

  Scenario s;
  s.preset_year = venue.year;
  s.chokepoint_width = w;
  s.agent_count = opt.agents;
  s.duration = opt.duration;
  auto& walls = s.walls;
  walls.push_back({{0.0, -half_hold}, {0.0, half_hold}});
  walls.push_back({{0.0, half_hold}, {x_c0, half_hold}});
  walls.push_back({{0.0, -half_hold}, {x_c0, -half_hold}});
  walls.push_back({{x_c0, half_hold}, {x_c0, half_w}});
  walls.push_back({{x_c0, -half_hold}, {x_c0, -half_w}});
  walls.push_back({{x_c0, half_w}, {x_c1, half_w}});
  walls.push_back({{x_c0, -half_w}, {x_c1, -half_w}});
  const double plaza_edge = std::max(half_plaza, half_w);
  if (plaza_edge > half_w) {
    walls.push_back({{x_c1, half_w}, {x_c1, plaza_edge}});
    walls.push_back({{x_c1, -half_w}, {x_c1, -plaza_edge}});
  }
  walls.push_back({{x_c1, plaza_edge}, {x_far, plaza_edge}});
  walls.push_back({{x_c1, -plaza_edge}, {x_far, -plaza_edge}});

  double y = -half_plaza;
  for (int i = 0; i < n; ++i) {
    walls.push_back({{x_far, y}, {x_far, y + kPillar}});
    y += kPillar;
    s.exits.push_back({{{x_far, y}, {x_far, y + exit_w}}, true});
    y += exit_w;
  }
  walls.push_back({{x_far, y}, {x_far, half_plaza}});
  if (opt.vip_closure) {
    for (int i = 0; i < venue.vip_routes; ++i) s.exits[static_cast<std::size_t>(n - 1 - i)].open = false;
  }
  s.gates.push_back({{{x_c0, -half_w}, {x_c0, half_w}}, 0});
  s.gates.push_back({{{x_c1, -half_w}, {x_c1, half_w}}, 0});
  s.spawn = {kSpawnMargin, -half_hold + kSpawnMargin, x_c0 - kSpawnMargin, half_hold - kSpawnMargin};
  return finalize(std::move(s));
}

inline Scenario build_preset(int year, const std::vector<dataset::VenueGeometry>& venues, const PresetOptions& opt = {}) {
  for (const auto& v : venues) {
    if (v.year == year) return build_preset(v, opt);
  }
  throw Error(ErrorKind::InvalidConfig, "no venue geometry for preset year " + std::to_string(year));
}

/// Square room with one door in the middle of the right-hand wall, the
/// classic bottleneck evacuation setup.
inline Scenario build_room(double side_length, double door_width, int agents, double duration) {
  const double h = 0.5 * side_length;
  const double d = 0.5 * door_width;
  Scenario s;
  s.walls = {{{0.0, -h}, {0.0, h}},
             {{0.0, h}, {side_length, h}},
             {{0.0, -h}, {side_length, -h}},
             {{side_length, h}, {side_length, d}},
             {{side_length, -h}, {side_length, -d}}};
  s.exits = {{{{side_length, -d}, {side_length, d}}, true}};
  s.spawn = {0.5, -h + 0.5, side_length - 0.5, h - 0.5};
  s.agent_count = agents;
  s.duration = duration;
  s.chokepoint_width = door_width;
  return finalize(std::move(s));
}

}  // namespace stampede::crowdsim

#pragma once

// Parameters and agent state of the escape-panic social-force model.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stampede/crowdsim/geometry.hpp"
#include "stampede/error.hpp"

namespace stampede::crowdsim {

struct SimParams {
  double mass = 80.0;                   // kg
  double relaxation_time = 0.5;         // s
  double repulsion_strength = 2000.0;   // N
  double repulsion_range = 0.08;        // m
  double body_stiffness = 1.2e5;        // kg/s²
  double sliding_friction = 2.4e5;      // kg/(m·s)
  double radius_min = 0.25;             // m
  double radius_max = 0.35;             // m
  double base_desired_speed = 1.0;      // m/s
  double panic_desired_speed = 5.0;     // m/s
  double urgency_ratio = 3.2;
  double crush_pressure_threshold = 1600.0;  // N/m
  double crush_duration = 1.0;          // s
  double interaction_range = 1.0;       // m of clearance beyond contact
  double dt = 0.01;                     // s
  std::uint64_t seed = 42;

  double urgency_fraction() const noexcept { return urgency_ratio / (1.0 + urgency_ratio); }

  /// Center distance beyond which pair interactions are dropped: twice the
  /// per-agent reach radius_max + interaction_range / 2.
  double cutoff() const noexcept { return 2.0 * radius_max + interaction_range; }
};

inline void validate(const SimParams& p) {
  const auto positive = [](double v, std::string_view name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, std::string(name) + " must be > 0");
  };
  positive(p.mass, "mass");
  positive(p.relaxation_time, "relaxation_time");
  positive(p.repulsion_strength, "repulsion_strength");
  positive(p.repulsion_range, "repulsion_range");
  positive(p.body_stiffness, "body_stiffness");
  positive(p.sliding_friction, "sliding_friction");
  positive(p.base_desired_speed, "base_desired_speed");
  positive(p.panic_desired_speed, "panic_desired_speed");
  positive(p.crush_pressure_threshold, "crush_pressure_threshold");
  positive(p.crush_duration, "crush_duration");
  positive(p.interaction_range, "interaction_range");
  if (!(p.urgency_ratio >= 0.0) || !std::isfinite(p.urgency_ratio)) {
    throw Error(ErrorKind::InvalidConfig, "urgency_ratio must be >= 0");
  }
  if (!(p.dt > 0.0 && p.dt <= 0.1)) throw Error(ErrorKind::InvalidConfig, "dt must lie in (0, 0.1]");
  if (p.panic_desired_speed < p.base_desired_speed) {
    throw Error(ErrorKind::InvalidConfig, "panic_desired_speed must be >= base_desired_speed");
  }
  if (!(p.radius_min >= 0.2 && p.radius_max <= 0.4 && p.radius_min <= p.radius_max)) {
    throw Error(ErrorKind::InvalidConfig, "agent radii must satisfy 0.2 <= radius_min <= radius_max <= 0.4");
  }
}

/// Desired speed outside any ritual window: v0 blended toward vmax by the
/// urgency fraction u = r / (1 + r).
inline double base_desired_speed(const SimParams& p) noexcept {
  return p.base_desired_speed * (1.0 + p.urgency_fraction() * (p.panic_desired_speed / p.base_desired_speed - 1.0));
}

struct RitualWindow {
  double start = 0.0;  // s
  double end = 0.0;    // s, exclusive
  double speed_multiplier = 1.0;
};

struct RitualSchedule {
  std::vector<RitualWindow> windows;

  double multiplier(double t) const noexcept {
    for (const auto& w : windows) {
      if (t >= w.start && t < w.end) return w.speed_multiplier;
    }
    return 1.0;
  }
};

inline void validate(const RitualSchedule& s) {
  for (std::size_t i = 0; i < s.windows.size(); ++i) {
    const auto& w = s.windows[i];
    if (!(w.end > w.start)) throw Error(ErrorKind::InvalidConfig, "ritual window must have end > start");
    if (!(w.speed_multiplier >= 1.0 && w.speed_multiplier <= 2.0)) {
      throw Error(ErrorKind::InvalidConfig, "ritual multiplier must lie in [1, 2]");
    }
    if (i > 0 && w.start < s.windows[i - 1].end) {
      throw Error(ErrorKind::InvalidConfig, "ritual windows must be sorted and non-overlapping");
    }
  }
}

enum class AgentStatus { Active, Exited, Incapacitated };

constexpr std::string_view to_string(AgentStatus s) noexcept {
  switch (s) {
    case AgentStatus::Active: return "active";
    case AgentStatus::Exited: return "exited";
    case AgentStatus::Incapacitated: return "incapacitated";
  }
  return "";
}

struct Agent {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
  double desired_speed = 0.0;
  AgentStatus status = AgentStatus::Active;
  double crush_exposure = 0.0;    // s above the pressure threshold, never reset
  double contact_pressure = 0.0;  // N/m, from the latest force pass
  std::size_t gate_index = 0;     // gates already passed
  double exit_time = -1.0;        // s, set once on exit
};

}  // namespace stampede::crowdsim

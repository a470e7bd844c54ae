#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "stampede/crowdsim/density.hpp"
#include "stampede/crowdsim/forces.hpp"
#include "stampede/crowdsim/geometry.hpp"
#include "stampede/crowdsim/model.hpp"
#include "stampede/crowdsim/scenario.hpp"
#include "stampede/error.hpp"
#include "stampede/risk.hpp"

namespace stampede::crowdsim {

struct SimState {
  double time = 0.0;
  std::uint64_t steps = 0;
  std::vector<Agent> agents;

  std::size_t count(AgentStatus s) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(agents.begin(), agents.end(), [s](const Agent& a) { return a.status == s; }));
  }
};

struct SimOutcome {
  int agent_count = 0;
  int exited = 0;
  int incapacitated = 0;
  int active = 0;
  double peak_density = 0.0;  // persons/m²
  std::optional<double> time_to_90pct_exit;
  std::vector<int> throughput_series;  // persons per 1 s bin
  std::vector<BreachEvent> breach_events;
  double simulated_time = 0.0;
  std::uint64_t steps = 0;
};

/// 53-bit uniform in [0, 1) straight from the engine bits, so draws do not
/// depend on the standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Agents on a jittered lattice inside the spawn rectangle. Lattice sites are
/// at least 2 * radius_max apart after jitter, so nobody starts in contact.
inline std::vector<Agent> spawn_agents(const Scenario& s, const SimParams& p) {
  std::vector<Agent> agents;
  const int n = s.agent_count;
  if (n == 0) return agents;
  const double w = s.spawn.width();
  const double h = s.spawn.height();
  const double min_spacing = 2.0 * p.radius_max;
  double spacing = std::sqrt(w * h / n);
  long cols = 0;
  long rows = 0;
  for (;;) {
    cols = std::max(1L, static_cast<long>(std::floor(w / spacing)));
    rows = std::max(1L, static_cast<long>(std::floor(h / spacing)));
    if (cols * rows >= n) break;
    spacing *= 0.99;
  }
  const double sx = w / static_cast<double>(cols);
  const double sy = h / static_cast<double>(rows);
  if (std::min(sx, sy) < min_spacing) {
    throw Error(ErrorKind::InvalidConfig, "spawn region too small for " + std::to_string(n) + " agents");
  }
  std::mt19937_64 rng(p.seed);
  std::vector<long> sites(static_cast<std::size_t>(cols * rows));
  for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = static_cast<long>(i);
  for (std::size_t i = sites.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
    std::swap(sites[i], sites[std::min(j, i)]);
  }
  sites.resize(static_cast<std::size_t>(n));
  std::sort(sites.begin(), sites.end());
  const double jx = 0.5 * (sx - min_spacing);
  const double jy = 0.5 * (sy - min_spacing);
  agents.reserve(sites.size());
  for (long site : sites) {
    Agent a;
    a.radius = uniform(rng, p.radius_min, p.radius_max);
    const double cx = s.spawn.x_min + (static_cast<double>(site % cols) + 0.5) * sx;
    const double cy = s.spawn.y_min + (static_cast<double>(site / cols) + 0.5) * sy;
    a.position = {cx + uniform(rng, -jx, jx), cy + uniform(rng, -jy, jy)};
    agents.push_back(a);
  }
  return agents;
}

/// Adds dt to the exposure of every active agent at or above the pressure
/// threshold and incapacitates those whose cumulative exposure reaches
/// crush_duration. Exposure is never reset.
inline void update_crush(SimState& state, const SimParams& p, double dt) {
  for (auto& a : state.agents) {
    if (a.status != AgentStatus::Active) continue;
    if (a.contact_pressure >= p.crush_pressure_threshold) a.crush_exposure += dt;
    if (a.crush_exposure + 1e-9 >= p.crush_duration) {
      a.status = AgentStatus::Incapacitated;
      a.velocity = {};
    }
  }
}

/// Per-agent force split for the velocity update
///   (m I + dt D) v' = m v + dt F
/// where F holds every explicit term (friction against the neighbors'
/// velocities included) and D = sum kappa g t t^T is the friction acting on
/// the agent's own velocity.
struct ForceTerms {
  Vec2 explicit_force;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;
  double compression = 0.0;  // N

  void add(const Contact& c, double other_tangential_velocity) noexcept {
    explicit_force += c.normal_force;
    compression += c.compression;
    if (c.friction > 0.0) {
      explicit_force += (c.friction * other_tangential_velocity) * c.tangent;
      dxx += c.friction * c.tangent.x * c.tangent.x;
      dxy += c.friction * c.tangent.x * c.tangent.y;
      dyy += c.friction * c.tangent.y * c.tangent.y;
    }
  }

  Vec2 integrate(Vec2 v, double mass, double dt) const noexcept {
    const Vec2 rhs = mass * v + dt * explicit_force;
    const double a = mass + dt * dxx;
    const double b = dt * dxy;
    const double d = mass + dt * dyy;
    const double det = a * d - b * b;
    return {(d * rhs.x - b * rhs.y) / det, (a * rhs.y - b * rhs.x) / det};
  }

  friend bool operator==(const ForceTerms&, const ForceTerms&) = default;
};

class Simulator {
 public:
  Simulator(Scenario scenario, SimParams params, RitualSchedule schedule = {}, unsigned threads = 1)
      : scenario_(std::move(scenario)),
        params_(params),
        schedule_(std::move(schedule)),
        threads_(std::max(1u, threads)),
        obstacles_(scenario_.obstacles()),
        hash_(params_.cutoff()) {
    validate(params_);
    validate(schedule_);
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  const SimParams& params() const noexcept { return params_; }
  const std::vector<Segment>& obstacles() const noexcept { return obstacles_; }

  SimState initial_state() const {
    SimState s;
    s.agents = spawn_agents(scenario_, params_);
    return s;
  }

  /// Desired speed of every active agent at time t.
  double desired_speed(double t) const noexcept { return base_desired_speed(params_) * schedule_.multiplier(t); }

  /// Point the agent is currently heading for.
  Vec2 target(const Agent& a) const noexcept {
    if (a.gate_index < scenario_.gates.size()) {
      return closest_point(shrink(scenario_.gates[a.gate_index].segment, a.radius), a.position);
    }
    Vec2 best{};
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& e : scenario_.exits) {
      if (!e.open) continue;
      const Vec2 q = closest_point(shrink(e.segment, a.radius), a.position);
      const double d = norm(q - a.position);
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
    return best;
  }

  /// Force terms on agent `i` from the pre-step snapshot, summed over
  /// `neighbors` in the order given.
  ForceTerms force_on(std::span<const Agent> agents, std::size_t i, std::span<const std::size_t> neighbors) const noexcept {
    const Agent& a = agents[i];
    ForceTerms ft;
    ft.explicit_force = drive_force(a, normalized(target(a) - a.position), params_);
    for (std::size_t j : neighbors) {
      if (j == i) continue;
      const auto c = pair_force(a, agents[j], params_, coincidence_normal(params_.seed, i, j));
      ft.add(c, dot(agents[j].velocity, c.tangent));
    }
    for (const auto& w : obstacles_) ft.add(wall_force(a, w, params_), 0.0);
    return ft;
  }

  /// Force terms by brute force over every present agent. Reference path
  /// for checking the spatial hash.
  std::vector<ForceTerms> forces_brute_force(const SimState& state) const {
    std::vector<std::size_t> present;
    for (std::size_t j = 0; j < state.agents.size(); ++j) {
      if (state.agents[j].status != AgentStatus::Exited) present.push_back(j);
    }
    std::vector<ForceTerms> out(state.agents.size());
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      if (state.agents[i].status == AgentStatus::Active) out[i] = force_on(state.agents, i, present);
    }
    return out;
  }

  /// Force terms through the spatial hash, optionally split across threads.
  std::vector<ForceTerms> forces(const SimState& state) {
    const auto& agents = state.agents;
    present_.clear();
    active_.clear();
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (agents[j].status != AgentStatus::Exited) present_.push_back(j);
      if (agents[j].status == AgentStatus::Active) active_.push_back(j);
    }
    hash_.build(agents, present_);
    std::vector<ForceTerms> out(agents.size());
    const auto work = [&](std::size_t begin, std::size_t end) {
      std::vector<std::size_t> nb;
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = active_[k];
        hash_.neighbors(agents, agents[i].position, params_.cutoff(), nb);
        out[i] = force_on(agents, i, nb);
      }
    };
    const std::size_t n = active_.size();
    const std::size_t t = std::min<std::size_t>(threads_, std::max<std::size_t>(1, n / 32));
    if (t <= 1) {
      work(0, n);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (n + t - 1) / t;
      for (std::size_t c = 0; c < t; ++c) {
        const std::size_t b = c * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
      }
      for (auto& th : pool) th.join();
    }
    return out;
  }

  void step(SimState& state) {
    const double t = state.time;
    const double dt = params_.dt;
    const double v_des = desired_speed(t);
    for (auto& a : state.agents) {
      if (a.status == AgentStatus::Active) a.desired_speed = v_des;
    }
    const auto f = forces(state);
    const double v_cap = params_.panic_desired_speed + 1.0;
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
      Agent& a = state.agents[i];
      if (a.status != AgentStatus::Active) continue;
      a.velocity = f[i].integrate(a.velocity, params_.mass, dt);
      const double speed = norm(a.velocity);
      if (speed > v_cap) a.velocity = (v_cap / speed) * a.velocity;
      const Vec2 before = a.position;
      a.position += dt * a.velocity;
      for (const auto& w : obstacles_) {
        if (crosses(w, before, a.position)) {
          a.position = before;
          a.velocity = {};
          break;
        }
      }
      resolve_walls(a);
      a.contact_pressure = f[i].compression / (2.0 * 3.14159265358979323846 * a.radius);
      update_gates(a);
      for (const auto& e : scenario_.exits) {
        if (e.open && crosses(e.segment, before, a.position)) {
          a.status = AgentStatus::Exited;
          a.exit_time = t + dt;
          break;
        }
      }
    }
    update_crush(state, params_, dt);
    ++state.steps;
    state.time = static_cast<double>(state.steps) * dt;
  }

  using Observer = std::function<void(const SimState&)>;

  SimOutcome run(SimState state, const Observer& observer = {}) {
    SimOutcome out;
    out.agent_count = static_cast<int>(state.agents.size());
    const auto total_steps = static_cast<std::uint64_t>(std::ceil(scenario_.duration / params_.dt - 1e-9));
    auto grid = make_grid(scenario_.bounds(), 1.0);
    std::vector<risk::DensityLevel> level(grid.counts.size(), risk::DensityLevel::Safe);
    const auto sample = [&](const SimState& s) {
      accumulate(grid, s.agents);
      out.peak_density = std::max(out.peak_density, grid.max_density());
      for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
          const std::size_t k = iy * grid.nx + ix;
          const double rho = grid.density(ix, iy);
          const auto now = risk::classify_density(rho);
          if (now > level[k]) out.breach_events.push_back({s.time, ix, iy, rho, now});
          level[k] = now;
        }
      }
    };
    sample(state);
    if (observer) observer(state);
    while (state.steps < total_steps && state.count(AgentStatus::Active) > 0) {
      step(state);
      sample(state);
      if (observer) observer(state);
    }
    out.steps = state.steps;
    out.simulated_time = state.time;
    std::vector<double> exits;
    for (const auto& a : state.agents) {
      switch (a.status) {
        case AgentStatus::Exited:
          ++out.exited;
          exits.push_back(a.exit_time);
          break;
        case AgentStatus::Incapacitated: ++out.incapacitated; break;
        case AgentStatus::Active: ++out.active; break;
      }
    }
    std::sort(exits.begin(), exits.end());
    const auto needed = static_cast<std::size_t>(std::ceil(0.9 * out.agent_count - 1e-9));
    if (needed > 0 && exits.size() >= needed) out.time_to_90pct_exit = exits[needed - 1];
    out.throughput_series.assign(static_cast<std::size_t>(std::ceil(state.time - 1e-9)), 0);
    for (double te : exits) {
      // Exit at the end of the step starting at te - dt.
      const auto bin = static_cast<std::size_t>(std::floor(te - params_.dt + 1e-9));
      if (bin < out.throughput_series.size()) ++out.throughput_series[bin];
    }
    return out;
  }

  SimOutcome run() { return run(initial_state()); }

 private:
  void resolve_walls(Agent& a) const noexcept {
    const double min_d = a.radius - 0.005;
    for (int pass = 0; pass < 3; ++pass) {
      bool moved = false;
      for (const auto& w : obstacles_) {
        const Vec2 q = closest_point(w, a.position);
        const Vec2 diff = a.position - q;
        const double d = norm(diff);
        if (d >= min_d || d == 0.0) continue;
        const Vec2 n = (1.0 / d) * diff;
        a.position = q + min_d * n;
        const double vn = dot(a.velocity, n);
        if (vn < 0.0) a.velocity -= vn * n;
        moved = true;
      }
      if (!moved) break;
    }
  }

  void update_gates(Agent& a) const noexcept {
    std::size_t g = 0;
    while (g < scenario_.gates.size() && side(scenario_.gates[g].segment, a.position) == scenario_.gates[g].far_side) ++g;
    a.gate_index = g;
  }

  Scenario scenario_;
  SimParams params_;
  RitualSchedule schedule_;
  unsigned threads_;
  std::vector<Segment> obstacles_;
  SpatialHash hash_;
  std::vector<std::size_t> present_;
  std::vector<std::size_t> active_;
};

inline SimOutcome run(const Scenario& scenario, const SimParams& params, const RitualSchedule& schedule = {},
                      unsigned threads = 1) {
  Simulator sim(scenario, params, schedule, threads);
  return sim.run();
}

}  // namespace stampede::crowdsim

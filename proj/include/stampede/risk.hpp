#pragma once

// Crowd Risk Index (CRI) with a devotional-velocity term, density threshold
// classification and historical chokepoint statistics.
//
//   CRI = clamp01( w_density  * min(rho / rho_crit, 2) / 2
//                + w_choke    * max(1 - width / width_ref, 0)
//                + w_velocity * (mult - 1) / (mult_max - 1)
//                + w_admin    * (1 - score / 10) )
//
// Every term is a normalized ratio in [0, 1], so a convex weight vector keeps
// the index in the unit interval and monotone in each input.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "stampede/dataset.hpp"
#include "stampede/error.hpp"

namespace stampede::risk {

struct CriWeights {
  double density = 0.4;
  double choke = 0.25;
  double velocity = 0.2;
  double admin = 0.15;
};

struct CriRefs {
  double density_crit = 6.0;  // persons/m²
  double width_ref = 5.0;     // m
  double mult_max = 1.58;
};

struct RiskInput {
  double density = 0.0;           // persons/m²
  double chokepoint_width = 0.0;  // m
  double velocity_multiplier = 1.0;
  int admin_score = 10;
};

struct RiskThresholds {
  double elevated = 6.0;
  double critical = 8.0;
};

enum class DensityLevel { Safe, Elevated, Critical };

constexpr std::string_view to_string(DensityLevel level) noexcept {
  switch (level) {
    case DensityLevel::Safe: return "safe";
    case DensityLevel::Elevated: return "elevated";
    case DensityLevel::Critical: return "critical";
  }
  return "";
}

/// Weighted contribution of each term; `cri` is their clamped sum.
struct CriBreakdown {
  double density = 0.0;
  double choke = 0.0;
  double velocity = 0.0;
  double admin = 0.0;
  double cri = 0.0;
};

inline void validate(const CriWeights& w) {
  const double parts[] = {w.density, w.choke, w.velocity, w.admin};
  for (double p : parts) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::BadWeights, "CRI weights must each lie in [0, 1]");
  }
  const double sum = w.density + w.choke + w.velocity + w.admin;
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::BadWeights, "CRI weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

inline void validate(const CriRefs& refs) {
  if (!(refs.density_crit > 0.0) || !(refs.width_ref > 0.0) || !(refs.mult_max > 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "CRI refs: density_crit and width_ref must be > 0, mult_max > 1");
  }
}

inline void validate(const RiskInput& in, const CriRefs& refs) {
  if (!(in.density >= 0.0)) throw Error(ErrorKind::InvalidConfig, "risk input: density must be >= 0");
  if (!(in.chokepoint_width > 0.0)) throw Error(ErrorKind::InvalidConfig, "risk input: chokepoint width must be > 0");
  if (!(in.velocity_multiplier >= 1.0 && in.velocity_multiplier <= refs.mult_max)) {
    throw Error(ErrorKind::InvalidConfig, "risk input: velocity multiplier outside [1, mult_max]");
  }
  if (in.admin_score < 1 || in.admin_score > 10) throw Error(ErrorKind::InvalidConfig, "risk input: admin score outside [1, 10]");
}

inline CriBreakdown cri_breakdown(const RiskInput& in, const CriWeights& w = {}, const CriRefs& refs = {}) {
  validate(w);
  validate(refs);
  validate(in, refs);
  CriBreakdown b;
  b.density = w.density * std::min(in.density / refs.density_crit, 2.0) / 2.0;
  b.choke = w.choke * std::max(1.0 - in.chokepoint_width / refs.width_ref, 0.0);
  b.velocity = w.velocity * (in.velocity_multiplier - 1.0) / (refs.mult_max - 1.0);
  b.admin = w.admin * (1.0 - in.admin_score / 10.0);
  b.cri = std::clamp(b.density + b.choke + b.velocity + b.admin, 0.0, 1.0);
  return b;
}

inline double cri(const RiskInput& in, const CriWeights& w = {}, const CriRefs& refs = {}) {
  return cri_breakdown(in, w, refs).cri;
}

inline DensityLevel classify_density(double density, const RiskThresholds& t = {}) {
  if (density >= t.critical) return DensityLevel::Critical;
  if (density >= t.elevated) return DensityLevel::Elevated;
  return DensityLevel::Safe;
}

/// Fraction of venues whose chokepoint is strictly narrower than the threshold.
inline double choke_fraction(const std::vector<dataset::VenueGeometry>& venues, double width_threshold) {
  if (venues.empty()) throw Error(ErrorKind::EmptyInput, "choke_fraction: no venues");
  const auto narrow = std::count_if(venues.begin(), venues.end(),
                                    [&](const auto& v) { return v.chokepoint_width < width_threshold; });
  return static_cast<double>(narrow) / static_cast<double>(venues.size());
}

struct CriPoint {
  int year = 0;
  CriBreakdown breakdown;
};

/// CRI per panel year. Every bundled incident happened on a peak ritual day,
/// so the velocity multiplier defaults to the largest surge (1.58).
inline std::vector<CriPoint> cri_timeline(const dataset::JoinedPanel& panel, const CriWeights& w = {},
                                          const CriRefs& refs = {}, double velocity_multiplier = 1.58) {
  if (panel.rows.empty()) throw Error(ErrorKind::EmptyInput, "cri_timeline: empty panel");
  std::vector<CriPoint> out;
  out.reserve(panel.rows.size());
  for (const auto& row : panel.rows) {
    RiskInput in;
    in.density = row.incident.density;
    in.chokepoint_width = row.venue.chokepoint_width;
    in.velocity_multiplier = velocity_multiplier;
    in.admin_score = row.inquiry.effectiveness_score;
    out.push_back({row.year, cri_breakdown(in, w, refs)});
  }
  return out;
}

}  // namespace stampede::risk

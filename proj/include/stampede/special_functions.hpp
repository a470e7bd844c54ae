#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "stampede/error.hpp"

namespace stampede::special {

namespace detail {

// Continued fraction for the incomplete beta function, modified Lentz method.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::DegenerateInput, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(T > t) for Student's t with `dof` degrees of freedom.
inline double student_t_sf(double t, int dof) {
  if (dof < 1) throw Error(ErrorKind::InvalidDof, "student_t_sf: dof must be >= 1, got " + std::to_string(dof));
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (t < 0.0) return 1.0 - student_t_sf(-t, dof);
  if (std::isinf(t)) return 0.0;
  const double nu = static_cast<double>(dof);
  // I_{nu/(nu+t^2)}(nu/2, 1/2) is the two-sided tail mass.
  const double x = nu / (nu + t * t);
  return 0.5 * regularized_incomplete_beta(0.5 * nu, 0.5, x);
}

/// Two-sided p-value 2 * P(T > |t|).
inline double student_t_two_sided_p(double t, int dof) {
  return std::fmin(1.0, 2.0 * student_t_sf(std::fabs(t), dof));
}

}  // namespace stampede::special

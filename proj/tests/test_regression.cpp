#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "stampede/dataset.hpp"
#include "stampede/regression.hpp"

using namespace stampede;
using namespace stampede::regression;
using Rational = boost::multiprecision::cpp_rational;

namespace {

// Exact normal-equations solve by Gauss-Jordan over the rationals. Test-only
// oracle; shares nothing with the floating-point path under test.
std::vector<Rational> exact_ols(const std::vector<std::vector<Rational>>& x, const std::vector<Rational>& y) {
  const std::size_t p = x.front().size();
  std::vector<std::vector<Rational>> a(p, std::vector<Rational>(p + 1, 0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t r = 0; r < x.size(); ++r) a[i][j] += x[r][i] * x[r][j];
    }
    for (std::size_t r = 0; r < x.size(); ++r) a[i][p] += x[r][i] * y[r];
  }
  for (std::size_t i = 0; i < p; ++i) {
    std::size_t piv = i;
    while (a[piv][i] == 0) ++piv;
    std::swap(a[i], a[piv]);
    const Rational d = a[i][i];
    for (auto& v : a[i]) v /= d;
    for (std::size_t k = 0; k < p; ++k) {
      if (k == i || a[k][i] == 0) continue;
      const Rational f = a[k][i];
      for (std::size_t j = 0; j <= p; ++j) a[k][j] -= f * a[i][j];
    }
  }
  std::vector<Rational> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = a[i][p];
  return beta;
}

const std::vector<double> kDensity = {8, 7, 6, 6, 8};
const std::vector<double> kAdmin = {3, 4, 5, 6, 4};
const std::vector<double> kFatalities = {700, 50, 39, 36, 48};
const std::vector<int> kYears = {1954, 1986, 2003, 2013, 2025};

DesignMatrix panel_design() { return DesignMatrix::from_columns({"density", "admin_score"}, {kDensity, kAdmin}, true); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected stampede::Error";
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(Oracle, ExactRationalSolutionOfPanelModel) {
  std::vector<std::vector<Rational>> x;
  std::vector<Rational> y;
  for (std::size_t r = 0; r < kDensity.size(); ++r) {
    x.push_back({1, static_cast<int>(kDensity[r]), static_cast<int>(kAdmin[r])});
    y.push_back(static_cast<int>(kFatalities[r]));
  }
  const auto beta = exact_ols(x, y);
  EXPECT_EQ(beta[0], Rational(6065, 4));  // 1516.25
  EXPECT_EQ(beta[1], Rational(-211, 4));  // -52.75
  EXPECT_EQ(beta[2], Rational(-221));
}

TEST(FitOls, MatchesExactOracle) {
  const auto fit = fit_ols(panel_design(), kFatalities);
  ASSERT_EQ(fit.coefficients.size(), 3u);
  EXPECT_NEAR(fit.coefficients[0], 1516.25, 1e-9);
  EXPECT_NEAR(fit.coefficients[1], -52.75, 1e-9);
  EXPECT_NEAR(fit.coefficients[2], -221.0, 1e-9);
  EXPECT_EQ(fit.dof, 2);
  ASSERT_TRUE(fit.diagnostics);
  EXPECT_GE(fit.r_squared, 0.0);
  EXPECT_LE(fit.r_squared, 1.0);
  for (double p : fit.diagnostics->p_values) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(FitOls, ResidualsOrthogonalToColumns) {
  const auto x = panel_design();
  const auto fit = fit_ols(x, kFatalities);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double dot = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) dot += x(r, c) * fit.residuals[r];
    EXPECT_LT(std::fabs(dot), 1e-8) << "column " << c;
  }
}

TEST(FitOls, DiagnosticsMatchTextbookFormulas) {
  const auto fit = fit_ols(panel_design(), kFatalities);
  // sigma^2 from exact residuals: y - X beta with the rational beta.
  double ssr = 0;
  for (std::size_t r = 0; r < 5; ++r) {
    const double e = kFatalities[r] - (1516.25 - 52.75 * kDensity[r] - 221.0 * kAdmin[r]);
    ssr += e * e;
  }
  EXPECT_NEAR(fit.diagnostics->sigma2, ssr / 2.0, 1e-6 * ssr);
  for (std::size_t c = 0; c < 3; ++c) {
    const double t = fit.diagnostics->t_stats[c];
    const boost::math::students_t dist(2);
    EXPECT_NEAR(fit.diagnostics->p_values[c], 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 1e-9);
  }
}

TEST(FitOls, ExactFitCase) {
  std::vector<double> y;
  for (double d : kDensity) y.push_back(2 * d);
  const auto fit = fit_ols(panel_design(), y);
  EXPECT_NEAR(fit.coefficients[0], 0.0, 1e-9);
  EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-9);
  EXPECT_NEAR(fit.coefficients[2], 0.0, 1e-9);
  for (double e : fit.residuals) EXPECT_NEAR(e, 0.0, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitOls, ErrorPaths) {
  const auto dup = DesignMatrix::from_columns({"density", "density_again"}, {kDensity, kDensity}, true);
  EXPECT_EQ(kind_of([&] { fit_ols(dup, kFatalities); }), ErrorKind::RankDeficient);
  const auto zero = DesignMatrix::from_columns({"zero"}, {{0, 0, 0, 0, 0}}, true);
  EXPECT_EQ(kind_of([&] { fit_ols(zero, kFatalities); }), ErrorKind::RankDeficient);

  const auto wide = DesignMatrix::from_columns({"a", "b"}, {{1, 2}, {3, 5}}, true);
  EXPECT_EQ(kind_of([&] { fit_ols(wide, std::vector<double>{1, 2}); }), ErrorKind::Underdetermined);
  EXPECT_EQ(kind_of([&] { fit_ols(panel_design(), std::vector<double>{1, 2}); }), ErrorKind::DimensionMismatch);
}

TEST(FitOls, SquareSystemHasNoDiagnostics) {
  const auto x = DesignMatrix::from_columns({"a"}, {{1, 3}}, true);
  const auto fit = fit_ols(x, std::vector<double>{2, 6});
  EXPECT_EQ(fit.dof, 0);
  EXPECT_FALSE(fit.diagnostics);
  EXPECT_NEAR(fit.coefficients[0], 0.0, 1e-12);
  EXPECT_NEAR(fit.coefficients[1], 2.0, 1e-12);
}

TEST(Predict, Examples) {
  const auto fit = fit_ols(panel_design(), kFatalities);
  EXPECT_NEAR(predict(fit, std::vector<double>{1, 8, 3}), 431.25, 1e-9);
  EXPECT_NEAR(predict(fit, std::vector<double>{1, 7, 4.4}), 174.6, 1e-9);  // mean row -> mean response
  EXPECT_NEAR(predict(fit, std::vector<double>{1, 0, 0}), fit.coefficients[0], 0.0);
  EXPECT_EQ(kind_of([&] { predict(fit, std::vector<double>{1, 8}); }), ErrorKind::DimensionMismatch);
}

TEST(Invariants, RandomDesigns) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 6 + rng() % 20;
    std::vector<double> a(n), b(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng) * 10 + 3;
      y[i] = 2 * a[i] - b[i] + u(rng) * 4 + 100;
    }
    const auto x = DesignMatrix::from_columns({"a", "b"}, {a, b}, true);
    const auto fit = fit_ols(x, y);

    // Orthogonality scaled by ||X|| * ||y||.
    double xnorm = 0, ynorm = 0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < 3; ++c) xnorm += x(r, c) * x(r, c);
      ynorm += y[r] * y[r];
    }
    const double scale = std::sqrt(xnorm) * std::sqrt(ynorm);
    for (std::size_t c = 0; c < 3; ++c) {
      double dot = 0;
      for (std::size_t r = 0; r < n; ++r) dot += x(r, c) * fit.residuals[r];
      EXPECT_LT(std::fabs(dot), 1e-8 * scale);
    }

    // Refit on the model's own predictions.
    const auto refit = fit_ols(x, fit.fitted);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(refit.coefficients[c], fit.coefficients[c], 1e-10 * (1 + std::fabs(fit.coefficients[c])));

    // Affine rescaling of a predictor leaves R^2 and predictions alone.
    std::vector<double> b2(n);
    for (std::size_t i = 0; i < n; ++i) b2[i] = 3.5 * b[i] - 7;
    const auto fit2 = fit_ols(DesignMatrix::from_columns({"a", "b"}, {a, b2}, true), y);
    EXPECT_NEAR(fit2.r_squared, fit.r_squared, 1e-9);
    EXPECT_NEAR(fit2.coefficients[2], fit.coefficients[2] / 3.5, 1e-9);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fit2.fitted[i], fit.fitted[i], 1e-9 * (1 + std::fabs(y[i])));

    // Min-max normalizing predictors changes beta but not fitted values.
    const auto an = dataset::minmax_normalize(a).values;
    const auto bn = dataset::minmax_normalize(b).values;
    const auto fit3 = fit_ols(DesignMatrix::from_columns({"a", "b"}, {an, bn}, true), y);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fit3.fitted[i], fit.fitted[i], 1e-9 * (1 + std::fabs(y[i])));

    EXPECT_GE(fit.r_squared, 0.0);
    EXPECT_LE(fit.r_squared, 1.0);
  }
}

TEST(Trend, PanelFatalities) {
  // Independent exact oracle: Sxy / Sxx over the rationals.
  Rational mx = 0, my = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    mx += kYears[i];
    my += static_cast<int>(kFatalities[i]);
  }
  mx /= 5;
  my /= 5;
  Rational sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    sxy += (kYears[i] - mx) * (static_cast<int>(kFatalities[i]) - my);
    sxx += (kYears[i] - mx) * (kYears[i] - mx);
  }
  const Rational exact = sxy / sxx;
  EXPECT_EQ(exact, Rational(-69494, 7607));

  const auto fit = fit_trend(kYears, kFatalities);
  EXPECT_NEAR(fit.slope, -9.1355, 1e-3);
  EXPECT_NEAR(fit.slope, static_cast<double>(exact), 1e-12);
}

TEST(Trend, TrivialCases) {
  const std::vector<int> yrs = {2000, 2001, 2002};
  EXPECT_EQ(fit_trend(yrs, std::vector<double>{4, 4, 4}).slope, 0.0);
  const auto two = fit_trend(std::vector<int>{0, 1}, std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(two.slope, 1.0);
  EXPECT_DOUBLE_EQ(two.intercept, 0.0);
  EXPECT_EQ(kind_of([] { fit_trend(std::vector<int>{2000, 2000}, std::vector<double>{1, 2}); }), ErrorKind::DegenerateInput);
  EXPECT_EQ(kind_of([] { fit_trend(std::vector<int>{2000}, std::vector<double>{1}); }), ErrorKind::DegenerateInput);
}

TEST(StudentT, ClosedForms) {
  EXPECT_DOUBLE_EQ(student_t_sf(0.0, 1), 0.5);
  EXPECT_DOUBLE_EQ(student_t_sf(0.0, 17), 0.5);
  EXPECT_NEAR(student_t_sf(1.0, 1), 0.5 - std::atan(1.0) / std::numbers::pi, 1e-12);
  const double t = 1.414213;
  EXPECT_NEAR(student_t_sf(t, 2), 0.5 - t / (2 * std::sqrt(2 + t * t)), 1e-10);
  EXPECT_NEAR(student_t_sf(t, 2), 0.14645, 1e-5);
  EXPECT_EQ(kind_of([] { student_t_sf(1.0, 0); }), ErrorKind::InvalidDof);
}

TEST(StudentT, AgreesWithBoostMath) {
  for (int dof : {1, 2, 3, 5, 10, 30, 100, 1000, 100000}) {
    const boost::math::students_t dist(dof);
    for (double t = -12; t <= 12; t += 0.173) {
      EXPECT_NEAR(student_t_sf(t, dof), boost::math::cdf(boost::math::complement(dist, t)), 1e-8)
          << "dof=" << dof << " t=" << t;
    }
  }
}

TEST(StudentT, MonotoneAndSymmetric) {
  for (int dof : {1, 2, 4, 9, 50}) {
    double prev = 1.0;
    for (double t = -30; t <= 30; t += 0.05) {
      const double s = student_t_sf(t, dof);
      EXPECT_LE(s, prev + 1e-15);
      EXPECT_NEAR(s + student_t_sf(-t, dof), 1.0, 1e-10);
      prev = s;
    }
  }
}

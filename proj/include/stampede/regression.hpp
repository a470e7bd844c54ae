#pragma once

// Ordinary least squares for the fatality model
//
//   fatalities = b0 + b1 * density + b2 * admin_score [+ b3 * temp] + e
//
// and a single-predictor trend of any series against calendar year.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stampede/error.hpp"
#include "stampede/special_functions.hpp"

namespace stampede::regression {

using special::student_t_sf;

inline constexpr const char* kInterceptName = "intercept";

/// Row-major n x p matrix with named columns. When `has_intercept` is set the
/// first column is all ones and is named "intercept".
class DesignMatrix {
 public:
  DesignMatrix() = default;

  /// Builds from predictor columns (each of length n), optionally prepending
  /// an intercept column.
  static DesignMatrix from_columns(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns,
                                   bool intercept) {
    if (names.size() != columns.size()) {
      throw Error(ErrorKind::DimensionMismatch, "design matrix: names and columns differ in count");
    }
    DesignMatrix m;
    m.has_intercept_ = intercept;
    m.rows_ = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns) {
      if (c.size() != m.rows_) throw Error(ErrorKind::DimensionMismatch, "design matrix: ragged columns");
    }
    if (intercept) m.names_.emplace_back(kInterceptName);
    m.names_.insert(m.names_.end(), names.begin(), names.end());
    m.cols_ = m.names_.size();
    m.data_.resize(m.rows_ * m.cols_);
    for (std::size_t r = 0; r < m.rows_; ++r) {
      std::size_t c = 0;
      if (intercept) m.data_[r * m.cols_ + c++] = 1.0;
      for (const auto& col : columns) m.data_[r * m.cols_ + c++] = col[r];
    }
    return m;
  }

  /// Builds from explicit rows; no intercept column is added.
  static DesignMatrix from_rows(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
    DesignMatrix m;
    m.names_ = names;
    m.cols_ = names.size();
    m.rows_ = rows.size();
    m.has_intercept_ = !names.empty() && names.front() == kInterceptName;
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw Error(ErrorKind::DimensionMismatch, "design matrix: row length differs from names");
      m.data_.insert(m.data_.end(), row.begin(), row.end());
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool has_intercept() const noexcept { return has_intercept_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<double> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  bool has_intercept_ = false;
};

struct Diagnostics {
  double sigma2 = 0.0;  // residual variance e'e / dof
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;  // two-sided
};

struct RegressionFit {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> residuals;
  std::vector<double> fitted;
  double r_squared = 0.0;
  int dof = 0;
  bool has_intercept = false;
  std::optional<Diagnostics> diagnostics;  // absent when dof == 0

  double coefficient(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorKind::DimensionMismatch, "no coefficient named '" + name + "'");
    return coefficients[static_cast<std::size_t>(it - names.begin())];
  }
};

struct TrendFit {
  double slope = 0.0;  // response units per year
  double intercept = 0.0;
  double r_squared = 0.0;
};

namespace detail {

// Lower-triangular Cholesky factor of a symmetric matrix stored row-major.
// Returns false when a pivot falls at or below `tol`.
inline bool cholesky(std::vector<double>& a, std::size_t n, double tol) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > tol)) return false;
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  return true;
}

inline std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double> b) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l[i * n + k] * b[k];
    b[i] /= l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= l[k * n + i] * b[k];
    b[i] /= l[i * n + i];
  }
  return b;
}

}  // namespace detail

/// Least-squares fit via the normal equations. Columns are scaled to unit
/// norm before a Cholesky factorization (pivot tolerance 1e-12), followed by
/// two rounds of iterative refinement on the residual.
inline RegressionFit fit_ols(const DesignMatrix& x, std::span<const double> y) {
  constexpr double kPivotTolerance = 1e-12;
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (y.size() != n) throw Error(ErrorKind::DimensionMismatch, "fit_ols: y has " + std::to_string(y.size()) +
                                                                   " rows, X has " + std::to_string(n));
  if (p == 0) throw Error(ErrorKind::DimensionMismatch, "fit_ols: design matrix has no columns");
  if (n < p) {
    throw Error(ErrorKind::Underdetermined,
                "fit_ols: " + std::to_string(n) + " observations for " + std::to_string(p) + " coefficients");
  }

  std::vector<double> scale(p, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += x(r, c) * x(r, c);
    scale[c] = std::sqrt(s);
    if (!(scale[c] > 0.0)) throw Error(ErrorKind::RankDeficient, "fit_ols: column '" + x.names()[c] + "' is all zero");
  }

  // Gram matrix of the scaled columns (unit diagonal up to rounding).
  std::vector<double> gram(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += x(r, i) * x(r, j);
      gram[i * p + j] = gram[j * p + i] = s / (scale[i] * scale[j]);
    }
  }
  std::vector<double> factor = gram;
  if (!detail::cholesky(factor, p, kPivotTolerance)) {
    throw Error(ErrorKind::RankDeficient, "fit_ols: X'X is singular within tolerance");
  }

  const auto scaled_xt = [&](std::span<const double> v) {
    std::vector<double> out(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += x(r, c) * v[r];
      out[c] = s / scale[c];
    }
    return out;
  };
  const auto residual_of = [&](const std::vector<double>& beta) {
    std::vector<double> e(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = x.row(r);
      e[r] = y[r] - std::inner_product(row.begin(), row.end(), beta.begin(), 0.0);
    }
    return e;
  };

  std::vector<double> beta(p, 0.0);
  {
    const auto z = detail::cholesky_solve(factor, p, scaled_xt(y));
    for (std::size_t c = 0; c < p; ++c) beta[c] = z[c] / scale[c];
  }
  for (int round = 0; round < 2; ++round) {
    const auto e = residual_of(beta);
    const auto dz = detail::cholesky_solve(factor, p, scaled_xt(e));
    for (std::size_t c = 0; c < p; ++c) beta[c] += dz[c] / scale[c];
  }

  RegressionFit fit;
  fit.names = x.names();
  fit.coefficients = beta;
  fit.residuals = residual_of(beta);
  fit.fitted.resize(n);
  for (std::size_t r = 0; r < n; ++r) fit.fitted[r] = y[r] - fit.residuals[r];
  fit.dof = static_cast<int>(n - p);
  fit.has_intercept = x.has_intercept();

  double ssr = 0.0;
  for (double e : fit.residuals) ssr += e * e;
  double sst = 0.0;
  if (fit.has_intercept) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    for (double v : y) sst += (v - mean) * (v - mean);
  } else {
    for (double v : y) sst += v * v;
  }
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
  if (fit.has_intercept) fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);

  if (fit.dof > 0) {
    Diagnostics diag;
    diag.sigma2 = ssr / fit.dof;
    diag.std_errors.resize(p);
    diag.t_stats.resize(p);
    diag.p_values.resize(p);
    for (std::size_t c = 0; c < p; ++c) {
      // Diagonal of (X'X)^-1 = D^-1 G^-1 D^-1, taken column by column.
      std::vector<double> unit(p, 0.0);
      unit[c] = 1.0;
      const double inv_cc = detail::cholesky_solve(factor, p, unit)[c] / (scale[c] * scale[c]);
      const double se = std::sqrt(diag.sigma2 * inv_cc);
      diag.std_errors[c] = se;
      if (se > 0.0) {
        diag.t_stats[c] = beta[c] / se;
        diag.p_values[c] = special::student_t_two_sided_p(diag.t_stats[c], fit.dof);
      } else {
        // Exact fit: the coefficient is known without error.
        diag.t_stats[c] = beta[c] == 0.0 ? 0.0 : std::copysign(HUGE_VAL, beta[c]);
        diag.p_values[c] = beta[c] == 0.0 ? 1.0 : 0.0;
      }
    }
    fit.diagnostics = std::move(diag);
  }
  return fit;
}

inline double predict(const RegressionFit& fit, std::span<const double> row) {
  if (row.size() != fit.coefficients.size()) {
    throw Error(ErrorKind::DimensionMismatch, "predict: row has " + std::to_string(row.size()) + " entries, model has " +
                                                  std::to_string(fit.coefficients.size()));
  }
  return std::inner_product(row.begin(), row.end(), fit.coefficients.begin(), 0.0);
}

/// Simple OLS of values on calendar year, using centered sums.
inline TrendFit fit_trend(std::span<const int> years, std::span<const double> values) {
  if (years.size() != values.size()) throw Error(ErrorKind::DimensionMismatch, "fit_trend: years and values differ in length");
  if (years.size() < 2) throw Error(ErrorKind::DegenerateInput, "fit_trend: need at least two points");
  const double n = static_cast<double>(years.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    mean_x += years[i];
    mean_y += values[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    const double dx = years[i] - mean_x;
    const double dy = values[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::DegenerateInput, "fit_trend: all years are equal");
  TrendFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace stampede::regression

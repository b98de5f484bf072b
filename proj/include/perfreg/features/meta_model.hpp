#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/linalg.hpp"
#include "perfreg/problems.hpp"

namespace perfreg {

namespace detail {

struct OlsFit {
  std::vector<double> coefs;  // intercept first
  double adj_r2 = 0.0;
};

// Ordinary least squares through the normal equations; adjusted R^2 is 0
// by convention when the target has no variance.
inline OlsFit ols_fit(const RowMatrix& design, std::span<const double> y) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols;  // includes the intercept column
  if (n <= p)
    throw DegenerateInputError("ela_meta: singular design matrix (too few points)");
  RowMatrix gram(p, p);
  std::vector<double> rhs(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = design.data.data() + r * p;
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] += row[i] * y[r];
      for (std::size_t j = i; j < p; ++j) gram.at(i, j) += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) gram.at(i, j) = gram.at(j, i);

  OlsFit fit;
  fit.coefs = solve_linear_system(std::move(gram), std::move(rhs),
                                  "design matrix (ela_meta)");

  const double ybar = [&] {
    double s = 0.0;
    for (double v : y) s += v;
    return s / static_cast<double>(n);
  }();
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = design.data.data() + r * p;
    double pred = 0.0;
    for (std::size_t i = 0; i < p; ++i) pred += row[i] * fit.coefs[i];
    ss_res += (y[r] - pred) * (y[r] - pred);
    ss_tot += (y[r] - ybar) * (y[r] - ybar);
  }
  if (ss_tot == 0.0) {
    fit.adj_r2 = 0.0;
    return fit;
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  const double df = static_cast<double>(n - 1) / static_cast<double>(n - p);
  fit.adj_r2 = 1.0 - (1.0 - r2) * df;
  return fit;
}

// max/min of absolute coefficients, capped at 1e12 to keep the feature
// finite when the smallest coefficient vanishes.
inline double abs_coef_ratio(double max_abs, double min_abs) {
  constexpr double kCap = 1e12;
  if (min_abs * kCap <= max_abs) return kCap;
  return max_abs / min_abs;
}

}  // namespace detail

// Meta-model features: adjusted R^2 and coefficient statistics of a
// simple linear fit, plus adjusted R^2 of linear-with-interactions,
// pure-quadratic and quadratic-with-interactions fits, and the quadratic
// conditioning ratio. 9 values.
inline std::vector<double> ela_meta_group(const DesignSet& ds) {
  const std::size_t n = ds.fitness.size();
  const std::size_t d = ds.points.cols;
  if (n <= d + 2)
    throw DegenerateInputError("ela_meta: need more than d + 2 points");

  const auto build = [&](bool squares, bool interactions) {
    std::size_t p = 1 + d;
    if (squares) p += d;
    if (interactions) p += d * (d - 1) / 2;
    RowMatrix m(n, p);
    for (std::size_t r = 0; r < n; ++r) {
      std::size_t c = 0;
      m.at(r, c++) = 1.0;
      for (std::size_t i = 0; i < d; ++i) m.at(r, c++) = ds.points.at(r, i);
      if (squares)
        for (std::size_t i = 0; i < d; ++i)
          m.at(r, c++) = ds.points.at(r, i) * ds.points.at(r, i);
      if (interactions)
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = i + 1; j < d; ++j)
            m.at(r, c++) = ds.points.at(r, i) * ds.points.at(r, j);
    }
    return m;
  };

  const detail::OlsFit lin = detail::ols_fit(build(false, false), ds.fitness);
  const detail::OlsFit lin_inter = detail::ols_fit(build(false, true), ds.fitness);
  const detail::OlsFit quad = detail::ols_fit(build(true, false), ds.fitness);
  const detail::OlsFit quad_inter = detail::ols_fit(build(true, true), ds.fitness);

  double coef_min = std::abs(lin.coefs[1]), coef_max = std::abs(lin.coefs[1]);
  for (std::size_t i = 1; i <= d; ++i) {
    coef_min = std::min(coef_min, std::abs(lin.coefs[i]));
    coef_max = std::max(coef_max, std::abs(lin.coefs[i]));
  }
  double qcoef_min = std::abs(quad.coefs[1 + d]), qcoef_max = std::abs(quad.coefs[1 + d]);
  for (std::size_t i = 1 + d; i < 1 + 2 * d; ++i) {
    qcoef_min = std::min(qcoef_min, std::abs(quad.coefs[i]));
    qcoef_max = std::max(qcoef_max, std::abs(quad.coefs[i]));
  }

  return {lin.adj_r2,
          lin.coefs[0],
          coef_min,
          coef_max,
          detail::abs_coef_ratio(coef_max, coef_min),
          lin_inter.adj_r2,
          quad.adj_r2,
          detail::abs_coef_ratio(qcoef_max, qcoef_min),
          quad_inter.adj_r2};
}

}  // namespace perfreg

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"

namespace perfreg {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw ContractError("mean: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Median with the even-count midpoint convention.
inline double median(std::span<const double> v) {
  if (v.empty()) throw ContractError("median: empty input");
  std::vector<double> c(v.begin(), v.end());
  const std::size_t n = c.size();
  const std::size_t hi = n / 2;
  std::nth_element(c.begin(), c.begin() + hi, c.end());
  const double upper = c[hi];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(c.begin(), c.begin() + hi);
  return 0.5 * (lower + upper);
}

// Sample standard deviation (n-1 denominator); 0 for n < 2.
inline double sample_sd(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(n - 1));
}

// Pearson correlation; returns `fallback` when either side is constant.
inline double pearson_or(std::span<const double> x, std::span<const double> y,
                         double fallback) {
  if (x.size() != y.size() || x.empty())
    throw ContractError("pearson: mismatched or empty inputs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return fallback;
  return sxy / std::sqrt(sxx * syy);
}

// Linearly interpolated quantile (R type 7).
inline double quantile_type7(std::span<const double> v, double q) {
  if (v.empty()) throw ContractError("quantile: empty input");
  if (q < 0.0 || q > 1.0) throw ContractError("quantile: q outside [0, 1]");
  std::vector<double> c(v.begin(), v.end());
  std::sort(c.begin(), c.end());
  const double h = q * static_cast<double>(c.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= c.size()) return c.back();
  const double frac = h - static_cast<double>(lo);
  return c[lo] + frac * (c[lo + 1] - c[lo]);
}

}  // namespace perfreg

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/problems.hpp"
#include "perfreg/stats.hpp"

namespace perfreg {

namespace detail {

inline double point_distance(const RowMatrix& pts, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t c = 0; c < pts.cols; ++c) {
    const double d = pts.at(a, c) - pts.at(b, c);
    s += d * d;
  }
  return std::sqrt(s);
}

// Indices ordered by (fitness, original index); the stable tie-break that
// defines every "best q%" subset.
inline std::vector<std::size_t> fitness_order(std::span<const double> fitness) {
  std::vector<std::size_t> idx(fitness.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (fitness[a] != fitness[b]) return fitness[a] < fitness[b];
    return a < b;
  });
  return idx;
}

inline std::size_t quantile_subset_size(double q, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
}

}  // namespace detail

// Dispersion features: for each quantile q, the ratio and difference of
// the {mean, median} pairwise distance among the best ceil(q*n) points
// versus among all points. 4 statistics x 4 quantiles = 16 values,
// ordered ratio_mean, ratio_median, diff_mean, diff_median (quantiles
// ascending within each statistic).
inline std::vector<double> disp_group(const DesignSet& ds,
                                      std::span<const double> quantiles) {
  const std::size_t n = ds.fitness.size();
  if (n < 2) throw DegenerateInputError("disp: need at least two points");

  std::vector<double> all_dists;
  all_dists.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      all_dists.push_back(detail::point_distance(ds.points, a, b));
  const double all_mean = mean(all_dists);
  const double all_median = median(all_dists);
  if (all_mean == 0.0 || all_median == 0.0)
    throw DegenerateInputError("disp: sample points are (near-)coincident");

  const std::vector<std::size_t> order = detail::fitness_order(ds.fitness);

  std::vector<double> sub_mean(quantiles.size()), sub_median(quantiles.size());
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi) {
    const std::size_t k = detail::quantile_subset_size(quantiles[qi], n);
    if (k < 2)
      throw DegenerateInputError("disp: quantile " + std::to_string(quantiles[qi]) +
                                 " selects fewer than two points");
    std::vector<double> dists;
    dists.reserve(k * (k - 1) / 2);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        dists.push_back(detail::point_distance(ds.points, order[a], order[b]));
    sub_mean[qi] = mean(dists);
    sub_median[qi] = median(dists);
  }

  std::vector<double> out;
  out.reserve(4 * quantiles.size());
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi)
    out.push_back(sub_mean[qi] / all_mean);
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi)
    out.push_back(sub_median[qi] / all_median);
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi)
    out.push_back(sub_mean[qi] - all_mean);
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi)
    out.push_back(sub_median[qi] - all_median);
  return out;
}

}  // namespace perfreg

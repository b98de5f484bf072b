#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/features/dispersion.hpp"
#include "perfreg/problems.hpp"
#include "perfreg/stats.hpp"

namespace perfreg {

// Nearest-better-clustering features. "Better" orders points by
// (fitness, index), so the best point is unique; its nearest-better
// distance is the maximum pairwise distance by convention. Emits
// sd(dn)/sd(dnb), mean(dn)/mean(dnb), cor(dn, dnb), the coefficient of
// variation of the dn/dnb ratios, and cor(fitness, nearest-better
// indegree). 5 values.
inline std::vector<double> nbc_group(const DesignSet& ds) {
  const std::size_t n = ds.fitness.size();
  if (n < 3) throw DegenerateInputError("nbc: need at least three points");

  const auto better = [&](std::size_t a, std::size_t b) {
    if (ds.fitness[a] != ds.fitness[b]) return ds.fitness[a] < ds.fitness[b];
    return a < b;
  };

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (better(i, best)) best = i;

  std::vector<double> dn(n), dnb(n);
  std::vector<double> indegree(n, 0.0);
  double max_pairwise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nn = -1.0, nb = -1.0;
    std::size_t nb_target = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = detail::point_distance(ds.points, i, j);
      max_pairwise = std::max(max_pairwise, d);
      if (nn < 0.0 || d < nn) nn = d;
      if (better(j, i) && (nb < 0.0 || d < nb || (d == nb && j < nb_target))) {
        nb = d;
        nb_target = j;
      }
    }
    dn[i] = nn;
    dnb[i] = nb;
    if (nb_target < n) indegree[nb_target] += 1.0;
  }
  dnb[best] = max_pairwise;

  for (std::size_t i = 0; i < n; ++i)
    if (dnb[i] == 0.0)
      throw DegenerateInputError("nbc: coincident points give a zero nearest-better distance");

  const double sd_dnb = sample_sd(dnb);
  if (sd_dnb == 0.0)
    throw DegenerateInputError("nbc: nearest-better distances have zero spread");

  std::vector<double> ratio(n);
  for (std::size_t i = 0; i < n; ++i) ratio[i] = dn[i] / dnb[i];
  const double ratio_mean = mean(ratio);
  const double cv =
      ratio_mean == 0.0 ? 0.0 : sample_sd(ratio) / ratio_mean;

  return {sample_sd(dn) / sd_dnb, mean(dn) / mean(dnb),
          pearson_or(dn, dnb, 0.0), cv, pearson_or(ds.fitness, indegree, 0.0)};
}

}  // namespace perfreg

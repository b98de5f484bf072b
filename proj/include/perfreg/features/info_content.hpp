#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/features/dispersion.hpp"
#include "perfreg/problems.hpp"
#include "perfreg/rng.hpp"

namespace perfreg {

namespace detail {

// Greedy nearest-neighbor tour over the sample, starting from a seeded
// index; distance ties go to the smaller point index.
inline std::vector<std::size_t> nearest_neighbor_tour(const RowMatrix& pts,
                                                      std::uint64_t seed) {
  const std::size_t n = pts.rows;
  std::vector<std::size_t> tour;
  tour.reserve(n);
  std::vector<bool> visited(n, false);
  Rng rng(seed);
  std::size_t current = rng.index(n);
  tour.push_back(current);
  visited[current] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t best = n;
    double best_dist = 0.0;
    for (std::size_t cand = 0; cand < n; ++cand) {
      if (visited[cand]) continue;
      const double d = point_distance(pts, current, cand);
      if (best == n || d < best_dist) {
        best = cand;
        best_dist = d;
      }
    }
    visited[best] = true;
    tour.push_back(best);
    current = best;
  }
  return tour;
}

// Entropy of consecutive symbol pairs with differing symbols, base-6 log.
inline double block_pair_entropy(std::span<const int> symbols) {
  if (symbols.size() < 2) return 0.0;
  int counts[3][3] = {};
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
    ++counts[symbols[i] + 1][symbols[i + 1] + 1];
  const double total = static_cast<double>(symbols.size() - 1);
  const double log6 = std::log(6.0);
  double h = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b || counts[a][b] == 0) continue;
      const double p = static_cast<double>(counts[a][b]) / total;
      h -= p * std::log(p) / log6;
    }
  return h;
}

// Partial information content: alternations of the zero-stripped symbol
// sequence, relative to the full sequence length.
inline double partial_information(std::span<const int> symbols) {
  int prev = 0;
  std::size_t changes = 0;
  for (int s : symbols) {
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return static_cast<double>(changes) / static_cast<double>(symbols.size());
}

}  // namespace detail

// Information content features along a seeded nearest-neighbor tour of
// the sample. Fitness differences along the tour are symbolized into
// {-1, 0, 1} at each epsilon; emits h_max (peak block-pair entropy),
// eps_s (log10 of the settling epsilon, H < 0.05), eps_max (the epsilon
// attaining h_max), eps_ratio (log10 of the epsilon halving the partial
// information M0), and m0 (partial information at epsilon 0). 5 values.
inline std::vector<double> ic_group(const DesignSet& ds,
                                    std::span<const double> epsilons,
                                    std::uint64_t seed) {
  const std::size_t n = ds.fitness.size();
  if (n < 3) throw DegenerateInputError("ic: need at least three points");
  if (epsilons.empty()) throw ContractError("ic: empty epsilon grid");

  const std::vector<std::size_t> tour =
      detail::nearest_neighbor_tour(ds.points, mix_seed(seed, 0x6963ULL));
  std::vector<double> diffs(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    diffs[i] = ds.fitness[tour[i + 1]] - ds.fitness[tour[i]];

  std::vector<int> symbols(diffs.size());
  const auto symbolize = [&](double eps) {
    for (std::size_t i = 0; i < diffs.size(); ++i)
      symbols[i] = diffs[i] > eps ? 1 : (diffs[i] < -eps ? -1 : 0);
  };

  double h_max = 0.0;
  double eps_max = epsilons[0];
  std::vector<double> h_values(epsilons.size());
  std::vector<double> m_values(epsilons.size());
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    symbolize(epsilons[e]);
    h_values[e] = detail::block_pair_entropy(symbols);
    m_values[e] = detail::partial_information(symbols);
    if (h_values[e] > h_max) {
      h_max = h_values[e];
      eps_max = epsilons[e];
    }
  }

  symbolize(0.0);
  const double m0 = detail::partial_information(symbols);

  // Settling and half-information sensitivities search the positive grid
  // only; no positive epsilon qualifying maps to the grid maximum, and an
  // already-settled sequence maps to the grid minimum.
  double smallest_pos = 0.0, largest_pos = 0.0;
  for (double e : epsilons)
    if (e > 0.0) {
      if (smallest_pos == 0.0) smallest_pos = e;
      largest_pos = e;
    }
  if (smallest_pos == 0.0) throw ContractError("ic: grid needs a positive epsilon");

  double eps_settle = largest_pos;
  for (std::size_t e = 0; e < epsilons.size(); ++e)
    if (epsilons[e] > 0.0 && h_values[e] < 0.05) {
      eps_settle = epsilons[e];
      break;
    }

  double eps_half = largest_pos;
  if (m0 == 0.0) {
    eps_half = smallest_pos;
  } else {
    for (std::size_t e = 0; e < epsilons.size(); ++e)
      if (epsilons[e] > 0.0 && m_values[e] < 0.5 * m0) {
        eps_half = epsilons[e];
        break;
      }
  }

  return {h_max, std::log10(eps_settle), eps_max, std::log10(eps_half), m0};
}

}  // namespace perfreg

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "perfreg/linalg.hpp"
#include "perfreg/models/grid.hpp"
#include "perfreg/models/tree.hpp"

// ---------------------------------------------------------------------------
// Exhaustive-split-search oracle: an independent CART implementation that
// enumerates every (feature, midpoint) candidate and recomputes each side's
// cost from scratch. Shares only the documented conventions with the
// library: midpoint candidates, tie-break via strict improvement in
// (feature, threshold) scan order, minsplit/purity stopping, mean or median
// leaves.
namespace oracle {

using perfreg::RowMatrix;
using perfreg::SplitCriterion;

inline double side_cost(const std::vector<double>& ys, SplitCriterion crit) {
  if (crit == SplitCriterion::Mae) {
    std::vector<double> sorted = ys;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double med = n % 2 == 1 ? sorted[n / 2]
                                  : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double cost = 0.0;
    for (double y : sorted) cost += std::abs(y - med);
    return cost;
  }
  double m = 0.0;
  for (double y : ys) m += y;
  m /= static_cast<double>(ys.size());
  double sse = 0.0;
  for (double y : ys) sse += (y - m) * (y - m);
  return sse;
}

inline double leaf_value(const std::vector<double>& ys, SplitCriterion crit) {
  if (crit == SplitCriterion::Mae) {
    std::vector<double> sorted = ys;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  double m = 0.0;
  for (double y : ys) m += y;
  return m / static_cast<double>(ys.size());
}

struct Node {
  int feature = -1;
  double threshold = 0.0;
  std::unique_ptr<Node> left, right;
  double value = 0.0;
};

inline std::unique_ptr<Node> build(const RowMatrix& x, const std::vector<double>& y,
                            const std::vector<std::size_t>& rows, SplitCriterion crit,
                            int minsplit) {
  auto node = std::make_unique<Node>();
  std::vector<double> ys;
  for (std::size_t r : rows) ys.push_back(y[r]);
  const double ymin = *std::min_element(ys.begin(), ys.end());
  const double ymax = *std::max_element(ys.begin(), ys.end());

  bool found = false;
  double best_score = 0.0;
  std::size_t best_feature = 0;
  double best_threshold = 0.0;

  if (ymin != ymax && rows.size() >= static_cast<std::size_t>(minsplit)) {
    for (std::size_t f = 0; f < x.cols; ++f) {
      std::vector<double> values;
      for (std::size_t r : rows) values.push_back(x.at(r, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t v = 0; v + 1 < values.size(); ++v) {
        const double threshold = perfreg::detail::split_threshold(values[v], values[v + 1]);
        std::vector<double> ly, ry;
        for (std::size_t r : rows)
          (x.at(r, f) <= threshold ? ly : ry).push_back(y[r]);
        double score;
        if (crit == SplitCriterion::FriedmanMse) {
          double ml = 0.0, mr = 0.0;
          for (double q : ly) ml += q;
          for (double q : ry) mr += q;
          ml /= static_cast<double>(ly.size());
          mr /= static_cast<double>(ry.size());
          const double nl = static_cast<double>(ly.size());
          const double nr = static_cast<double>(ry.size());
          score = -(nl * nr / (nl + nr)) * (ml - mr) * (ml - mr);
        } else {
          score = side_cost(ly, crit) + side_cost(ry, crit);
        }
        // Same documented tie rule as the library: wins must clear a
        // relative tolerance, otherwise the earlier candidate stands.
        if (!found || score < best_score - 1e-10 * (1.0 + std::abs(best_score))) {
          found = true;
          best_score = score;
          best_feature = f;
          best_threshold = threshold;
        }
      }
    }
  }

  if (!found) {
    node->value = leaf_value(ys, crit);
    return node;
  }
  node->feature = static_cast<int>(best_feature);
  node->threshold = best_threshold;
  std::vector<std::size_t> lrows, rrows;
  for (std::size_t r : rows)
    (x.at(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
  node->left = build(x, y, lrows, crit, minsplit);
  node->right = build(x, y, rrows, crit, minsplit);
  return node;
}

inline double predict(const Node& node, std::span<const double> p) {
  if (node.feature < 0) return node.value;
  return p[static_cast<std::size_t>(node.feature)] <= node.threshold
             ? predict(*node.left, p)
             : predict(*node.right, p);
}

}  // namespace oracle

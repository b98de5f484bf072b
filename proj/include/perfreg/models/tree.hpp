#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/linalg.hpp"
#include "perfreg/models/grid.hpp"
#include "perfreg/rng.hpp"

namespace perfreg {

// Axis-aligned CART regression tree. Split candidates are midpoints
// between consecutive distinct sorted feature values; equal-score ties
// resolve to the smallest (feature index, threshold). Leaves predict the
// mean under mse/friedman_mse and the median under mae. Nodes split only
// while they hold at least `minsplit` samples and are not pure; there is
// no depth limit.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const Node& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
};

struct TreeFitOptions {
  SplitCriterion crit = SplitCriterion::Mse;
  int minsplit = 2;
  std::size_t max_features = 0;  // 0 = consider all features at every split
  std::uint64_t seed = 0;
};

namespace detail {

// A candidate only displaces the incumbent split when it wins by more
// than a relative tolerance. Exact-arithmetic ties (frequent under L1
// costs) then resolve to the earlier (feature, threshold) candidate no
// matter how the two scores were accumulated.
inline bool improves_score(double score, double incumbent) {
  return score < incumbent - 1e-10 * (1.0 + std::abs(incumbent));
}

// Split threshold between adjacent sorted values. The midpoint can round
// up to b when a and b are neighboring doubles; clamping to a keeps the
// right child nonempty (routing is x <= threshold).
inline double split_threshold(double a, double b) {
  const double mid = 0.5 * (a + b);
  return mid < b ? mid : a;
}

// Fenwick tree over value ranks carrying counts and sums; backs the exact
// median/L1 computations of the mae criterion sweep.
class RankFenwick {
 public:
  void init(std::size_t n) {
    n_ = n;
    cnt_.assign(n + 1, 0);
    sum_.assign(n + 1, 0.0);
    highbit_ = 1;
    while ((highbit_ << 1) <= n_) highbit_ <<= 1;
  }
  void assign_from(const RankFenwick& other) {
    n_ = other.n_;
    highbit_ = other.highbit_;
    cnt_ = other.cnt_;
    sum_ = other.sum_;
  }
  void add(std::size_t rank, double v, int delta) {
    for (std::size_t i = rank; i <= n_; i += i & (~i + 1)) {
      cnt_[i] += delta;
      sum_[i] += delta > 0 ? v : -v;
    }
  }
  // Rank of the k-th smallest stored element (1-based).
  std::size_t kth(int k) const {
    std::size_t pos = 0;
    for (std::size_t pw = highbit_; pw > 0; pw >>= 1) {
      const std::size_t next = pos + pw;
      if (next <= n_ && cnt_[next] < k) {
        pos = next;
        k -= cnt_[next];
      }
    }
    return pos + 1;
  }
  double prefix_sum(std::size_t rank) const {
    double s = 0.0;
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) s += sum_[i];
    return s;
  }

 private:
  std::size_t n_ = 0;
  std::size_t highbit_ = 1;
  std::vector<int> cnt_;
  std::vector<double> sum_;
};

// Sum of absolute deviations around the median of the c stored elements:
// (sum of the top floor(c/2) values) - (sum of the bottom floor(c/2)).
inline double l1_cost(const RankFenwick& fw, int c, double total) {
  if (c <= 1) return 0.0;
  const int half = c / 2;
  const double bottom = fw.prefix_sum(fw.kth(half));
  const double below_top = fw.prefix_sum(fw.kth(c - half));
  return (total - below_top) - bottom;
}

// Builds one tree over flat feature-major buffers. Every node owns a
// contiguous range of each per-feature order array; splitting partitions
// the ranges stably in place, so sorting happens only once at the root.
class RegressionTreeBuilder {
 public:
  RegressionTreeBuilder(const RowMatrix& x, std::span<const double> y,
                        std::span<const std::size_t> rows, const TreeFitOptions& opt)
      : opt_(opt), rng_(opt.seed), m_(rows.size()), p_(x.cols) {
    colbuf_.resize(p_ * m_);
    yb_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      yb_[i] = y[rows[i]];
      const double* src = x.data.data() + rows[i] * p_;
      for (std::size_t f = 0; f < p_; ++f) colbuf_[f * m_ + i] = src[f];
    }
    orders_.resize(p_ * m_);
    for (std::size_t f = 0; f < p_; ++f) {
      std::uint32_t* ord = order(f);
      std::iota(ord, ord + m_, 0u);
      const double* col = column(f);
      std::sort(ord, ord + m_, [col](std::uint32_t a, std::uint32_t b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
    }
    tmp_.resize(m_);
    goes_left_.assign(m_, 0);
    rank_of_slot_.resize(m_);
  }

  RegressionTree build() {
    RegressionTree tree;
    build_node(tree, 0, m_);
    return tree;
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  double* column(std::size_t f) { return colbuf_.data() + f * m_; }
  std::uint32_t* order(std::size_t f) { return orders_.data() + f * m_; }

  int build_node(RegressionTree& tree, std::size_t start, std::size_t end) {
    const std::size_t m = end - start;
    const std::uint32_t* slots = order(0) + start;

    double ymin = yb_[slots[0]], ymax = yb_[slots[0]];
    for (std::size_t i = 1; i < m; ++i) {
      const double v = yb_[slots[i]];
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }

    Split best;
    if (ymin != ymax && m >= static_cast<std::size_t>(opt_.minsplit))
      best = find_best_split(start, end);

    if (!best.found) {
      const int idx = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({-1, 0.0, -1, -1, leaf_value(start, end)});
      return idx;
    }

    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({static_cast<int>(best.feature), best.threshold, -1, -1, 0.0});

    const double* split_col = column(best.feature);
    std::size_t nl = 0;
    for (std::size_t i = start; i < end; ++i) {
      const std::uint32_t s = order(0)[i];
      const bool left = split_col[s] <= best.threshold;
      goes_left_[s] = left;
      nl += left;
    }
    if (nl == 0 || nl == m)
      throw InternalError("fit_regression_tree: split produced an empty child");
    for (std::size_t f = 0; f < p_; ++f) {
      std::uint32_t* ord = order(f);
      std::size_t li = start, ri = 0;
      for (std::size_t i = start; i < end; ++i) {
        const std::uint32_t s = ord[i];
        if (goes_left_[s]) ord[li++] = s;
        else tmp_[ri++] = s;
      }
      std::copy(tmp_.begin(), tmp_.begin() + static_cast<std::ptrdiff_t>(ri),
                ord + li);
    }

    const int l = build_node(tree, start, start + nl);
    const int r = build_node(tree, start + nl, end);
    tree.nodes[static_cast<std::size_t>(idx)].left = l;
    tree.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
  }

  Split find_best_split(std::size_t start, std::size_t end) {
    std::vector<std::size_t> features;
    if (opt_.max_features > 0 && opt_.max_features < p_) {
      features = rng_.sample_without_replacement(p_, opt_.max_features);
      std::sort(features.begin(), features.end());
    } else {
      features.resize(p_);
      std::iota(features.begin(), features.end(), std::size_t{0});
    }

    if (opt_.crit == SplitCriterion::Mae) prepare_ranks(start, end);

    Split best;
    for (std::size_t f : features) {
      if (opt_.crit == SplitCriterion::Mae) sweep_mae(f, start, end, best);
      else sweep_sums(f, start, end, best);
    }
    return best;
  }

  // mse / friedman_mse sweep with running sums.
  void sweep_sums(std::size_t f, std::size_t start, std::size_t end, Split& best) {
    const double* col = column(f);
    const std::uint32_t* ord = order(f) + start;
    const std::size_t m = end - start;
    double total = 0.0, total_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = yb_[ord[i]];
      total += v;
      total_sq += v * v;
    }
    double lsum = 0.0, lsq = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double yv = yb_[ord[i]];
      lsum += yv;
      lsq += yv * yv;
      const double a = col[ord[i]];
      const double b = col[ord[i + 1]];
      if (a == b) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(m - i - 1);
      double score;
      if (opt_.crit == SplitCriterion::FriedmanMse) {
        const double diff = lsum / nl - (total - lsum) / nr;
        score = -(nl * nr / (nl + nr)) * diff * diff;
      } else {
        const double sse_l = lsq - lsum * lsum / nl;
        const double rsum = total - lsum;
        const double sse_r = (total_sq - lsq) - rsum * rsum / nr;
        score = sse_l + sse_r;
      }
      if (!best.found || improves_score(score, best.score)) {
        best.found = true;
        best.score = score;
        best.feature = f;
        best.threshold = split_threshold(a, b);
      }
    }
  }

  void prepare_ranks(std::size_t start, std::size_t end) {
    const std::uint32_t* slots = order(0) + start;
    const std::size_t m = end - start;
    sorted_by_y_.assign(slots, slots + m);
    std::sort(sorted_by_y_.begin(), sorted_by_y_.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                if (yb_[a] != yb_[b]) return yb_[a] < yb_[b];
                return a < b;
              });
    for (std::size_t r = 0; r < m; ++r) rank_of_slot_[sorted_by_y_[r]] = r + 1;
    full_fw_.init(m);
    for (std::size_t i = 0; i < m; ++i)
      full_fw_.add(rank_of_slot_[slots[i]], yb_[slots[i]], +1);
  }

  void sweep_mae(std::size_t f, std::size_t start, std::size_t end, Split& best) {
    const double* col = column(f);
    const std::uint32_t* ord = order(f) + start;
    const std::size_t m = end - start;
    left_fw_.init(m);
    right_fw_.assign_from(full_fw_);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) total += yb_[ord[i]];
    double lsum = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const std::uint32_t s = ord[i];
      left_fw_.add(rank_of_slot_[s], yb_[s], +1);
      right_fw_.add(rank_of_slot_[s], yb_[s], -1);
      lsum += yb_[s];
      const double a = col[s];
      const double b = col[ord[i + 1]];
      if (a == b) continue;
      const int nl = static_cast<int>(i + 1);
      const int nr = static_cast<int>(m - i - 1);
      const double score =
          l1_cost(left_fw_, nl, lsum) + l1_cost(right_fw_, nr, total - lsum);
      if (!best.found || improves_score(score, best.score)) {
        best.found = true;
        best.score = score;
        best.feature = f;
        best.threshold = split_threshold(a, b);
      }
    }
  }

  double leaf_value(std::size_t start, std::size_t end) {
    const std::size_t n = end - start;
    // Accumulate in ascending slot order so leaf values do not depend on
    // which feature ordering the node range happens to carry.
    std::vector<std::uint32_t> slots(order(0) + start, order(0) + end);
    std::sort(slots.begin(), slots.end());
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = yb_[slots[i]];
    if (opt_.crit == SplitCriterion::Mae) {
      const std::size_t hi = n / 2;
      std::nth_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(hi), ys.end());
      const double upper = ys[hi];
      if (n % 2 == 1) return upper;
      const double lower =
          *std::max_element(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(hi));
      return 0.5 * (lower + upper);
    }
    double s = 0.0;
    for (double v : ys) s += v;
    return s / static_cast<double>(n);
  }

  TreeFitOptions opt_;
  Rng rng_;
  std::size_t m_ = 0;
  std::size_t p_ = 0;
  std::vector<double> colbuf_;  // feature-major, p_ x m_
  std::vector<double> yb_;
  std::vector<std::uint32_t> orders_;  // feature-major sorted slot ids
  std::vector<std::uint32_t> tmp_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::size_t> rank_of_slot_;
  std::vector<std::uint32_t> sorted_by_y_;
  RankFenwick full_fw_, left_fw_, right_fw_;
};

}  // namespace detail

// Fits one CART regression tree on the rows selected by `rows` (repeats
// allowed, e.g. a bootstrap sample).
inline RegressionTree fit_regression_tree_on(const RowMatrix& x, std::span<const double> y,
                                             std::span<const std::size_t> rows,
                                             const TreeFitOptions& opt) {
  if (x.rows == 0 || x.cols == 0 || rows.empty())
    throw ContractError("fit_regression_tree: empty training data");
  if (y.size() != x.rows)
    throw ContractError("fit_regression_tree: X/y row mismatch");
  detail::RegressionTreeBuilder builder(x, y, rows, opt);
  return builder.build();
}

inline RegressionTree fit_regression_tree(const RowMatrix& x, std::span<const double> y,
                                          const TreeFitOptions& opt) {
  std::vector<std::size_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_regression_tree_on(x, y, rows, opt);
}

}  // namespace perfreg

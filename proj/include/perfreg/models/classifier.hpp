#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/linalg.hpp"
#include "perfreg/models/forest.hpp"
#include "perfreg/models/grid.hpp"
#include "perfreg/rng.hpp"

namespace perfreg {

enum class SplitMeasure { Gini, Entropy };

inline const char* split_measure_name(SplitMeasure m) {
  return m == SplitMeasure::Gini ? "gini" : "entropy";
}

struct ClassifierConfig {
  Technique technique = Technique::RandomForest;
  SplitMeasure split_measure = SplitMeasure::Gini;
  int minsplit = 2;
  int nest = 9;

  std::string canonical_name() const {
    std::string s = technique_name(technique);
    s += std::string("_crit-") + split_measure_name(split_measure);
    s += "_minsplit-" + std::to_string(minsplit);
    s += "_nest-" + std::to_string(nest);
    return s;
  }
};

// The three voting members used for problem-class assignment.
inline std::vector<ClassifierConfig> default_classifier_configs() {
  return {
      {Technique::BaggingDT, SplitMeasure::Entropy, 2, 9},
      {Technique::RandomForest, SplitMeasure::Entropy, 2, 9},
      {Technique::RandomForest, SplitMeasure::Gini, 2, 9},
  };
}

// CART classification tree over label ids 0..K-1. Same split-candidate
// and tie-break conventions as the regression tree; leaves predict the
// majority label (ties to the smallest label id).
struct ClassificationTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };
  std::vector<Node> nodes;

  int predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const Node& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
  }
};

struct ClassTreeFitOptions {
  SplitMeasure measure = SplitMeasure::Gini;
  int minsplit = 2;
  int max_depth = -1;  // -1 = unlimited
  std::size_t max_features = 0;
  std::uint64_t seed = 0;
};

namespace detail {

class ClassificationTreeBuilder {
 public:
  ClassificationTreeBuilder(const RowMatrix& x, std::span<const int> labels,
                            std::span<const std::size_t> rows, int n_labels,
                            const ClassTreeFitOptions& opt)
      : opt_(opt), rng_(opt.seed), m_(rows.size()), p_(x.cols), k_(n_labels) {
    colbuf_.resize(p_ * m_);
    lb_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      lb_[i] = labels[rows[i]];
      const double* src = x.data.data() + rows[i] * p_;
      for (std::size_t f = 0; f < p_; ++f) colbuf_[f * m_ + i] = src[f];
    }
    slots_.resize(m_);
    std::iota(slots_.begin(), slots_.end(), 0u);
    counts_.resize(static_cast<std::size_t>(k_));
    left_counts_.resize(static_cast<std::size_t>(k_));
  }

  ClassificationTree build() {
    ClassificationTree tree;
    build_node(tree, 0, m_, 0);
    return tree;
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  const double* column(std::size_t f) const { return colbuf_.data() + f * m_; }

  int majority_label(std::size_t start, std::size_t end) const {
    std::vector<int> c(static_cast<std::size_t>(k_), 0);
    for (std::size_t i = start; i < end; ++i) ++c[static_cast<std::size_t>(lb_[slots_[i]])];
    int best = 0;
    for (int l = 1; l < k_; ++l)
      if (c[static_cast<std::size_t>(l)] > c[static_cast<std::size_t>(best)]) best = l;
    return best;
  }

  static double impurity_term(int count, SplitMeasure measure) {
    if (count <= 0) return 0.0;
    const double c = static_cast<double>(count);
    return measure == SplitMeasure::Gini ? c * c : c * std::log(c);
  }

  // Weighted impurity n*I(node) expressed so that only the per-class term
  // sums matter: gini -> n - S2/n with S2 = sum c_k^2; entropy ->
  // n*log(n) - sum c_k log c_k.
  static double weighted_impurity(double n, double term_sum, SplitMeasure measure) {
    if (n <= 0.0) return 0.0;
    return measure == SplitMeasure::Gini ? n - term_sum / n
                                         : n * std::log(n) - term_sum;
  }

  int build_node(ClassificationTree& tree, std::size_t start, std::size_t end, int depth) {
    const std::size_t m = end - start;
    std::fill(counts_.begin(), counts_.end(), 0);
    for (std::size_t i = start; i < end; ++i)
      ++counts_[static_cast<std::size_t>(lb_[slots_[i]])];
    int distinct = 0;
    for (int c : counts_) distinct += c > 0;

    Split best;
    const bool depth_ok = opt_.max_depth < 0 || depth < opt_.max_depth;
    if (distinct > 1 && depth_ok && m >= static_cast<std::size_t>(opt_.minsplit))
      best = find_best_split(start, end);

    if (!best.found) {
      const int idx = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({-1, 0.0, -1, -1, majority_label(start, end)});
      return idx;
    }

    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({static_cast<int>(best.feature), best.threshold, -1, -1, 0});

    const double* split_col = column(best.feature);
    // Stable partition of the slot range.
    std::vector<std::uint32_t> left, right;
    left.reserve(m);
    right.reserve(m);
    for (std::size_t i = start; i < end; ++i) {
      const std::uint32_t s = slots_[i];
      if (split_col[s] <= best.threshold) left.push_back(s);
      else right.push_back(s);
    }
    std::copy(left.begin(), left.end(), slots_.begin() + static_cast<std::ptrdiff_t>(start));
    std::copy(right.begin(), right.end(),
              slots_.begin() + static_cast<std::ptrdiff_t>(start + left.size()));

    const int l = build_node(tree, start, start + left.size(), depth + 1);
    const int r = build_node(tree, start + left.size(), end, depth + 1);
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

    const std::size_t m = end - start;
    sorted_.assign(slots_.begin() + static_cast<std::ptrdiff_t>(start),
                   slots_.begin() + static_cast<std::ptrdiff_t>(end));

    Split best;
    for (std::size_t f : features) {
      const double* col = column(f);
      std::sort(sorted_.begin(), sorted_.end(), [col](std::uint32_t a, std::uint32_t b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
      std::fill(left_counts_.begin(), left_counts_.end(), 0);
      double lterm = 0.0;
      double total_term = 0.0;
      for (int l = 0; l < k_; ++l)
        total_term += impurity_term(counts_[static_cast<std::size_t>(l)], opt_.measure);
      std::vector<int> right_counts = counts_;
      double rterm = total_term;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const std::uint32_t s = sorted_[i];
        const int lab = lb_[s];
        // Move s from right to left, updating the term sums incrementally.
        lterm -= impurity_term(left_counts_[static_cast<std::size_t>(lab)], opt_.measure);
        rterm -= impurity_term(right_counts[static_cast<std::size_t>(lab)], opt_.measure);
        ++left_counts_[static_cast<std::size_t>(lab)];
        --right_counts[static_cast<std::size_t>(lab)];
        lterm += impurity_term(left_counts_[static_cast<std::size_t>(lab)], opt_.measure);
        rterm += impurity_term(right_counts[static_cast<std::size_t>(lab)], opt_.measure);
        const double a = col[s];
        const double b = col[sorted_[i + 1]];
        if (a == b) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(m - i - 1);
        const double score = weighted_impurity(nl, lterm, opt_.measure) +
                             weighted_impurity(nr, rterm, opt_.measure);
        if (!best.found || detail::improves_score(score, best.score)) {
          best.found = true;
          best.score = score;
          best.feature = f;
          best.threshold = detail::split_threshold(a, b);
        }
      }
    }
    return best;
  }

  ClassTreeFitOptions opt_;
  Rng rng_;
  std::size_t m_ = 0;
  std::size_t p_ = 0;
  int k_ = 0;
  std::vector<double> colbuf_;
  std::vector<int> lb_;
  std::vector<std::uint32_t> slots_;
  std::vector<std::uint32_t> sorted_;
  std::vector<int> counts_;
  std::vector<int> left_counts_;
};

}  // namespace detail

inline ClassificationTree fit_classification_tree_on(const RowMatrix& x,
                                                     std::span<const int> labels,
                                                     std::span<const std::size_t> rows,
                                                     int n_labels,
                                                     const ClassTreeFitOptions& opt) {
  if (x.rows == 0 || rows.empty())
    throw ContractError("fit_classification_tree: empty training data");
  detail::ClassificationTreeBuilder builder(x, labels, rows, n_labels, opt);
  return builder.build();
}

struct ClassifierMember {
  ClassifierConfig config;
  std::vector<ClassificationTree> trees;
};

// Majority vote over `votes`; ties resolve to the smallest label value.
inline int majority_vote(std::span<const int> votes) {
  if (votes.empty()) throw ContractError("majority_vote: no votes");
  std::map<int, int> tally;
  for (int v : votes) ++tally[v];
  int best_label = votes[0];
  int best_count = 0;
  for (const auto& [label, count] : tally) {
    if (count > best_count) {  // map order makes ties pick the smallest label
      best_count = count;
      best_label = label;
    }
  }
  return best_label;
}

// Majority-vote ensemble of three bagged/forest classifiers.
struct ClassifierEnsemble {
  std::vector<ClassifierMember> members;
  std::vector<int> labels;  // sorted distinct training labels
  std::size_t n_features = 0;

  int predict_member(const ClassifierMember& member, std::span<const double> x) const {
    std::vector<int> votes;
    votes.reserve(member.trees.size());
    for (const ClassificationTree& t : member.trees)
      votes.push_back(labels[static_cast<std::size_t>(t.predict(x))]);
    return majority_vote(votes);
  }

  int predict(std::span<const double> x) const {
    if (x.size() != n_features)
      throw ContractError("predict_class: feature count does not match training");
    std::vector<int> votes;
    votes.reserve(members.size());
    for (const ClassifierMember& m : members) votes.push_back(predict_member(m, x));
    return majority_vote(votes);
  }
};

inline ClassifierEnsemble fit_classifier_ensemble(
    const RowMatrix& x, std::span<const int> labels, std::uint64_t seed,
    const std::vector<ClassifierConfig>& configs = default_classifier_configs()) {
  if (x.rows == 0 || labels.size() != x.rows)
    throw ContractError("fit_classifier_ensemble: empty or mismatched data");

  ClassifierEnsemble ens;
  ens.n_features = x.cols;
  ens.labels.assign(labels.begin(), labels.end());
  std::sort(ens.labels.begin(), ens.labels.end());
  ens.labels.erase(std::unique(ens.labels.begin(), ens.labels.end()), ens.labels.end());
  if (ens.labels.size() < 2)
    throw ContractError("fit_classifier_ensemble: need at least two distinct labels");

  std::vector<int> ids(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(ens.labels.begin(), ens.labels.end(), labels[i]);
    ids[i] = static_cast<int>(it - ens.labels.begin());
  }

  const int k = static_cast<int>(ens.labels.size());
  std::vector<std::size_t> rows(x.rows);
  for (std::size_t mi = 0; mi < configs.size(); ++mi) {
    ClassifierMember member;
    member.config = configs[mi];
    const std::uint64_t member_seed = mix_seed(seed, mi);
    const std::size_t max_features = configs[mi].technique == Technique::RandomForest
                                         ? detail::sqrt_feature_count(x.cols)
                                         : 0;
    for (int t = 0; t < configs[mi].nest; ++t) {
      const std::uint64_t tree_seed = mix_seed(member_seed, static_cast<std::uint64_t>(t));
      Rng rng(tree_seed);
      for (std::size_t i = 0; i < x.rows; ++i) rows[i] = rng.index(x.rows);
      ClassTreeFitOptions opt;
      opt.measure = configs[mi].split_measure;
      opt.minsplit = configs[mi].minsplit;
      opt.max_features = max_features;
      opt.seed = mix_seed(tree_seed, 0x636cULL);
      member.trees.push_back(fit_classification_tree_on(x, ids, rows, k, opt));
    }
    ens.members.push_back(std::move(member));
  }
  return ens;
}

inline int predict_class(const ClassifierEnsemble& ens, std::span<const double> x) {
  return ens.predict(x);
}

}  // namespace perfreg

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/linalg.hpp"
#include "perfreg/models/classifier.hpp"
#include "perfreg/problems.hpp"
#include "perfreg/rng.hpp"
#include "perfreg/stats.hpp"

namespace perfreg {

namespace detail {

// Two-class Gaussian discriminants on small dense data. Covariances get a
// scale-aware diagonal jitter so tiny training splits stay solvable.
struct GaussianClassStats {
  std::vector<double> mean;
  RowMatrix cov;
  double prior = 0.0;
  std::size_t count = 0;
};

inline GaussianClassStats gaussian_stats(const RowMatrix& x,
                                         std::span<const std::size_t> rows) {
  const std::size_t d = x.cols;
  GaussianClassStats st;
  st.count = rows.size();
  st.mean.assign(d, 0.0);
  for (std::size_t r : rows)
    for (std::size_t c = 0; c < d; ++c) st.mean[c] += x.at(r, c);
  for (double& v : st.mean) v /= static_cast<double>(rows.size());
  st.cov = RowMatrix(d, d);
  for (std::size_t r : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        st.cov.at(i, j) += (x.at(r, i) - st.mean[i]) * (x.at(r, j) - st.mean[j]);
  return st;
}

inline void add_jitter(RowMatrix& cov) {
  double tr = 0.0;
  for (std::size_t i = 0; i < cov.rows; ++i) tr += cov.at(i, i);
  const double lam = std::max(tr / static_cast<double>(cov.rows), 1.0) * 1e-8;
  for (std::size_t i = 0; i < cov.rows; ++i) cov.at(i, i) += lam;
}

class LdaModel {
 public:
  void fit(const RowMatrix& x, std::span<const int> labels,
           std::span<const std::size_t> rows) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t r : rows) by_class[labels[r]].push_back(r);
    if (by_class[0].empty() || by_class[1].empty()) {
      constant_ = by_class[0].empty() ? 1 : 0;
      is_constant_ = true;
      return;
    }
    is_constant_ = false;
    GaussianClassStats s0 = gaussian_stats(x, by_class[0]);
    GaussianClassStats s1 = gaussian_stats(x, by_class[1]);
    RowMatrix pooled(x.cols, x.cols);
    for (std::size_t i = 0; i < pooled.data.size(); ++i)
      pooled.data[i] = (s0.cov.data[i] + s1.cov.data[i]) /
                       std::max<double>(static_cast<double>(rows.size()) - 2.0, 1.0);
    add_jitter(pooled);
    const LuDecomposition lu = lu_decompose(pooled);
    w0_ = lu_solve(lu, s0.mean);
    w1_ = lu_solve(lu, s1.mean);
    const auto dot = [](std::span<const double> a, std::span<const double> b) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    const double n = static_cast<double>(rows.size());
    b0_ = -0.5 * dot(w0_, s0.mean) + std::log(static_cast<double>(s0.count) / n);
    b1_ = -0.5 * dot(w1_, s1.mean) + std::log(static_cast<double>(s1.count) / n);
  }

  int predict(std::span<const double> p) const {
    if (is_constant_) return constant_;
    double d0 = b0_, d1 = b1_;
    for (std::size_t i = 0; i < p.size(); ++i) {
      d0 += w0_[i] * p[i];
      d1 += w1_[i] * p[i];
    }
    return d1 > d0 ? 1 : 0;
  }

 private:
  bool is_constant_ = false;
  int constant_ = 0;
  std::vector<double> w0_, w1_;
  double b0_ = 0.0, b1_ = 0.0;
};

class QdaModel {
 public:
  void fit(const RowMatrix& x, std::span<const int> labels,
           std::span<const std::size_t> rows) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t r : rows) by_class[labels[r]].push_back(r);
    if (by_class[0].empty() || by_class[1].empty()) {
      constant_ = by_class[0].empty() ? 1 : 0;
      is_constant_ = true;
      return;
    }
    is_constant_ = false;
    const double n = static_cast<double>(rows.size());
    for (int k = 0; k < 2; ++k) {
      GaussianClassStats st = gaussian_stats(x, by_class[k]);
      for (double& v : st.cov.data)
        v /= std::max<double>(static_cast<double>(st.count) - 1.0, 1.0);
      add_jitter(st.cov);
      lu_[k] = lu_decompose(st.cov);
      mean_[k] = st.mean;
      log_prior_[k] = std::log(static_cast<double>(st.count) / n);
    }
  }

  int predict(std::span<const double> p) const {
    if (is_constant_) return constant_;
    double score[2];
    for (int k = 0; k < 2; ++k) {
      std::vector<double> diff(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) diff[i] = p[i] - mean_[k][i];
      const std::vector<double> solved = lu_solve(lu_[k], diff);
      double maha = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) maha += diff[i] * solved[i];
      score[k] = -0.5 * lu_[k].log_abs_det - 0.5 * maha + log_prior_[k];
    }
    return score[1] > score[0] ? 1 : 0;
  }

 private:
  bool is_constant_ = false;
  int constant_ = 0;
  LuDecomposition lu_[2];
  std::vector<double> mean_[2];
  double log_prior_[2] = {0.0, 0.0};
};

// Ratio of misclassification rates, mapped to stay finite: equal rates
// give 1, and a zero denominator is floored at half the smallest
// resolvable rate (1/(2n)).
inline double mmce_ratio(double a, double b, std::size_t n) {
  if (a == b) return 1.0;
  const double floor_rate = 0.5 / static_cast<double>(n);
  return a / std::max(b, floor_rate);
}

// Stratified fold ids: per label, seeded shuffle then round-robin deal.
inline std::vector<int> stratified_fold_assignment(std::span<const int> labels,
                                                   std::size_t n_folds,
                                                   std::uint64_t seed) {
  std::vector<int> fold_of(labels.size(), 0);
  Rng rng(seed);
  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (int lab : distinct) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == lab) idx.push_back(i);
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      fold_of[idx[i]] = static_cast<int>(i % n_folds);
  }
  return fold_of;
}

}  // namespace detail

// Level-set features. Per quantile q: points are labeled by "fitness at
// or below the q-quantile" and three classifiers (LDA, QDA, depth-2 CART)
// are scored by stratified 5-fold cross-validated misclassification rate.
// Emits, per quantile: the three mmce values, their three pairwise
// ratios, and the mean mmce. 7 x 3 quantiles = 21 values.
inline std::vector<double> ela_level_group(const DesignSet& ds,
                                           std::span<const double> quantiles,
                                           std::uint64_t seed) {
  const std::size_t n = ds.fitness.size();
  if (n < 10) throw DegenerateInputError("ela_level: need at least ten points");

  std::vector<double> out;
  out.reserve(7 * quantiles.size());
  for (std::size_t qi = 0; qi < quantiles.size(); ++qi) {
    const double threshold = quantile_type7(ds.fitness, quantiles[qi]);
    std::vector<int> labels(n);
    std::size_t below = 0;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = ds.fitness[i] <= threshold ? 1 : 0;
      below += static_cast<std::size_t>(labels[i]);
    }
    if (below == 0 || below == n)
      throw DegenerateInputError("ela_level: single-label split at quantile " +
                                 std::to_string(quantiles[qi]));

    constexpr std::size_t kFolds = 5;
    const std::vector<int> fold_of =
        detail::stratified_fold_assignment(labels, kFolds, mix_seed(seed, 0x6c766cULL, qi));

    std::size_t errors[3] = {0, 0, 0};
    for (std::size_t fold = 0; fold < kFolds; ++fold) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < n; ++i)
        (fold_of[i] == static_cast<int>(fold) ? test : train).push_back(i);
      if (test.empty() || train.empty()) continue;

      detail::LdaModel lda;
      lda.fit(ds.points, labels, train);
      detail::QdaModel qda;
      qda.fit(ds.points, labels, train);

      ClassTreeFitOptions topt;
      topt.measure = SplitMeasure::Gini;
      topt.minsplit = 2;
      topt.max_depth = 2;
      topt.seed = mix_seed(seed, qi, fold);
      const ClassificationTree tree =
          fit_classification_tree_on(ds.points, labels, train, 2, topt);

      for (std::size_t i : test) {
        const auto p = ds.points.row(i);
        errors[0] += lda.predict(p) != labels[i];
        errors[1] += qda.predict(p) != labels[i];
        errors[2] += tree.predict(p) != labels[i];
      }
    }
    const double mmce_lda = static_cast<double>(errors[0]) / static_cast<double>(n);
    const double mmce_qda = static_cast<double>(errors[1]) / static_cast<double>(n);
    const double mmce_tree = static_cast<double>(errors[2]) / static_cast<double>(n);
    out.push_back(mmce_lda);
    out.push_back(mmce_qda);
    out.push_back(mmce_tree);
    out.push_back(detail::mmce_ratio(mmce_lda, mmce_qda, n));
    out.push_back(detail::mmce_ratio(mmce_lda, mmce_tree, n));
    out.push_back(detail::mmce_ratio(mmce_qda, mmce_tree, n));
    out.push_back((mmce_lda + mmce_qda + mmce_tree) / 3.0);
  }
  return out;
}

}  // namespace perfreg

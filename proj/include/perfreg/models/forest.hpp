#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "perfreg/models/grid.hpp"
#include "perfreg/models/tree.hpp"

namespace perfreg {

namespace detail {

inline std::uint64_t hash_doubles(std::uint64_t h, std::span<const double> v) {
  for (double d : v) h = mix_seed(h, std::bit_cast<std::uint64_t>(d));
  return h;
}

inline std::size_t sqrt_feature_count(std::size_t p) {
  return static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(p)) - 1e-12));
}

}  // namespace detail

// A fitted regression model: one tree for DecisionTree, `nest` bootstrap
// trees for RandomForest/BaggingDT. Immutable after fit; prediction is the
// unweighted mean of the member trees.
struct TrainedRegressor {
  RMConfig config;
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;
  std::vector<std::uint64_t> bootstrap_seeds;
  std::uint64_t training_fingerprint = 0;

  double predict(std::span<const double> x) const {
    if (x.size() != n_features)
      throw ContractError("predict: feature count does not match training");
    double s = 0.0;
    for (const RegressionTree& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
};

struct ForestOptions {
  bool bootstrap = true;  // test hook; production fits always resample
};

inline std::uint64_t training_fingerprint_of(const RowMatrix& x,
                                             std::span<const double> y) {
  std::uint64_t h = mix_seed(0x66697467ULL, x.rows, x.cols);
  h = detail::hash_doubles(h, x.data);
  return detail::hash_doubles(h, y);
}

inline TrainedRegressor fit_tree_regressor(const RowMatrix& x, std::span<const double> y,
                                           SplitCriterion crit, int minsplit,
                                           std::uint64_t seed) {
  if (x.rows == 0 || x.cols == 0)
    throw ContractError("fit_tree_regressor: empty training data");
  TrainedRegressor model;
  model.config = {Technique::DecisionTree, crit, minsplit, 0};
  model.n_features = x.cols;
  model.training_fingerprint = training_fingerprint_of(x, y);
  TreeFitOptions opt;
  opt.crit = crit;
  opt.minsplit = minsplit;
  opt.seed = seed;
  model.trees.push_back(fit_regression_tree(x, y, opt));
  return model;
}

// `nest` trees, each on a seeded bootstrap resample. BaggingDT trees see
// every feature at every split; RandomForest trees draw ceil(sqrt(p)).
inline TrainedRegressor fit_forest(const RowMatrix& x, std::span<const double> y,
                                   const RMConfig& config, std::uint64_t seed,
                                   const ForestOptions& fo = {}) {
  validate_rm_config(config);
  if (config.technique == Technique::DecisionTree)
    throw ContractError("fit_forest: config is not an ensemble technique");
  if (x.rows == 0 || x.cols == 0)
    throw ContractError("fit_forest: empty training data");

  TrainedRegressor model;
  model.config = config;
  model.n_features = x.cols;
  model.training_fingerprint = training_fingerprint_of(x, y);
  model.trees.reserve(static_cast<std::size_t>(config.nest));

  const std::size_t max_features = config.technique == Technique::RandomForest
                                       ? detail::sqrt_feature_count(x.cols)
                                       : 0;
  std::vector<std::size_t> rows(x.rows);
  for (int t = 0; t < config.nest; ++t) {
    const std::uint64_t tree_seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    model.bootstrap_seeds.push_back(tree_seed);
    if (fo.bootstrap) {
      Rng rng(tree_seed);
      for (std::size_t i = 0; i < x.rows; ++i) rows[i] = rng.index(x.rows);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeFitOptions opt;
    opt.crit = config.crit;
    opt.minsplit = config.minsplit;
    opt.max_features = max_features;
    opt.seed = mix_seed(tree_seed, 0x7472ULL);
    model.trees.push_back(fit_regression_tree_on(x, y, rows, opt));
  }
  return model;
}

// Fit dispatch over the three techniques of the grid.
inline TrainedRegressor fit_regressor(const RowMatrix& x, std::span<const double> y,
                                      const RMConfig& config, std::uint64_t seed,
                                      const ForestOptions& fo = {}) {
  if (config.technique == Technique::DecisionTree)
    return fit_tree_regressor(x, y, config.crit, config.minsplit, seed);
  return fit_forest(x, y, config, seed, fo);
}

inline double predict_regressor(const TrainedRegressor& model, std::span<const double> x) {
  return model.predict(x);
}

}  // namespace perfreg

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <vector>

#include "perfreg/models/classifier.hpp"
#include "perfreg/models/forest.hpp"
#include "perfreg/models/grid.hpp"
#include "perfreg/models/tree.hpp"
#include "perfreg/rng.hpp"

using namespace perfreg;

#include "tree_oracle.hpp"

namespace {

RowMatrix random_matrix(std::size_t n, std::size_t p, Rng& rng) {
  RowMatrix x(n, p);
  for (double& v : x.data) v = rng.uniform(-2.0, 2.0);
  return x;
}

double training_error(const TrainedRegressor& model, const RowMatrix& x,
                      const std::vector<double>& y, bool squared) {
  double s = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double e = model.predict(x.row(r)) - y[r];
    s += squared ? e * e : std::abs(e);
  }
  return s / static_cast<double>(x.rows);
}

}  // namespace

TEST_CASE("grid enumerates exactly the 430 configurations") {
  const std::vector<RMConfig> grid = enumerate_grid();
  REQUIRE(grid.size() == 430);
  std::map<Technique, int> counts;
  for (const RMConfig& c : grid) ++counts[c.technique];
  REQUIRE(counts[Technique::DecisionTree] == 30);
  REQUIRE(counts[Technique::RandomForest] == 200);
  REQUIRE(counts[Technique::BaggingDT] == 200);
  REQUIRE(grid[0].canonical_name() == "DecisionTree_crit-mse_minsplit-2");
}

TEST_CASE("canonical names round-trip through parsing") {
  for (const RMConfig& c : enumerate_grid()) {
    const RMConfig parsed = parse_rm_config(c.canonical_name());
    REQUIRE(parsed == c);
  }
  REQUIRE(parse_rm_config("RandomForest_crit-mse_minsplit-6_nest-20") ==
          RMConfig{Technique::RandomForest, SplitCriterion::Mse, 6, 20});
  REQUIRE_THROWS_AS(parse_rm_config("GradientBoost_crit-mse_minsplit-2"), DataError);
  REQUIRE_THROWS_AS(parse_rm_config("DecisionTree_minsplit-2"), DataError);
  REQUIRE_THROWS_AS(parse_rm_config("DecisionTree_crit-mse_minsplit-2_nest-10"), DataError);
}

TEST_CASE("constant targets collapse to a single leaf") {
  RowMatrix x(5, 2);
  Rng rng(3);
  for (double& v : x.data) v = rng.uniform(0, 1);
  const std::vector<double> y(5, 7.0);
  const TrainedRegressor model = fit_tree_regressor(x, y, SplitCriterion::Mse, 2, 1);
  REQUIRE(model.trees.size() == 1);
  REQUIRE(model.trees[0].nodes.size() == 1);
  REQUIRE(model.trees[0].nodes[0].value == 7.0);
}

TEST_CASE("minsplit gates the root") {
  RowMatrix x(3, 1);
  x.at(0, 0) = 0.0;
  x.at(1, 0) = 1.0;
  x.at(2, 0) = 2.0;
  const std::vector<double> y = {1.0, 2.0, 6.0};
  const TrainedRegressor mean_model = fit_tree_regressor(x, y, SplitCriterion::Mse, 4, 1);
  REQUIRE(mean_model.trees[0].nodes.size() == 1);
  REQUIRE(mean_model.predict(x.row(0)) == 3.0);
  const TrainedRegressor median_model = fit_tree_regressor(x, y, SplitCriterion::Mae, 4, 1);
  REQUIRE(median_model.predict(x.row(0)) == 2.0);
}

TEST_CASE("two points split perfectly with minsplit 2") {
  RowMatrix x(2, 1);
  x.at(0, 0) = 0.0;
  x.at(1, 0) = 1.0;
  const std::vector<double> y = {0.0, 1.0};
  for (SplitCriterion crit :
       {SplitCriterion::Mse, SplitCriterion::Mae, SplitCriterion::FriedmanMse}) {
    const TrainedRegressor model = fit_tree_regressor(x, y, crit, 2, 1);
    REQUIRE(model.predict(x.row(0)) == 0.0);
    REQUIRE(model.predict(x.row(1)) == 1.0);
  }
}

TEST_CASE("empty training data is rejected") {
  RowMatrix x;
  REQUIRE_THROWS_AS(fit_tree_regressor(x, std::vector<double>{}, SplitCriterion::Mse, 2, 1),
                    ContractError);
}

TEST_CASE("tree fits match the exhaustive-split-search oracle") {
  Rng rng(20240);
  int checked_rows = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(11);  // 2..12
    const std::size_t p = 1 + rng.index(3);   // 1..3
    const RowMatrix x = random_matrix(n, p, rng);
    std::vector<double> y(n);
    for (double& v : y) v = rng.uniform(-5.0, 5.0);
    const int minsplit = 2 + static_cast<int>(rng.index(4));
    for (SplitCriterion crit :
         {SplitCriterion::Mse, SplitCriterion::Mae, SplitCriterion::FriedmanMse}) {
      const TrainedRegressor model = fit_tree_regressor(x, y, crit, minsplit, 1);
      std::vector<std::size_t> rows(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      const auto root = oracle::build(x, y, rows, crit, minsplit);
      for (std::size_t r = 0; r < n; ++r) {
        REQUIRE(model.predict(x.row(r)) == oracle::predict(*root, x.row(r)));
        ++checked_rows;
      }
    }
  }
  REQUIRE(checked_rows > 300);
}

TEST_CASE("training error is non-decreasing in minsplit") {
  Rng rng(7311);
  for (int trial = 0; trial < 5; ++trial) {
    const RowMatrix x = random_matrix(40, 3, rng);
    std::vector<double> y(40);
    for (std::size_t r = 0; r < 40; ++r)
      y[r] = x.at(r, 0) * 2.0 + std::sin(3.0 * x.at(r, 1)) + rng.uniform(-0.3, 0.3);
    for (SplitCriterion crit :
         {SplitCriterion::Mse, SplitCriterion::FriedmanMse, SplitCriterion::Mae}) {
      const bool squared = crit != SplitCriterion::Mae;
      double prev = -1.0;
      for (int minsplit = 2; minsplit <= 20; minsplit += 2) {
        const TrainedRegressor model = fit_tree_regressor(x, y, crit, minsplit, 1);
        const double err = training_error(model, x, y, squared);
        REQUIRE(err >= prev - 1e-12);
        prev = err;
      }
    }
  }
}

TEST_CASE("forests build nest trees and stay deterministic") {
  Rng rng(99);
  const RowMatrix x = random_matrix(30, 4, rng);
  std::vector<double> y(30);
  for (std::size_t r = 0; r < 30; ++r) y[r] = x.at(r, 0) - x.at(r, 2);

  const RMConfig config{Technique::RandomForest, SplitCriterion::Mse, 2, 10};
  const TrainedRegressor a = fit_forest(x, y, config, 5);
  REQUIRE(a.trees.size() == 10);
  REQUIRE(a.bootstrap_seeds.size() == 10);
  const TrainedRegressor b = fit_forest(x, y, config, 5);
  for (std::size_t r = 0; r < x.rows; ++r)
    REQUIRE(a.predict(x.row(r)) == b.predict(x.row(r)));
}

TEST_CASE("bagging with bootstrap disabled and one tree equals the single tree") {
  Rng rng(123);
  const RowMatrix x = random_matrix(25, 3, rng);
  std::vector<double> y(25);
  for (std::size_t r = 0; r < 25; ++r) y[r] = std::abs(x.at(r, 1)) + x.at(r, 0);

  for (SplitCriterion crit : {SplitCriterion::Mse, SplitCriterion::Mae}) {
    ForestOptions fo;
    fo.bootstrap = false;
    const RMConfig config{Technique::BaggingDT, crit, 4, 1};
    const TrainedRegressor bag = fit_forest(x, y, config, 17, fo);
    const TrainedRegressor single = fit_tree_regressor(x, y, crit, 4, 17);
    for (std::size_t r = 0; r < x.rows; ++r)
      REQUIRE(bag.predict(x.row(r)) == single.predict(x.row(r)));
  }
}

TEST_CASE("forest predictions lie inside the convex hull of tree predictions") {
  Rng rng(555);
  const RowMatrix x = random_matrix(40, 3, rng);
  std::vector<double> y(40);
  for (std::size_t r = 0; r < 40; ++r) y[r] = x.at(r, 0) * x.at(r, 1);
  const RMConfig config{Technique::BaggingDT, SplitCriterion::Mse, 2, 30};
  const TrainedRegressor forest = fit_forest(x, y, config, 9);
  for (int probe = 0; probe < 50; ++probe) {
    std::vector<double> point(3);
    for (double& v : point) v = rng.uniform(-2.0, 2.0);
    double lo = forest.trees[0].predict(point), hi = lo;
    for (const RegressionTree& t : forest.trees) {
      const double v = t.predict(point);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double pred = forest.predict(point);
    REQUIRE(pred >= lo - 1e-12);
    REQUIRE(pred <= hi + 1e-12);
  }
}

TEST_CASE("prediction mechanics") {
  TrainedRegressor model;
  model.config = {Technique::BaggingDT, SplitCriterion::Mse, 2, 3};
  model.n_features = 2;
  for (double v : {1.0, 2.0, 3.0}) {
    RegressionTree t;
    t.nodes.push_back({-1, 0.0, -1, -1, v});
    model.trees.push_back(t);
  }
  // Mean of single-leaf trees {1, 2, 3}.
  REQUIRE(model.predict(std::vector<double>{0.0, 0.0}) == 2.0);
  REQUIRE(predict_regressor(model, std::vector<double>{5.0, -1.0}) == 2.0);
  REQUIRE_THROWS_AS(model.predict(std::vector<double>{1.0}), ContractError);
}

TEST_CASE("tree traversal matches an independent recursive walker") {
  Rng rng(31);
  const RowMatrix x = random_matrix(60, 4, rng);
  std::vector<double> y(60);
  for (std::size_t r = 0; r < 60; ++r) y[r] = std::floor(x.at(r, 2) * 3.0);
  const TrainedRegressor model = fit_tree_regressor(x, y, SplitCriterion::Mse, 2, 1);
  const RegressionTree& tree = model.trees[0];

  // Walk the serialized node list without the member function.
  const auto walk = [&](std::span<const double> point) {
    std::size_t i = 0;
    while (tree.nodes[i].feature >= 0) {
      const auto& n = tree.nodes[i];
      i = static_cast<std::size_t>(
          point[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return tree.nodes[i].value;
  };
  for (int probe = 0; probe < 100; ++probe) {
    std::vector<double> point(4);
    for (double& v : point) v = rng.uniform(-3.0, 3.0);
    REQUIRE(tree.predict(point) == walk(point));
  }
}

TEST_CASE("majority vote follows the documented tie-break") {
  REQUIRE(majority_vote(std::vector<int>{3, 3, 7}) == 3);
  REQUIRE(majority_vote(std::vector<int>{1, 2, 3}) == 1);
  REQUIRE(majority_vote(std::vector<int>{5, 5, 5}) == 5);
  REQUIRE(majority_vote(std::vector<int>{9, 2, 9, 2}) == 2);
}

TEST_CASE("default classifier ensemble matches the published members") {
  const std::vector<ClassifierConfig> configs = default_classifier_configs();
  REQUIRE(configs.size() == 3);
  REQUIRE(configs[0].canonical_name() == "BaggingDT_crit-entropy_minsplit-2_nest-9");
  REQUIRE(configs[1].canonical_name() == "RandomForest_crit-entropy_minsplit-2_nest-9");
  REQUIRE(configs[2].canonical_name() == "RandomForest_crit-gini_minsplit-2_nest-9");
  for (const ClassifierConfig& c : configs) {
    REQUIRE(c.nest == 9);
    REQUIRE(c.minsplit == 2);
  }
}

TEST_CASE("classifier ensemble separates distinct clusters perfectly") {
  RowMatrix x(30, 3);
  std::vector<int> labels(30);
  Rng rng(4242);
  for (std::size_t r = 0; r < 30; ++r) {
    const int cls = static_cast<int>(r % 3);
    labels[r] = cls * 10 + 1;  // labels 1, 11, 21
    for (std::size_t c = 0; c < 3; ++c)
      x.at(r, c) = static_cast<double>(cls) * 10.0 + rng.uniform(-1.0, 1.0);
  }
  const ClassifierEnsemble ens = fit_classifier_ensemble(x, labels, 77);
  REQUIRE(ens.members.size() == 3);
  for (const ClassifierMember& m : ens.members) REQUIRE(m.trees.size() == 9);
  for (std::size_t r = 0; r < 30; ++r) REQUIRE(ens.predict(x.row(r)) == labels[r]);

  const ClassifierEnsemble again = fit_classifier_ensemble(x, labels, 77);
  for (std::size_t r = 0; r < 30; ++r)
    REQUIRE(again.predict(x.row(r)) == ens.predict(x.row(r)));
}

TEST_CASE("single-label classifier input is rejected") {
  RowMatrix x(4, 2);
  const std::vector<int> labels(4, 3);
  REQUIRE_THROWS_AS(fit_classifier_ensemble(x, labels, 1), ContractError);
}

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "perfreg/personalize.hpp"
#include "perfreg/rng.hpp"

using namespace perfreg;

namespace {

// Direct, inline evaluation of the min-max weighting formula.
std::vector<double> weights_oracle(const std::vector<double>& q) {
  const double hi = *std::max_element(q.begin(), q.end());
  const double lo = *std::min_element(q.begin(), q.end());
  std::vector<double> w(q.size());
  if (hi == lo) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(q.size()));
    return w;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    w[j] = (hi - q[j]) / (hi - lo);
    sum += w[j];
  }
  for (double& v : w) v /= sum;
  return w;
}

TrainedRegressor constant_model(double value) {
  TrainedRegressor model;
  model.config = {Technique::DecisionTree, SplitCriterion::Mse, 2, 0};
  model.n_features = kFeatureCount;
  RegressionTree t;
  t.nodes.push_back({-1, 0.0, -1, -1, value});
  model.trees.push_back(t);
  return model;
}

FeatureVector make_fv(int problem, int instance, double marker) {
  FeatureVector fv;
  fv.problem_id = problem;
  fv.instance_id = instance;
  fv.values.fill(0.25);
  fv.values[0] = marker;
  fv.values[1] = static_cast<double>(problem) * 10.0;
  return fv;
}

// A small two-class data set: class 1 responds to feature 0 in steps,
// class 2 linearly, and feature 1 separates the classes.
struct SyntheticTables {
  FeatureTable features;
  PerformanceTable performance;
};

SyntheticTables synthetic_tables(int instances_per_class) {
  SyntheticTables t;
  Rng rng(606);
  for (int cls : {1, 2}) {
    for (int inst = 1; inst <= instances_per_class; ++inst) {
      const double u = rng.next_unit();
      FeatureVector fv = make_fv(cls, inst, u);
      t.features.rows.push_back(fv);
      PerformanceRecord r;
      r.algorithm_id = "toy";
      r.problem_id = cls;
      r.instance_id = inst;
      r.budget = 100;
      r.target_precision = cls == 1 ? (u > 0.5 ? 10.0 : 1.0) : 2.0 + 6.0 * u;
      t.performance.records.push_back(r);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("weights follow the worked examples") {
  const std::vector<double> w1 = compute_weights(std::vector<double>{2.0, 4.0, 6.0});
  REQUIRE_THAT(w1[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
  REQUIRE_THAT(w1[1], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
  REQUIRE(w1[2] == 0.0);

  const std::vector<double> w2 = compute_weights(std::vector<double>{5.0, 5.0, 5.0});
  for (double v : w2) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));

  const std::vector<double> w3 = compute_weights(std::vector<double>{0.1, 0.3});
  REQUIRE(w3[0] == 1.0);
  REQUIRE(w3[1] == 0.0);
}

TEST_CASE("weights reject bad inputs") {
  REQUIRE_THROWS_AS(compute_weights(std::vector<double>{1.0}), ContractError);
  REQUIRE_THROWS_AS(compute_weights(std::vector<double>{1.0, -0.5}), ContractError);
  REQUIRE_THROWS_AS(compute_weights(std::vector<double>{1.0, std::nan("")}),
                    ContractError);
}

TEST_CASE("weights match a direct evaluation on random q vectors") {
  Rng rng(515151);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + rng.index(5);
    std::vector<double> q(m);
    for (double& v : q) v = rng.uniform(0.0, 10.0);
    const std::vector<double> w = compute_weights(q);
    const std::vector<double> expected = weights_oracle(q);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      REQUIRE_THAT(w[j], Catch::Matchers::WithinAbs(expected[j], 1e-12));
      REQUIRE(w[j] >= 0.0);
      sum += w[j];
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    const std::size_t argmin =
        static_cast<std::size_t>(std::min_element(q.begin(), q.end()) - q.begin());
    const std::size_t argmax =
        static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    REQUIRE(argmin == argmax);
  }
}

TEST_CASE("weights preserve order and are affine invariant") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.index(4);
    std::vector<double> q(m);
    for (double& v : q) v = rng.uniform(0.0, 5.0);
    const std::vector<double> w = compute_weights(q);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (q[a] <= q[b]) REQUIRE(w[a] >= w[b] - 1e-12);

    const double alpha = rng.uniform(0.1, 3.0);
    const double beta = rng.uniform(0.0, 2.0);
    std::vector<double> scaled(m);
    for (std::size_t j = 0; j < m; ++j) scaled[j] = alpha * q[j] + beta;
    const std::vector<double> ws = compute_weights(scaled);
    for (std::size_t j = 0; j < m; ++j)
      REQUIRE_THAT(ws[j], Catch::Matchers::WithinAbs(w[j], 1e-9));
  }
}

TEST_CASE("per-class scores follow the MAE definition") {
  const std::vector<RMConfig> configs = {
      {Technique::DecisionTree, SplitCriterion::Mse, 2, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
  };
  // Predictions: config 0 perfect, config 1 constant 3.
  RowMatrix preds(2, 4);
  const std::vector<double> y = {4.0, 2.0, 3.0, 3.0};
  const std::vector<int> labels = {1, 1, 2, 2};
  for (std::size_t r = 0; r < 4; ++r) preds.at(0, r) = y[r];
  for (std::size_t r = 0; r < 4; ++r) preds.at(1, r) = 3.0;

  const QTable table = score_configs_per_class(preds, y, labels, configs);
  REQUIRE(table.class_ids == std::vector<int>{1, 2});
  REQUIRE(table.q.at(0, 0) == 0.0);
  REQUIRE(table.q.at(0, 1) == 0.0);
  // Constant 3 vs class-1 targets {4, 2}: MAE 1.
  REQUIRE(table.q.at(1, 0) == 1.0);
  REQUIRE(table.q.at(1, 1) == 0.0);
}

TEST_CASE("per-class scores match a brute-force oracle on random tables") {
  Rng rng(2718);
  std::vector<RMConfig> configs;
  for (int i = 0; i < 5; ++i)
    configs.push_back({Technique::DecisionTree, SplitCriterion::Mse, 2 + 2 * i, 0});
  const std::size_t rows = 18;
  RowMatrix preds(configs.size(), rows);
  std::vector<double> y(rows);
  std::vector<int> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = rng.uniform(-3.0, 3.0);
    labels[r] = static_cast<int>(r % 3) + 7;
    for (std::size_t c = 0; c < configs.size(); ++c)
      preds.at(c, r) = rng.uniform(-3.0, 3.0);
  }
  const QTable table = score_configs_per_class(preds, y, labels, configs);
  for (std::size_t c = 0; c < configs.size(); ++c) {
    for (int cls : {7, 8, 9}) {
      double s = 0.0;
      int n = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        if (labels[r] != cls) continue;
        s += std::abs(preds.at(c, r) - y[r]);
        ++n;
      }
      REQUIRE_THAT(table.q.at(c, table.class_index(cls)),
                   Catch::Matchers::WithinAbs(s / n, 1e-12));
    }
  }
}

TEST_CASE("best-per-technique selection honors grid order on ties") {
  std::vector<RMConfig> configs = {
      {Technique::DecisionTree, SplitCriterion::Mse, 2, 0},
      {Technique::DecisionTree, SplitCriterion::Mse, 4, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
      {Technique::BaggingDT, SplitCriterion::Mse, 2, 10},
  };
  QTable table;
  table.configs = configs;
  table.class_ids = {1};
  table.class_sizes = {4};
  table.q = RowMatrix(4, 1);
  table.q.at(0, 0) = 0.5;  // tie between the two DecisionTree configs
  table.q.at(1, 0) = 0.5;
  table.q.at(2, 0) = 0.9;
  table.q.at(3, 0) = 0.1;
  const std::vector<std::size_t> best = select_best_per_technique(table, 1);
  REQUIRE(best == std::vector<std::size_t>{0, 2, 3});
}

TEST_CASE("best-per-technique matches an exhaustive scan on random tables") {
  Rng rng(31415);
  const std::vector<RMConfig> grid = enumerate_grid();
  QTable table;
  table.configs = grid;
  table.class_ids = {3, 5};
  table.class_sizes = {4, 4};
  table.q = RowMatrix(grid.size(), 2);
  for (double& v : table.q.data) v = rng.uniform(0.0, 2.0);

  for (int cls : {3, 5}) {
    const std::size_t ci = table.class_index(cls);
    const std::vector<std::size_t> got = select_best_per_technique(table, cls);
    REQUIRE(got.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
      const Technique t = table.configs[got[j]].technique;
      for (std::size_t c = 0; c < grid.size(); ++c)
        if (grid[c].technique == t)
          REQUIRE(table.q.at(got[j], ci) <= table.q.at(c, ci));
    }
  }
}

TEST_CASE("training builds one weighted ensemble per class") {
  const SyntheticTables tables = synthetic_tables(6);
  std::vector<RMConfig> grid;
  for (int minsplit : {2, 4, 6})
    grid.push_back({Technique::DecisionTree, SplitCriterion::Mse, minsplit, 0});
  for (int minsplit : {2, 4, 6})
    grid.push_back({Technique::RandomForest, SplitCriterion::Mse, minsplit, 10});
  for (int minsplit : {2, 4, 6})
    grid.push_back({Technique::BaggingDT, SplitCriterion::Mae, minsplit, 10});

  TrainOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 100;
  opts.transform = TargetTransform::Raw;
  opts.seed = 12;
  const PersonalizedModel model =
      train_personalized(tables.features, tables.performance, grid, opts);

  REQUIRE(model.ensembles.size() == 2);
  for (const auto& [cls, ens] : model.ensembles) {
    REQUIRE(ens.members.size() == 3);
    double sum = 0.0;
    double best_q = ens.members[0].q, best_w = ens.members[0].weight;
    for (const ClassEnsembleMember& m : ens.members) {
      REQUIRE(m.weight >= 0.0);
      sum += m.weight;
      if (m.q < best_q) {
        best_q = m.q;
        best_w = m.weight;
      }
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    for (const ClassEnsembleMember& m : ens.members) REQUIRE(best_w >= m.weight - 1e-12);
    // Each technique appears exactly once.
    std::set<Technique> techs;
    for (const ClassEnsembleMember& m : ens.members) techs.insert(m.config.technique);
    REQUIRE(techs.size() == 3);
  }

  // Member q values equal the direct per-class training MAE of the
  // member's own model.
  const JoinedData joined = join_tables(tables.features, tables.performance, "toy", 100,
                                        TargetTransform::Raw);
  for (const auto& [cls, ens] : model.ensembles) {
    for (const ClassEnsembleMember& m : ens.members) {
      double s = 0.0;
      int n = 0;
      for (std::size_t r = 0; r < joined.size(); ++r) {
        if (joined.problem_ids[r] != cls) continue;
        s += std::abs(m.model.predict(joined.x.row(r)) - joined.y[r]);
        ++n;
      }
      REQUIRE_THAT(m.q, Catch::Matchers::WithinAbs(s / n, 1e-12));
    }
  }
}

TEST_CASE("training rejects join mismatches, listing orphans") {
  SyntheticTables tables = synthetic_tables(5);
  tables.performance.records.pop_back();  // drop (2, 5)
  TrainOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 100;
  try {
    train_personalized(tables.features, tables.performance, enumerate_grid(), opts);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    REQUIRE(std::string(e.what()).find("features(2,5)") != std::string::npos);
  }
}

TEST_CASE("validation-fraction weighting still yields simplex weights") {
  const SyntheticTables tables = synthetic_tables(8);
  std::vector<RMConfig> grid = {
      {Technique::DecisionTree, SplitCriterion::Mse, 2, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
      {Technique::BaggingDT, SplitCriterion::Mse, 2, 10},
  };
  TrainOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 100;
  opts.seed = 5;
  opts.validation_fraction = 0.25;
  const PersonalizedModel model =
      train_personalized(tables.features, tables.performance, grid, opts);
  for (const auto& [cls, ens] : model.ensembles) {
    double sum = 0.0;
    for (const ClassEnsembleMember& m : ens.members) sum += m.weight;
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("prediction combines members by weight") {
  PersonalizedModel model;
  model.target_transform = TargetTransform::Raw;

  ClassEnsemble ens;
  ens.class_id = 4;
  const std::vector<double> values = {2.0, 4.0, 6.0};
  const std::vector<double> weights = {2.0 / 3.0, 1.0 / 3.0, 0.0};
  for (std::size_t j = 0; j < 3; ++j) {
    ClassEnsembleMember m;
    m.model = constant_model(values[j]);
    m.config = m.model.config;
    m.q = static_cast<double>(j);
    m.weight = weights[j];
    ens.members.push_back(std::move(m));
  }
  model.ensembles[4] = ens;

  ClassEnsemble degenerate;
  degenerate.class_id = 9;
  for (std::size_t j = 0; j < 3; ++j) {
    ClassEnsembleMember m;
    m.model = constant_model(100.0 + static_cast<double>(j));
    m.config = m.model.config;
    m.weight = j == 0 ? 1.0 : 0.0;
    degenerate.members.push_back(std::move(m));
  }
  model.ensembles[9] = degenerate;

  const FeatureVector fv = make_fv(4, 1, 0.3);
  REQUIRE_THAT(predict_with_known_class(model, fv, 4),
               Catch::Matchers::WithinAbs(8.0 / 3.0, 1e-12));
  // Weight vector (1, 0, 0) passes member 1 through exactly.
  REQUIRE(predict_with_known_class(model, fv, 9) == 100.0);
  REQUIRE_THROWS_AS(predict_with_known_class(model, fv, 123), DataError);
}

TEST_CASE("classified and known-class paths agree when the classifier is right") {
  const SyntheticTables tables = synthetic_tables(6);
  std::vector<RMConfig> grid = {
      {Technique::DecisionTree, SplitCriterion::Mse, 2, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
      {Technique::BaggingDT, SplitCriterion::Mse, 2, 10},
  };
  TrainOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 100;
  opts.seed = 3;
  const PersonalizedModel model =
      train_personalized(tables.features, tables.performance, grid, opts);

  int agreed = 0;
  for (const FeatureVector& fv : tables.features.rows) {
    const Prediction p = predict(model, fv);
    // Convexity: the final prediction sits inside the member hull.
    const ClassEnsemble& ens = model.ensemble_of(p.predicted_class);
    double lo = 1e300, hi = -1e300;
    for (const ClassEnsembleMember& m : ens.members) {
      const double v = m.model.predict(fv.values);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    REQUIRE(p.y >= lo - 1e-10);
    REQUIRE(p.y <= hi + 1e-10);
    if (p.predicted_class == fv.problem_id) {
      REQUIRE(p.y == predict_with_known_class(model, fv, fv.problem_id));
      ++agreed;
    }
  }
  // Feature 1 separates the two classes cleanly, so the classifier
  // should be right on the training rows.
  REQUIRE(agreed == static_cast<int>(tables.features.rows.size()));
}

TEST_CASE("paths diverge only under misclassification") {
  const SyntheticTables tables = synthetic_tables(6);
  std::vector<RMConfig> grid = {
      {Technique::DecisionTree, SplitCriterion::Mse, 2, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
      {Technique::BaggingDT, SplitCriterion::Mse, 2, 10},
  };
  TrainOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 100;
  opts.seed = 3;
  const PersonalizedModel model =
      train_personalized(tables.features, tables.performance, grid, opts);

  // A class-1 instance dressed in class-2's separating feature: the
  // classifier mislabels it, and the classified path then answers with
  // the other class's ensemble.
  FeatureVector fv = make_fv(1, 99, 0.642);
  fv.values[1] = 20.0;  // class-2 territory
  const Prediction p = predict(model, fv);
  REQUIRE(p.predicted_class == 2);
  const double known = predict_with_known_class(model, fv, 1);
  const double other = predict_with_known_class(model, fv, 2);
  REQUIRE(p.y == other);
  REQUIRE(p.y != known);
}

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "perfreg/data.hpp"
#include "perfreg/errors.hpp"
#include "perfreg/personalize.hpp"
#include "perfreg/stats.hpp"

namespace perfreg {

inline double mae(std::span<const double> preds, std::span<const double> truths) {
  if (preds.size() != truths.size() || preds.empty())
    throw ContractError("mae: empty or mismatched inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - truths[i]);
  return s / static_cast<double>(preds.size());
}

inline double median_ae(std::span<const double> preds, std::span<const double> truths) {
  if (preds.size() != truths.size() || preds.empty())
    throw ContractError("median_ae: empty or mismatched inputs");
  std::vector<double> abs_err(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) abs_err[i] = std::abs(preds[i] - truths[i]);
  return median(abs_err);
}

// The five comparison scenarios.
enum class Scenario { BestTest, BestTrain, BestTrainInstance, EnsembleGround, EnsembleClass };
inline constexpr std::array<Scenario, 5> kAllScenarios = {
    Scenario::BestTest, Scenario::BestTrain, Scenario::BestTrainInstance,
    Scenario::EnsembleGround, Scenario::EnsembleClass};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::BestTest: return "best-test";
    case Scenario::BestTrain: return "best-train";
    case Scenario::BestTrainInstance: return "best-train-instance";
    case Scenario::EnsembleGround: return "ensemble-ground";
    case Scenario::EnsembleClass: return "ensemble-class";
  }
  throw InternalError("scenario_name: bad enum");
}

inline Scenario parse_scenario(const std::string& s) {
  for (Scenario sc : kAllScenarios)
    if (s == scenario_name(sc)) return sc;
  throw DataError("unknown scenario: " + s);
}

// Argmin of class-size-weighted (i.e. pooled-row) MAE over all configs.
inline std::size_t select_best_train(const QTable& table) {
  std::size_t best = 0;
  double best_mae = 0.0;
  for (std::size_t c = 0; c < table.configs.size(); ++c) {
    double pooled = 0.0;
    std::size_t total = 0;
    for (std::size_t ci = 0; ci < table.class_ids.size(); ++ci) {
      pooled += table.q.at(c, ci) * static_cast<double>(table.class_sizes[ci]);
      total += table.class_sizes[ci];
    }
    pooled /= static_cast<double>(total);
    if (c == 0 || pooled < best_mae) {
      best = c;
      best_mae = pooled;
    }
  }
  return best;
}

// Argmin of one class's MAE over all configs.
inline std::size_t select_best_train_instance(const QTable& table, int class_id) {
  const std::size_t ci = table.class_index(class_id);
  std::size_t best = 0;
  for (std::size_t c = 1; c < table.configs.size(); ++c)
    if (table.q.at(c, ci) < table.q.at(best, ci)) best = c;
  return best;
}

// Argmin of pooled test MAE; `abs_errors` is configs x test rows.
inline std::size_t select_best_test(const RowMatrix& abs_errors) {
  if (abs_errors.rows == 0 || abs_errors.cols == 0)
    throw ContractError("select_best_test: empty error table");
  std::size_t best = 0;
  double best_mean = 0.0;
  for (std::size_t c = 0; c < abs_errors.rows; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < abs_errors.cols; ++r) s += abs_errors.at(c, r);
    s /= static_cast<double>(abs_errors.cols);
    if (c == 0 || s < best_mean) {
      best = c;
      best_mean = s;
    }
  }
  return best;
}

struct ConfusionMatrix {
  std::vector<int> labels;  // sorted
  std::vector<std::vector<long>> counts;  // rows = true, cols = predicted

  void init(const std::set<int>& label_set) {
    labels.assign(label_set.begin(), label_set.end());
    counts.assign(labels.size(), std::vector<long>(labels.size(), 0));
  }

  std::size_t index_of(int label) const {
    const auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label)
      throw ContractError("ConfusionMatrix: unknown label " + std::to_string(label));
    return static_cast<std::size_t>(it - labels.begin());
  }

  void add(int true_label, int predicted_label) {
    ++counts[index_of(true_label)][index_of(predicted_label)];
  }

  long trace() const {
    long t = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) t += counts[i][i];
    return t;
  }

  long total() const {
    long t = 0;
    for (const auto& row : counts)
      for (long c : row) t += c;
    return t;
  }

  double accuracy() const {
    const long n = total();
    return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
  }
};

// Per-class members selected in one fold, for the report.
struct FoldClassSelection {
  int class_id = 0;
  std::vector<std::string> member_names;
  std::vector<double> q;
  std::vector<double> weights;
};

struct FoldSelection {
  std::string best_train;
  std::vector<FoldClassSelection> classes;
};

struct ScenarioReport {
  std::vector<int> problem_ids;       // sorted
  std::vector<int> fold_instance_ids; // fold t <-> instance id
  // errors[scenario][problem][fold] -> absolute errors of that fold's
  // test rows. Empty for best-test when its selection is disabled.
  std::array<std::vector<std::vector<std::vector<double>>>, 5> errors;

  std::string algorithm_id;
  long budget = 0;
  TargetTransform target_transform = TargetTransform::Raw;
  int sample_multiplier = 0;
  std::uint64_t seed = 0;
  bool best_test_enabled = true;
  std::string best_test_name;
  std::vector<FoldSelection> fold_selections;
  // Best-test pools residuals across all test folds before the argmin.
  std::string best_test_pooling = "pooled-test-rows";

  std::size_t problem_index(int problem_id) const {
    const auto it = std::lower_bound(problem_ids.begin(), problem_ids.end(), problem_id);
    if (it == problem_ids.end() || *it != problem_id)
      throw ContractError("ScenarioReport: unknown problem " + std::to_string(problem_id));
    return static_cast<std::size_t>(it - problem_ids.begin());
  }

  std::vector<double> pooled_errors(Scenario s, int problem_id) const {
    const auto& per_fold = errors[static_cast<std::size_t>(s)][problem_index(problem_id)];
    std::vector<double> out;
    for (const auto& fold_errors : per_fold)
      out.insert(out.end(), fold_errors.begin(), fold_errors.end());
    return out;
  }

  double median_ae_of(Scenario s, int problem_id) const {
    return median(pooled_errors(s, problem_id));
  }

  double mean_ae_of(Scenario s, int problem_id) const {
    return mean(pooled_errors(s, problem_id));
  }

  std::map<int, double> median_cells(Scenario s) const {
    std::map<int, double> out;
    for (int p : problem_ids) out[p] = median_ae_of(s, p);
    return out;
  }
};

// Per-problem difference of median absolute errors; positive values mean
// model a is better (its median error is smaller).
inline std::map<int, double> relative_advantage(const std::map<int, double>& cells_a,
                                                const std::map<int, double>& cells_b) {
  if (cells_a.size() != cells_b.size())
    throw ContractError("relative_advantage: mismatched problem sets");
  std::map<int, double> out;
  for (const auto& [problem, median_a] : cells_a) {
    const auto it = cells_b.find(problem);
    if (it == cells_b.end())
      throw ContractError("relative_advantage: problem " + std::to_string(problem) +
                          " missing from second report");
    out[problem] = it->second - median_a;
  }
  return out;
}

// Access-tracking hooks; installed by tests that audit the evaluation's
// target reads against the fold boundaries.
enum class TargetReadPurpose { TrainFit, TestEval, BestTestSelect };

struct TargetReadEvent {
  int problem_id = 0;
  int instance_id = 0;
  int active_fold = -1;  // -1 for cross-fold phases
  TargetReadPurpose purpose = TargetReadPurpose::TrainFit;
};

struct EvalHooks {
  std::function<void(const TargetReadEvent&)> on_target_read;
  std::function<void(int fold)> on_predictions_complete;
};

struct EvalOptions {
  std::string algorithm_id;
  long budget = 0;
  TargetTransform transform = TargetTransform::Raw;
  std::uint64_t seed = 1;
  unsigned n_threads = 1;
  bool include_best_test = true;
  // Diagnostics hook: replaces the fitted classifier by the true labels,
  // making ensemble-class coincide with ensemble-ground.
  bool oracle_classifier = false;
  int sample_multiplier = 0;  // metadata only
  EvalHooks hooks;
};

struct EvalResult {
  ScenarioReport report;
  ConfusionMatrix confusion;
};

// The full protocol: stratified folds over instances; per fold, fit the
// whole grid and the classifier on the other folds, evaluate all five
// scenarios on the held-out fold. Best-test alone consults test errors,
// pooled across folds, for its selection.
inline EvalResult run_evaluation(const FeatureTable& features,
                                 const PerformanceTable& performance,
                                 const std::vector<RMConfig>& grid,
                                 const EvalOptions& opts) {
  if (grid.empty()) throw ContractError("run_evaluation: empty grid");
  const JoinedData data =
      join_tables(features, performance, opts.algorithm_id, opts.budget, opts.transform);
  const FoldSpec folds = make_stratified_folds(data.problem_ids, data.instance_ids);
  const std::size_t n_folds = folds.n_folds();
  if (n_folds < 2) throw DataError("run_evaluation: need at least two instance folds");

  const auto target_of = [&](std::size_t row, TargetReadPurpose purpose, int active_fold) {
    if (opts.hooks.on_target_read)
      opts.hooks.on_target_read({data.problem_ids[row], data.instance_ids[row],
                                 active_fold, purpose});
    return data.y[row];
  };

  std::set<int> problem_set(data.problem_ids.begin(), data.problem_ids.end());
  if (problem_set.size() < 2)
    throw DataError("run_evaluation: need at least two problem classes");

  EvalResult result;
  result.confusion.init(problem_set);
  ScenarioReport& report = result.report;
  report.problem_ids.assign(problem_set.begin(), problem_set.end());
  report.fold_instance_ids = folds.instance_ids;
  report.algorithm_id = opts.algorithm_id;
  report.budget = opts.budget;
  report.target_transform = opts.transform;
  report.sample_multiplier = opts.sample_multiplier;
  report.seed = opts.seed;
  report.best_test_enabled = opts.include_best_test;
  for (auto& per_scenario : report.errors)
    per_scenario.assign(report.problem_ids.size(),
                        std::vector<std::vector<double>>(n_folds));

  // Test-row bookkeeping for the cross-fold best-test selection.
  struct TestRow {
    std::size_t row = 0;
    std::size_t fold = 0;
  };
  std::vector<TestRow> all_test_rows;
  std::vector<std::vector<double>> grid_test_preds(grid.size());

  for (std::size_t fold = 0; fold < n_folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < data.size(); ++r) {
      (folds.fold_of_instance(data.instance_ids[r]) == fold ? test_rows : train_rows)
          .push_back(r);
    }

    RowMatrix train_x(train_rows.size(), data.x.cols);
    std::vector<double> train_y(train_rows.size());
    std::vector<int> train_labels(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      std::copy(data.x.row(train_rows[i]).begin(), data.x.row(train_rows[i]).end(),
                train_x.row(i).begin());
      train_y[i] = target_of(train_rows[i], TargetReadPurpose::TrainFit,
                             static_cast<int>(fold));
      train_labels[i] = data.problem_ids[train_rows[i]];
    }

    const std::uint64_t fold_seed = mix_seed(opts.seed, 0x666f6c64ULL, fold);
    const std::vector<TrainedRegressor> models =
        fit_grid(train_x, train_y, grid, fold_seed, opts.n_threads);
    const RowMatrix train_preds = predict_matrix(models, train_x, opts.n_threads);
    const QTable qtable = score_configs_per_class(train_preds, train_y, train_labels, grid);

    const std::size_t best_train_idx = select_best_train(qtable);
    std::map<int, std::size_t> best_instance_idx;
    std::map<int, detail::SelectedMembers> class_members;
    for (int cls : qtable.class_ids) {
      best_instance_idx[cls] = select_best_train_instance(qtable, cls);
      class_members[cls] = detail::select_and_weight(qtable, cls);
    }

    ClassifierEnsemble classifier;
    if (!opts.oracle_classifier)
      classifier = fit_classifier_ensemble(train_x, train_labels,
                                           mix_seed(fold_seed, 0x636c73ULL));

    FoldSelection selection;
    selection.best_train = grid[best_train_idx].canonical_name();
    for (int cls : qtable.class_ids) {
      FoldClassSelection fcs;
      fcs.class_id = cls;
      const detail::SelectedMembers& sel = class_members[cls];
      for (std::size_t j = 0; j < sel.config_indices.size(); ++j)
        fcs.member_names.push_back(grid[sel.config_indices[j]].canonical_name());
      fcs.q = sel.q;
      fcs.weights = sel.weights;
      selection.classes.push_back(std::move(fcs));
    }
    report.fold_selections.push_back(std::move(selection));

    const auto ensemble_predict = [&](int cls, std::span<const double> x) {
      const auto it = class_members.find(cls);
      if (it == class_members.end())
        throw InternalError("run_evaluation: no ensemble for class " + std::to_string(cls));
      const detail::SelectedMembers& sel = it->second;
      double y = 0.0;
      for (std::size_t j = 0; j < sel.config_indices.size(); ++j)
        y += sel.weights[j] * models[sel.config_indices[j]].predict(x);
      return y;
    };

    // Phase 1: every prediction for the held-out rows, no test targets.
    struct RowPredictions {
      double ground = 0.0, cls = 0.0, best_train = 0.0, best_instance = 0.0;
    };
    std::vector<RowPredictions> preds(test_rows.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      const std::size_t r = test_rows[i];
      const auto x = data.x.row(r);
      const int true_class = data.problem_ids[r];
      const int predicted_class =
          opts.oracle_classifier ? true_class : classifier.predict(x);
      result.confusion.add(true_class, predicted_class);
      RowPredictions& p = preds[i];
      p.ground = ensemble_predict(true_class, x);
      p.cls = ensemble_predict(predicted_class, x);
      p.best_train = models[best_train_idx].predict(x);
      p.best_instance = models[best_instance_idx.at(true_class)].predict(x);
      if (!std::isfinite(p.ground) || !std::isfinite(p.cls) ||
          !std::isfinite(p.best_train) || !std::isfinite(p.best_instance))
        throw InternalError("run_evaluation: non-finite prediction");
      if (opts.include_best_test) {
        for (std::size_t c = 0; c < grid.size(); ++c) {
          const double v = models[c].predict(x);
          if (!std::isfinite(v))
            throw InternalError("run_evaluation: non-finite prediction");
          grid_test_preds[c].push_back(v);
        }
        all_test_rows.push_back({r, fold});
      }
    }
    if (opts.hooks.on_predictions_complete)
      opts.hooks.on_predictions_complete(static_cast<int>(fold));

    // Phase 2: held-out targets enter only to score the predictions.
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      const std::size_t r = test_rows[i];
      const double truth =
          target_of(r, TargetReadPurpose::TestEval, static_cast<int>(fold));
      const std::size_t pi = report.problem_index(data.problem_ids[r]);
      const RowPredictions& p = preds[i];
      const auto push = [&](Scenario s, double pred) {
        report.errors[static_cast<std::size_t>(s)][pi][fold].push_back(
            std::abs(pred - truth));
      };
      push(Scenario::EnsembleGround, p.ground);
      push(Scenario::EnsembleClass, p.cls);
      push(Scenario::BestTrain, p.best_train);
      push(Scenario::BestTrainInstance, p.best_instance);
    }
  }

  if (opts.include_best_test) {
    RowMatrix abs_errors(grid.size(), all_test_rows.size());
    std::vector<double> truths(all_test_rows.size());
    for (std::size_t i = 0; i < all_test_rows.size(); ++i)
      truths[i] = target_of(all_test_rows[i].row, TargetReadPurpose::BestTestSelect, -1);
    for (std::size_t c = 0; c < grid.size(); ++c)
      for (std::size_t i = 0; i < all_test_rows.size(); ++i)
        abs_errors.at(c, i) = std::abs(grid_test_preds[c][i] - truths[i]);
    const std::size_t best_test_idx = select_best_test(abs_errors);
    report.best_test_name = grid[best_test_idx].canonical_name();
    for (std::size_t i = 0; i < all_test_rows.size(); ++i) {
      const std::size_t r = all_test_rows[i].row;
      const std::size_t pi = report.problem_index(data.problem_ids[r]);
      report.errors[static_cast<std::size_t>(Scenario::BestTest)][pi][all_test_rows[i].fold]
          .push_back(abs_errors.at(best_test_idx, i));
    }
  }

  return result;
}

}  // namespace perfreg

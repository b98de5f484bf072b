#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "perfreg/data.hpp"
#include "perfreg/errors.hpp"
#include "perfreg/models/classifier.hpp"
#include "perfreg/models/forest.hpp"
#include "perfreg/models/grid.hpp"
#include "perfreg/parallel.hpp"

namespace perfreg {

// Importance weights from per-member regression errors (lower is
// better): q_norm_j = (max q - q_j) / (max q - min q), w = q_norm
// normalized to sum 1. All-equal q degenerates to uniform weights.
inline std::vector<double> compute_weights(std::span<const double> q) {
  if (q.size() < 2) throw ContractError("compute_weights: need at least two members");
  double lo = q[0], hi = q[0];
  for (double v : q) {
    if (!std::isfinite(v) || v < 0.0)
      throw ContractError("compute_weights: q values must be finite and nonnegative");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
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

// Per-class MAE of every configuration, all fitted on the same training
// rows. q(config, class) indexes the selection and weighting steps.
struct QTable {
  std::vector<RMConfig> configs;         // grid order
  std::vector<int> class_ids;            // sorted
  std::vector<std::size_t> class_sizes;  // training rows per class
  RowMatrix q;                           // configs x classes

  std::size_t class_index(int class_id) const {
    const auto it = std::lower_bound(class_ids.begin(), class_ids.end(), class_id);
    if (it == class_ids.end() || *it != class_id)
      throw ContractError("QTable: unknown class " + std::to_string(class_id));
    return static_cast<std::size_t>(it - class_ids.begin());
  }
};

// Predictions of every model on every row; configs x rows.
inline RowMatrix predict_matrix(std::span<const TrainedRegressor> models,
                                const RowMatrix& x, unsigned n_threads = 1) {
  RowMatrix preds(models.size(), x.rows);
  parallel_for(
      models.size(),
      [&](std::size_t c) {
        for (std::size_t r = 0; r < x.rows; ++r)
          preds.at(c, r) = models[c].predict(x.row(r));
      },
      n_threads);
  return preds;
}

inline QTable score_configs_per_class(const RowMatrix& preds, std::span<const double> y,
                                      std::span<const int> class_labels,
                                      const std::vector<RMConfig>& configs) {
  if (preds.rows != configs.size() || preds.cols != y.size() ||
      class_labels.size() != y.size() || y.empty())
    throw ContractError("score_configs_per_class: mismatched inputs");

  QTable table;
  table.configs = configs;
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < class_labels.size(); ++r)
    by_class[class_labels[r]].push_back(r);
  for (const auto& [cls, rows] : by_class) {
    if (rows.empty()) throw ContractError("score_configs_per_class: empty class");
    table.class_ids.push_back(cls);
    table.class_sizes.push_back(rows.size());
  }
  table.q = RowMatrix(configs.size(), table.class_ids.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::size_t ci = 0;
    for (const auto& [cls, rows] : by_class) {
      double s = 0.0;
      for (std::size_t r : rows) s += std::abs(preds.at(c, r) - y[r]);
      table.q.at(c, ci++) = s / static_cast<double>(rows.size());
    }
  }
  return table;
}

// Distinct techniques in grid order of first appearance.
inline std::vector<Technique> techniques_of(const std::vector<RMConfig>& configs) {
  std::vector<Technique> out;
  for (const RMConfig& c : configs)
    if (std::find(out.begin(), out.end(), c.technique) == out.end())
      out.push_back(c.technique);
  return out;
}

// Per technique, the config index with minimal q for the class; ties go
// to grid order.
inline std::vector<std::size_t> select_best_per_technique(const QTable& table,
                                                          int class_id) {
  const std::size_t ci = table.class_index(class_id);
  const std::vector<Technique> techs = techniques_of(table.configs);
  std::vector<std::size_t> best;
  for (Technique t : techs) {
    std::size_t arg = table.configs.size();
    for (std::size_t c = 0; c < table.configs.size(); ++c) {
      if (table.configs[c].technique != t) continue;
      if (arg == table.configs.size() || table.q.at(c, ci) < table.q.at(arg, ci))
        arg = c;
    }
    if (arg == table.configs.size())
      throw ContractError("select_best_per_technique: technique missing from table");
    best.push_back(arg);
  }
  return best;
}

// One fitted member of a class ensemble.
struct ClassEnsembleMember {
  RMConfig config;
  TrainedRegressor model;
  double q = 0.0;       // train (or validation) MAE for this class
  double weight = 0.0;  // Eq-style min-max importance
};

struct ClassEnsemble {
  int class_id = 0;
  std::vector<ClassEnsembleMember> members;

  double predict(std::span<const double> x) const {
    double y = 0.0;
    for (const ClassEnsembleMember& m : members) y += m.weight * m.model.predict(x);
    return y;
  }
};

// Classifier plus one weighted ensemble per problem class.
struct PersonalizedModel {
  ClassifierEnsemble classifier;
  std::map<int, ClassEnsemble> ensembles;
  TargetTransform target_transform = TargetTransform::Raw;
  std::string algorithm_id;
  long budget = 0;
  std::uint64_t seed = 0;

  const ClassEnsemble& ensemble_of(int class_id) const {
    const auto it = ensembles.find(class_id);
    if (it == ensembles.end())
      throw DataError("no ensemble for class " + std::to_string(class_id));
    return it->second;
  }
};

struct TrainOptions {
  std::string algorithm_id;
  long budget = 0;
  TargetTransform transform = TargetTransform::Raw;
  std::uint64_t seed = 1;
  unsigned n_threads = 1;
  // Optional held-out weighting: fraction of each class's training rows
  // scored instead of the training fit itself. 0 keeps the training-MAE
  // weighting.
  double validation_fraction = 0.0;
  // Optional instance filter (e.g. to hold out one fold); empty = all.
  std::set<int> include_instances;
};

inline std::vector<TrainedRegressor> fit_grid(const RowMatrix& x, std::span<const double> y,
                                              const std::vector<RMConfig>& grid,
                                              std::uint64_t seed, unsigned n_threads = 1) {
  std::vector<TrainedRegressor> models(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t c) {
        models[c] = fit_regressor(x, y, grid[c], mix_seed(seed, 0x666974ULL, c));
      },
      n_threads);
  return models;
}

namespace detail {

struct SelectedMembers {
  std::vector<std::size_t> config_indices;
  std::vector<double> q;
  std::vector<double> weights;
};

inline SelectedMembers select_and_weight(const QTable& table, int class_id) {
  SelectedMembers sel;
  sel.config_indices = select_best_per_technique(table, class_id);
  const std::size_t ci = table.class_index(class_id);
  for (std::size_t idx : sel.config_indices) sel.q.push_back(table.q.at(idx, ci));
  sel.weights = compute_weights(sel.q);
  return sel;
}

}  // namespace detail

// Training phase: fit every grid config on the training rows, score per
// class, pick the best config per technique per class, weight then by
// min-max importance, and fit the problem classifier on the same rows.
inline PersonalizedModel train_personalized(const FeatureTable& features,
                                            const PerformanceTable& performance,
                                            const std::vector<RMConfig>& grid,
                                            const TrainOptions& opts) {
  if (grid.empty()) throw ContractError("train_personalized: empty grid");
  JoinedData data = join_tables(features, performance, opts.algorithm_id, opts.budget,
                                opts.transform);

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < data.size(); ++r)
    if (opts.include_instances.empty() || opts.include_instances.count(data.instance_ids[r]))
      rows.push_back(r);
  if (rows.empty()) throw ContractError("train_personalized: no training rows selected");

  RowMatrix x(rows.size(), data.x.cols);
  std::vector<double> y(rows.size());
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(data.x.row(rows[i]).begin(), data.x.row(rows[i]).end(), x.row(i).begin());
    y[i] = data.y[rows[i]];
    labels[i] = data.problem_ids[rows[i]];
  }

  // Scoring split: identical to the fitting rows unless a validation
  // fraction is requested.
  std::vector<std::size_t> fit_rows(rows.size()), score_rows;
  for (std::size_t i = 0; i < rows.size(); ++i) fit_rows[i] = i;
  if (opts.validation_fraction > 0.0) {
    if (opts.validation_fraction >= 1.0)
      throw ContractError("train_personalized: validation_fraction must be in [0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < rows.size(); ++i) by_class[labels[i]].push_back(i);
    Rng rng(mix_seed(opts.seed, 0x76616cULL));
    fit_rows.clear();
    for (auto& [cls, members] : by_class) {
      rng.shuffle(members);
      std::size_t n_val = static_cast<std::size_t>(
          std::ceil(opts.validation_fraction * static_cast<double>(members.size()) - 1e-9));
      if (n_val >= members.size()) n_val = members.size() - 1;
      for (std::size_t i = 0; i < members.size(); ++i)
        (i < n_val ? score_rows : fit_rows).push_back(members[i]);
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(score_rows.begin(), score_rows.end());
  } else {
    score_rows = fit_rows;
  }

  const auto gather = [&](const std::vector<std::size_t>& idx, RowMatrix& gx,
                          std::vector<double>& gy, std::vector<int>& gl) {
    gx = RowMatrix(idx.size(), x.cols);
    gy.resize(idx.size());
    gl.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy(x.row(idx[i]).begin(), x.row(idx[i]).end(), gx.row(i).begin());
      gy[i] = y[idx[i]];
      gl[i] = labels[idx[i]];
    }
  };

  RowMatrix fit_x;
  std::vector<double> fit_y;
  std::vector<int> fit_labels;
  gather(fit_rows, fit_x, fit_y, fit_labels);
  RowMatrix score_x;
  std::vector<double> score_y;
  std::vector<int> score_labels;
  gather(score_rows, score_x, score_y, score_labels);

  const std::vector<TrainedRegressor> models =
      fit_grid(fit_x, fit_y, grid, opts.seed, opts.n_threads);
  const RowMatrix preds = predict_matrix(models, score_x, opts.n_threads);
  const QTable table = score_configs_per_class(preds, score_y, score_labels, grid);

  PersonalizedModel model;
  model.target_transform = opts.transform;
  model.algorithm_id = opts.algorithm_id;
  model.budget = opts.budget;
  model.seed = opts.seed;

  // Selected members apply to unseen data, so they are (re)fit on every
  // training row whenever scoring used a held-out split.
  const bool refit = opts.validation_fraction > 0.0;
  for (int cls : table.class_ids) {
    const detail::SelectedMembers sel = detail::select_and_weight(table, cls);
    ClassEnsemble ens;
    ens.class_id = cls;
    for (std::size_t j = 0; j < sel.config_indices.size(); ++j) {
      ClassEnsembleMember member;
      member.config = grid[sel.config_indices[j]];
      member.model = refit ? fit_regressor(x, y, member.config,
                                           mix_seed(opts.seed, 0x666974ULL,
                                                    sel.config_indices[j]))
                           : models[sel.config_indices[j]];
      member.q = sel.q[j];
      member.weight = sel.weights[j];
      ens.members.push_back(std::move(member));
    }
    model.ensembles[cls] = std::move(ens);
  }

  model.classifier =
      fit_classifier_ensemble(x, labels, mix_seed(opts.seed, 0x636c73ULL));
  return model;
}

struct Prediction {
  double y = 0.0;
  int predicted_class = 0;
};

// Application phase: classify, then emit the weighted ensemble prediction
// of the predicted class.
inline Prediction predict(const PersonalizedModel& model, const FeatureVector& fv) {
  const int cls = model.classifier.predict(fv.values);
  const auto it = model.ensembles.find(cls);
  if (it == model.ensembles.end())
    throw InternalError("predict: classifier returned class " + std::to_string(cls) +
                        " with no ensemble");
  return {it->second.predict(fv.values), cls};
}

// Table-2 Ensemble-ground path: the true class is a-priori information.
inline double predict_with_known_class(const PersonalizedModel& model,
                                       const FeatureVector& fv, int true_class) {
  return model.ensemble_of(true_class).predict(fv.values);
}

}  // namespace perfreg

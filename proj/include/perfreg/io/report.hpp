#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "perfreg/errors.hpp"
#include "perfreg/evaluation.hpp"
#include "perfreg/io/tables.hpp"

namespace perfreg {

inline nlohmann::json scenario_report_to_json(const ScenarioReport& report,
                                              const ConfusionMatrix& confusion) {
  nlohmann::json j;
  j["format"] = "perfreg-report";
  j["version"] = 1;
  j["algorithm"] = report.algorithm_id;
  j["budget"] = report.budget;
  j["target_transform"] = target_transform_name(report.target_transform);
  j["sample_multiplier"] = report.sample_multiplier;
  j["seed"] = report.seed;
  j["best_test_enabled"] = report.best_test_enabled;
  j["best_test"] = report.best_test_name;
  j["best_test_pooling"] = report.best_test_pooling;
  j["problems"] = report.problem_ids;
  j["fold_instances"] = report.fold_instance_ids;

  nlohmann::json scenarios;
  for (Scenario s : kAllScenarios)
    scenarios[scenario_name(s)] = report.errors[static_cast<std::size_t>(s)];
  j["scenario_fold_errors"] = std::move(scenarios);

  // Derived per-problem statistics; medians drive the comparisons, means
  // are reported alongside them.
  nlohmann::json medians, means;
  for (Scenario s : kAllScenarios) {
    if (s == Scenario::BestTest && !report.best_test_enabled) continue;
    nlohmann::json med = nlohmann::json::array(), mu = nlohmann::json::array();
    for (int p : report.problem_ids) {
      med.push_back(report.median_ae_of(s, p));
      mu.push_back(report.mean_ae_of(s, p));
    }
    medians[scenario_name(s)] = std::move(med);
    means[scenario_name(s)] = std::move(mu);
  }
  j["median_ae"] = std::move(medians);
  j["mean_ae"] = std::move(means);

  nlohmann::json folds = nlohmann::json::array();
  for (const FoldSelection& sel : report.fold_selections) {
    nlohmann::json classes = nlohmann::json::array();
    for (const FoldClassSelection& fcs : sel.classes)
      classes.push_back({{"class_id", fcs.class_id},
                         {"members", fcs.member_names},
                         {"q", fcs.q},
                         {"weights", fcs.weights}});
    folds.push_back({{"best_train", sel.best_train}, {"classes", std::move(classes)}});
  }
  j["fold_selections"] = std::move(folds);

  j["confusion"] = {{"labels", confusion.labels},
                    {"counts", confusion.counts},
                    {"trace", confusion.trace()},
                    {"total", confusion.total()},
                    {"accuracy", confusion.accuracy()}};
  return j;
}

struct LoadedReport {
  ScenarioReport report;
  ConfusionMatrix confusion;
};

inline LoadedReport scenario_report_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "perfreg-report")
    throw DataError("not a perfreg scenario report");
  LoadedReport loaded;
  ScenarioReport& r = loaded.report;
  r.algorithm_id = j.at("algorithm").get<std::string>();
  r.budget = j.at("budget").get<long>();
  r.target_transform = parse_target_transform(j.at("target_transform").get<std::string>());
  r.sample_multiplier = j.at("sample_multiplier").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.best_test_enabled = j.at("best_test_enabled").get<bool>();
  r.best_test_name = j.at("best_test").get<std::string>();
  r.best_test_pooling = j.at("best_test_pooling").get<std::string>();
  r.problem_ids = j.at("problems").get<std::vector<int>>();
  r.fold_instance_ids = j.at("fold_instances").get<std::vector<int>>();
  const nlohmann::json& scenarios = j.at("scenario_fold_errors");
  for (Scenario s : kAllScenarios)
    r.errors[static_cast<std::size_t>(s)] =
        scenarios.at(scenario_name(s))
            .get<std::vector<std::vector<std::vector<double>>>>();
  for (const nlohmann::json& fj : j.at("fold_selections")) {
    FoldSelection sel;
    sel.best_train = fj.at("best_train").get<std::string>();
    for (const nlohmann::json& cj : fj.at("classes")) {
      FoldClassSelection fcs;
      fcs.class_id = cj.at("class_id").get<int>();
      fcs.member_names = cj.at("members").get<std::vector<std::string>>();
      fcs.q = cj.at("q").get<std::vector<double>>();
      fcs.weights = cj.at("weights").get<std::vector<double>>();
      sel.classes.push_back(std::move(fcs));
    }
    r.fold_selections.push_back(std::move(sel));
  }
  const nlohmann::json& cj = j.at("confusion");
  loaded.confusion.labels = cj.at("labels").get<std::vector<int>>();
  loaded.confusion.counts = cj.at("counts").get<std::vector<std::vector<long>>>();
  return loaded;
}

inline void save_scenario_report(const ScenarioReport& report,
                                 const ConfusionMatrix& confusion,
                                 const std::string& path) {
  write_file(path, scenario_report_to_json(report, confusion).dump(1) + "\n");
}

inline LoadedReport load_scenario_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed report " + path + ": " + e.what());
  }
  return scenario_report_from_json(j);
}

// Strict per-problem win count of `candidate` over `baseline`, by median
// (default) or mean absolute error.
inline int count_wins(const ScenarioReport& report, Scenario candidate, Scenario baseline,
                      bool mean_metric = false) {
  int wins = 0;
  for (int p : report.problem_ids) {
    const double c = mean_metric ? report.mean_ae_of(candidate, p)
                                 : report.median_ae_of(candidate, p);
    const double b = mean_metric ? report.mean_ae_of(baseline, p)
                                 : report.median_ae_of(baseline, p);
    wins += c < b;
  }
  return wins;
}

// Table-3-style text rendering: per-problem median absolute errors with
// win markers on the ensemble columns (* beats best-test, + beats
// best-train, # beats both).
inline std::string render_report_table(const ScenarioReport& report,
                                       bool mean_metric = false) {
  const bool with_test = report.best_test_enabled;
  const auto ae = [&](Scenario s, int p) {
    return mean_metric ? report.mean_ae_of(s, p) : report.median_ae_of(s, p);
  };
  std::string out;
  char line[256];
  out += std::string(mean_metric ? "mean" : "median") +
         " absolute error per problem (" + report.algorithm_id + ", budget " +
         std::to_string(report.budget) + ", target " +
         target_transform_name(report.target_transform) + ")\n";
  std::snprintf(line, sizeof line, "%-8s %12s %12s %14s %18s %18s\n", "problem",
                with_test ? "best-test" : "-", "best-train", "best-tr-inst",
                "ensemble-ground", "ensemble-class");
  out += line;
  for (int p : report.problem_ids) {
    const double bt = with_test ? ae(Scenario::BestTest, p) : 0.0;
    const double btr = ae(Scenario::BestTrain, p);
    const double bti = ae(Scenario::BestTrainInstance, p);
    const auto marker = [&](double v) {
      const bool beats_train = v < btr;
      const bool beats_test = with_test && v < bt;
      if (beats_train && beats_test) return "#";
      if (beats_train) return "+";
      if (beats_test) return "*";
      return " ";
    };
    const double ground = ae(Scenario::EnsembleGround, p);
    const double cls = ae(Scenario::EnsembleClass, p);
    std::snprintf(line, sizeof line, "%-8d %12.4f %12.4f %14.4f %16.4f%s %16.4f%s\n", p,
                  bt, btr, bti, ground, marker(ground), cls, marker(cls));
    out += line;
  }
  out += std::string("markers: + beats best-train, * beats best-test, # beats both "
                     "(strict ") + (mean_metric ? "means" : "medians") + ")\n";
  std::snprintf(line, sizeof line,
                "wins vs best-train: ensemble-ground %d/%zu, ensemble-class %d/%zu\n",
                count_wins(report, Scenario::EnsembleGround, Scenario::BestTrain, mean_metric),
                report.problem_ids.size(),
                count_wins(report, Scenario::EnsembleClass, Scenario::BestTrain, mean_metric),
                report.problem_ids.size());
  out += line;
  if (with_test) {
    std::snprintf(line, sizeof line,
                  "wins vs best-test:  ensemble-ground %d/%zu, ensemble-class %d/%zu\n",
                  count_wins(report, Scenario::EnsembleGround, Scenario::BestTest, mean_metric),
                  report.problem_ids.size(),
                  count_wins(report, Scenario::EnsembleClass, Scenario::BestTest, mean_metric),
                  report.problem_ids.size());
    out += line;
    out += "best-test model: " + report.best_test_name + "\n";
  }
  if (!report.fold_selections.empty()) {
    out += "best-train per fold:";
    for (const FoldSelection& sel : report.fold_selections) out += " " + sel.best_train;
    out += "\n";
  }
  return out;
}

inline std::string confusion_to_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\predicted";
  for (int l : cm.labels) out += "," + std::to_string(l);
  out += "\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out += std::to_string(cm.labels[i]);
    for (std::size_t c = 0; c < cm.labels.size(); ++c)
      out += "," + std::to_string(cm.counts[i][c]);
    out += "\n";
  }
  out += "# trace=" + std::to_string(cm.trace()) + " total=" + std::to_string(cm.total()) +
         " accuracy=" + format_double(cm.accuracy()) + "\n";
  return out;
}

}  // namespace perfreg

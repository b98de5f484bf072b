#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "perfreg/perfreg.hpp"

using namespace perfreg;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "perfreg_io_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_of(const std::string& name) { return (test_dir() / name).string(); }

FeatureTable random_feature_table(int problems, int instances, std::uint64_t seed) {
  FeatureTable table;
  Rng rng(seed);
  for (int p = 1; p <= problems; ++p) {
    for (int i = 1; i <= instances; ++i) {
      FeatureVector fv;
      fv.problem_id = p;
      fv.instance_id = i;
      for (double& v : fv.values) v = rng.uniform(-1e4, 1e4);
      fv.values[3] = 1e-17 * rng.normal();  // exercise tiny magnitudes
      fv.values[1] = static_cast<double>(p) * 3.0;
      table.rows.push_back(fv);
    }
  }
  return table;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PERFREG_CLI_PATH) + " " + args + " > " +
                          path_of("cli_stdout.txt") + " 2> " + path_of("cli_stderr.txt");
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string read_all(const std::string& path) {
  std::ifstream in(path);
  std::string s, line;
  while (std::getline(in, line)) s += line + "\n";
  return s;
}

}  // namespace

TEST_CASE("performance tables round-trip at full precision") {
  PerformanceTable table;
  Rng rng(8);
  for (int p = 1; p <= 3; ++p)
    for (int i = 1; i <= 4; ++i)
      for (long b : {250L, 500L}) {
        PerformanceRecord r;
        r.algorithm_id = "BIPOP-CMA-ES";
        r.problem_id = p;
        r.instance_id = i;
        r.budget = b;
        r.target_precision = std::abs(rng.normal()) * 1e-7;
        table.records.push_back(r);
      }
  const std::string path = path_of("perf.csv");
  save_performance_table(table, path);
  const PerformanceTable loaded = load_performance_table(path);
  REQUIRE(loaded.records.size() == table.records.size());
  for (std::size_t i = 0; i < table.records.size(); ++i) {
    REQUIRE(loaded.records[i].algorithm_id == table.records[i].algorithm_id);
    REQUIRE(loaded.records[i].target_precision == table.records[i].target_precision);
    REQUIRE(loaded.records[i].budget == table.records[i].budget);
  }
}

TEST_CASE("performance parsing reports line numbers and bad rows") {
  REQUIRE_THROWS_AS(parse_performance_csv({"bogus header"}), DataError);

  try {
    parse_performance_csv({kPerformanceHeader, "a,1,1,100,0.5", "b,2,oops,100,0.5"});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
  }
  REQUIRE_THROWS_AS(parse_performance_csv({kPerformanceHeader, "a,1,1,100"}), DataError);
  REQUIRE_THROWS_AS(
      parse_performance_csv({kPerformanceHeader, "a,1,1,100,-0.5"}), DataError);
  // Duplicate keys.
  REQUIRE_THROWS_AS(parse_performance_csv(
                        {kPerformanceHeader, "a,1,1,100,0.5", "a,1,1,100,0.7"}),
                    DataError);
  // A single valid row parses.
  const PerformanceTable t =
      parse_performance_csv({kPerformanceHeader, "BIPOP-CMA-ES,6,1,1000,0.215"});
  REQUIRE(t.records.size() == 1);
  REQUIRE(t.records[0].problem_id == 6);
  REQUIRE(t.records[0].target_precision == 0.215);
}

TEST_CASE("feature tables round-trip bit-exactly") {
  const FeatureTable table = random_feature_table(3, 4, 99);
  const std::string path = path_of("features.csv");
  save_feature_table(table, path);
  const FeatureTable loaded = load_feature_table(path);
  REQUIRE(loaded.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    REQUIRE(loaded.rows[i] == table.rows[i]);
}

TEST_CASE("feature tables reject schema drift") {
  REQUIRE_THROWS_AS(parse_feature_csv({"problem_id,instance_id,foo"}), DataError);
  std::vector<std::string> lines = {feature_table_header(), "1,1,0.5"};
  REQUIRE_THROWS_AS(parse_feature_csv(lines), DataError);
}

TEST_CASE("design sets export with the documented header") {
  const ProblemInstance inst = instantiate(4, 1, 3);
  const DesignSet ds = uniform_sample(inst, 10, 77);
  const std::string csv = design_set_to_csv(ds);
  REQUIRE(csv.rfind("problem_id,instance_id,dim,seed,x1,x2,x3,fitness\n", 0) == 0);
  // Header plus one line per point.
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  REQUIRE(lines == 1 + ds.points.rows);
}

TEST_CASE("generated performance is deterministic and monotone in budget") {
  SuiteConfig suite;
  suite.dim = 2;
  suite.function_ids = {1, 3, 20};
  suite.instance_ids = {1, 2};
  const std::vector<long> budgets = {250, 500, 1000};
  const PerformanceTable a =
      generate_performance(suite, SimpleOptimizer::RandomSearch, budgets, 5);
  const PerformanceTable b =
      generate_performance(suite, SimpleOptimizer::RandomSearch, budgets, 5);
  REQUIRE(a.records.size() == 3 * 2 * 3);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    REQUIRE(a.records[i].target_precision == b.records[i].target_precision);

  std::map<std::pair<int, int>, std::map<long, double>> by_key;
  for (const PerformanceRecord& r : a.records) {
    REQUIRE(r.target_precision >= 0.0);
    by_key[{r.problem_id, r.instance_id}][r.budget] = r.target_precision;
  }
  for (const auto& [key, series] : by_key) {
    REQUIRE(series.at(500) <= series.at(250));
    REQUIRE(series.at(1000) <= series.at(500));
  }

  const PerformanceTable es =
      generate_performance(suite, SimpleOptimizer::OnePlusOneEs, budgets, 5, "my-es");
  REQUIRE(es.records[0].algorithm_id == "my-es");
  for (const PerformanceRecord& r : es.records) REQUIRE(r.target_precision >= 0.0);
}

TEST_CASE("model manifests reload to bit-identical predictions") {
  // Train a small personalized model on synthetic tables.
  FeatureTable features = random_feature_table(3, 5, 123);
  PerformanceTable performance;
  Rng rng(5);
  for (const FeatureVector& fv : features.rows) {
    PerformanceRecord r;
    r.algorithm_id = "toy";
    r.problem_id = fv.problem_id;
    r.instance_id = fv.instance_id;
    r.budget = 100;
    r.target_precision = std::abs(fv.values[0]) * 1e-3 + 0.1 * fv.problem_id;
    performance.records.push_back(r);
  }
  std::vector<RMConfig> grid = {
      {Technique::DecisionTree, SplitCriterion::Mae, 2, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
      {Technique::BaggingDT, SplitCriterion::Mse, 4, 10},
  };
  TrainOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 100;
  opts.transform = TargetTransform::NaturalLog;
  opts.seed = 9;
  const PersonalizedModel model = train_personalized(features, performance, grid, opts);

  const std::string path = path_of("model.json");
  save_personalized_model(model, path);
  const PersonalizedModel loaded = load_personalized_model(path);

  REQUIRE(loaded.target_transform == model.target_transform);
  REQUIRE(loaded.ensembles.size() == model.ensembles.size());
  Rng probe_rng(777);
  for (int probe = 0; probe < 30; ++probe) {
    FeatureVector fv;
    fv.problem_id = 1;
    fv.instance_id = probe;
    for (double& v : fv.values) v = probe_rng.uniform(-10.0, 10.0);
    const Prediction a = predict(model, fv);
    const Prediction b = predict(loaded, fv);
    REQUIRE(a.y == b.y);
    REQUIRE(a.predicted_class == b.predicted_class);
    for (const auto& [cls, ens] : model.ensembles)
      REQUIRE(predict_with_known_class(model, fv, cls) ==
              predict_with_known_class(loaded, fv, cls));
  }
}

TEST_CASE("scenario reports round-trip through json") {
  FeatureTable features = random_feature_table(3, 5, 42);
  PerformanceTable performance;
  for (const FeatureVector& fv : features.rows) {
    PerformanceRecord r;
    r.algorithm_id = "toy";
    r.problem_id = fv.problem_id;
    r.instance_id = fv.instance_id;
    r.budget = 250;
    r.target_precision = std::abs(fv.values[0]) * 1e-4;
    performance.records.push_back(r);
  }
  std::vector<RMConfig> grid = {
      {Technique::DecisionTree, SplitCriterion::Mse, 2, 0},
      {Technique::RandomForest, SplitCriterion::Mse, 2, 10},
      {Technique::BaggingDT, SplitCriterion::Mse, 2, 10},
  };
  EvalOptions opts;
  opts.algorithm_id = "toy";
  opts.budget = 250;
  opts.seed = 31;
  const EvalResult result = run_evaluation(features, performance, grid, opts);

  const std::string path = path_of("report.json");
  save_scenario_report(result.report, result.confusion, path);
  const LoadedReport loaded = load_scenario_report(path);
  REQUIRE(loaded.report.errors == result.report.errors);
  REQUIRE(loaded.report.best_test_name == result.report.best_test_name);
  REQUIRE(loaded.confusion.counts == result.confusion.counts);
  for (Scenario s : kAllScenarios)
    for (int p : result.report.problem_ids)
      REQUIRE(loaded.report.median_ae_of(s, p) == result.report.median_ae_of(s, p));

  // Rendering mentions every problem and the win-count summary.
  const std::string table = render_report_table(result.report);
  REQUIRE(table.find("wins vs best-train") != std::string::npos);
  const std::string mean_table = render_report_table(result.report, true);
  REQUIRE(mean_table.find("mean absolute error") != std::string::npos);
  const std::string confusion = confusion_to_csv(result.confusion);
  REQUIRE(confusion.find("trace=") != std::string::npos);

  // Both median and mean statistics are materialized in the json.
  const nlohmann::json j = scenario_report_to_json(result.report, result.confusion);
  for (Scenario s : kAllScenarios) {
    const auto& med = j.at("median_ae").at(scenario_name(s));
    const auto& mu = j.at("mean_ae").at(scenario_name(s));
    for (std::size_t pi = 0; pi < result.report.problem_ids.size(); ++pi) {
      const int p = result.report.problem_ids[pi];
      REQUIRE(med[pi].get<double>() == result.report.median_ae_of(s, p));
      REQUIRE(mu[pi].get<double>() == result.report.mean_ae_of(s, p));
    }
  }
}

// ---------------------------------------------------------------------------
// CLI subprocess tests

TEST_CASE("cli runs the full pipeline end to end") {
  const std::string features_path = path_of("cli_features.csv");
  const std::string perf_path = path_of("cli_perf.csv");

  REQUIRE(run_cli("features --out " + features_path +
                  " --dim 2 --multiplier 30 --seed 7 --functions 1,6 --instances 1-5") == 0);
  const FeatureTable features = load_feature_table(features_path);
  REQUIRE(features.rows.size() == 10);

  REQUIRE(run_cli("simulate --out " + perf_path +
                  " --optimizer random-search --budgets 250,500 --dim 2 --seed 7"
                  " --functions 1,6 --instances 1-5") == 0);
  const PerformanceTable perf = load_performance_table(perf_path);
  REQUIRE(perf.records.size() == 20);

  const std::string model_path = path_of("cli_model.json");
  REQUIRE(run_cli("train --features " + features_path + " --performance " + perf_path +
                  " --algorithm random-search --budget 250 --target log --seed 3 --out " +
                  model_path) == 0);

  // Determinism: a second run writes byte-identical output.
  const std::string model2_path = path_of("cli_model2.json");
  REQUIRE(run_cli("train --features " + features_path + " --performance " + perf_path +
                  " --algorithm random-search --budget 250 --target log --seed 3 --out " +
                  model2_path) == 0);
  REQUIRE(read_all(model_path) == read_all(model2_path));

  const std::string preds_path = path_of("cli_preds.csv");
  REQUIRE(run_cli("predict --model " + model_path + " --features " + features_path +
                  " --out " + preds_path) == 0);
  const std::string preds = read_all(preds_path);
  REQUIRE(preds.rfind("problem_id,instance_id,predicted_class,prediction\n", 0) == 0);

  const std::string report_path = path_of("cli_report.json");
  const std::string table_path = path_of("cli_table.txt");
  const std::string confusion_path = path_of("cli_confusion.csv");
  REQUIRE(run_cli("evaluate --features " + features_path + " --performance " + perf_path +
                  " --algorithm random-search --budget 250 --target log --seed 3"
                  " --multiplier 30 --out-report " + report_path + " --out-table " +
                  table_path + " --out-confusion " + confusion_path) == 0);
  REQUIRE(fs::exists(report_path));
  REQUIRE(read_all(table_path).find("median absolute error") != std::string::npos);

  const std::string adv_path = path_of("cli_advantage.csv");
  REQUIRE(run_cli("report --report " + report_path +
                  " --compare ensemble-class:best-train --out " + adv_path) == 0);
  const std::string adv = read_all(adv_path);
  REQUIRE(adv.rfind("problem,advantage\n", 0) == 0);
  // One line per problem plus header.
  std::size_t lines = 0;
  for (char c : adv) lines += c == '\n';
  REQUIRE(lines == 3);

  // Cross-report comparison against the same file is all zeros.
  const std::string self_adv_path = path_of("cli_self_advantage.csv");
  REQUIRE(run_cli("report --report " + report_path +
                  " --compare ensemble-class:ensemble-class --baseline-report " +
                  report_path + " --out " + self_adv_path) == 0);
  for (const std::string& row : {std::string("1,0"), std::string("6,0")})
    REQUIRE(read_all(self_adv_path).find(row) != std::string::npos);
  REQUIRE(run_cli("report --report " + report_path + " --means") == 0);
}

TEST_CASE("cli features can export the sampled design sets") {
  const std::string dir = path_of("designs");
  fs::create_directories(dir);
  REQUIRE(run_cli("features --out " + path_of("design_features.csv") +
                  " --dim 2 --multiplier 30 --seed 9 --functions 2 --instances 1-5"
                  " --design-dir " + dir) == 0);
  REQUIRE(fs::exists(dir + "/design_f2_i1.csv"));
  REQUIRE(fs::exists(dir + "/design_f2_i5.csv"));
  const std::string csv = read_all(dir + "/design_f2_i1.csv");
  REQUIRE(csv.rfind("problem_id,instance_id,dim,seed,x1,x2,fitness\n", 0) == 0);
}

TEST_CASE("cli maps failures onto the documented exit codes") {
  REQUIRE(run_cli("--definitely-not-a-flag") == 1);
  REQUIRE(run_cli("train --features missing.csv --performance also-missing.csv"
                  " --algorithm a --budget 1 --out x.json") == 2);
  REQUIRE(run_cli("report --report /nonexistent/report.json") == 2);
  REQUIRE(run_cli("--help") == 0);
}

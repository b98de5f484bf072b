// perfreg command-line tool: feature extraction, synthetic performance
// generation, model training, prediction, the cross-validated scenario
// evaluation, and report rendering.

#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfreg/perfreg.hpp"

namespace {

using namespace perfreg;

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string token =
        spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) {
      const std::size_t dash = token.find('-', 1);
      if (dash != std::string::npos) {
        const int lo = std::stoi(token.substr(0, dash));
        const int hi = std::stoi(token.substr(dash + 1));
        if (hi < lo) throw DataError("bad range: " + token);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(std::stoi(token));
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw DataError("empty id list: " + spec);
  return out;
}

struct FeatureArgs {
  std::string out;
  std::string design_dir;
  int dim = 5;
  int multiplier = 400;
  std::uint64_t seed = 1;
  std::string functions = "1-24";
  std::string instances = "1-5";
};

int run_features(const FeatureArgs& args) {
  SuiteConfig suite;
  suite.dim = args.dim;
  suite.function_ids = parse_int_list(args.functions);
  suite.instance_ids = parse_int_list(args.instances);

  FeatureTable table;
  for (int fid : suite.function_ids) {
    for (int iid : suite.instance_ids) {
      const ProblemInstance inst = instantiate(fid, iid, suite.dim);
      const std::uint64_t sample_seed =
          mix_seed(args.seed, 0x73616dULL, static_cast<std::uint64_t>(fid),
                   static_cast<std::uint64_t>(iid));
      const DesignSet ds = uniform_sample(inst, args.multiplier, sample_seed);
      if (!args.design_dir.empty())
        save_design_set(ds, args.design_dir + "/design_f" + std::to_string(fid) + "_i" +
                                std::to_string(iid) + ".csv");
      FeatureConfig cfg;
      cfg.budget_multiplier = args.multiplier;
      cfg.seed = mix_seed(args.seed, 0x666561ULL, static_cast<std::uint64_t>(fid),
                          static_cast<std::uint64_t>(iid));
      table.rows.push_back(compute_features(ds, cfg));
    }
  }
  save_feature_table(table, args.out);
  std::printf("wrote %zu feature rows to %s (dim=%d multiplier=%d seed=%llu)\n",
              table.rows.size(), args.out.c_str(), args.dim, args.multiplier,
              static_cast<unsigned long long>(args.seed));
  return 0;
}

struct SimulateArgs {
  std::string out;
  std::string optimizer = "random-search";
  std::string budgets = "250,500,1000";
  std::string algorithm;
  int dim = 5;
  std::uint64_t seed = 1;
  std::string functions = "1-24";
  std::string instances = "1-5";
};

int run_simulate(const SimulateArgs& args) {
  SuiteConfig suite;
  suite.dim = args.dim;
  suite.function_ids = parse_int_list(args.functions);
  suite.instance_ids = parse_int_list(args.instances);
  std::vector<long> budgets;
  for (int b : parse_int_list(args.budgets)) budgets.push_back(b);
  const PerformanceTable table = generate_performance(
      suite, parse_optimizer(args.optimizer), budgets, args.seed, args.algorithm);
  save_performance_table(table, args.out);
  std::printf("wrote %zu performance records to %s (optimizer=%s seed=%llu)\n",
              table.records.size(), args.out.c_str(), args.optimizer.c_str(),
              static_cast<unsigned long long>(args.seed));
  return 0;
}

struct TrainArgs {
  std::string features;
  std::string performance;
  std::string algorithm;
  long budget = 0;
  std::string target = "raw";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int exclude_instance = -1;
  double validation_fraction = 0.0;
  std::string out;
};

int run_train(const TrainArgs& args) {
  const FeatureTable features = load_feature_table(args.features);
  const PerformanceTable performance = load_performance_table(args.performance);

  TrainOptions opts;
  opts.algorithm_id = args.algorithm;
  opts.budget = args.budget;
  opts.transform = parse_target_transform(args.target);
  opts.seed = args.seed;
  opts.n_threads = args.threads;
  opts.validation_fraction = args.validation_fraction;
  if (args.exclude_instance >= 0) {
    for (const FeatureVector& fv : features.rows)
      if (fv.instance_id != args.exclude_instance)
        opts.include_instances.insert(fv.instance_id);
    if (opts.include_instances.empty())
      throw DataError("excluding instance " + std::to_string(args.exclude_instance) +
                      " leaves no training rows");
  }

  const PersonalizedModel model =
      train_personalized(features, performance, enumerate_grid(), opts);
  save_personalized_model(model, args.out);
  std::printf("wrote model manifest %s (%zu class ensembles, seed=%llu)\n",
              args.out.c_str(), model.ensembles.size(),
              static_cast<unsigned long long>(args.seed));
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string features;
  std::string out;
};

int run_predict(const PredictArgs& args) {
  const PersonalizedModel model = load_personalized_model(args.model);
  const FeatureTable features = load_feature_table(args.features);
  std::string csv = "problem_id,instance_id,predicted_class,prediction\n";
  for (const FeatureVector& fv : features.rows) {
    const Prediction p = predict(model, fv);
    csv += std::to_string(fv.problem_id) + "," + std::to_string(fv.instance_id) + "," +
           std::to_string(p.predicted_class) + "," + format_double(p.y) + "\n";
  }
  if (args.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file(args.out, csv);
    std::printf("wrote %zu predictions to %s\n", features.rows.size(), args.out.c_str());
  }
  return 0;
}

struct EvaluateArgs {
  std::string features;
  std::string performance;
  std::string algorithm;
  long budget = 0;
  std::string target = "raw";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int multiplier = 0;
  bool no_best_test = false;
  std::string out_report;
  std::string out_table;
  std::string out_confusion;
};

int run_evaluate_cmd(const EvaluateArgs& args) {
  const FeatureTable features = load_feature_table(args.features);
  const PerformanceTable performance = load_performance_table(args.performance);

  EvalOptions opts;
  opts.algorithm_id = args.algorithm;
  opts.budget = args.budget;
  opts.transform = parse_target_transform(args.target);
  opts.seed = args.seed;
  opts.n_threads = args.threads;
  opts.include_best_test = !args.no_best_test;
  opts.sample_multiplier = args.multiplier;

  const EvalResult result = run_evaluation(features, performance, enumerate_grid(), opts);
  const std::string table = render_report_table(result.report);
  if (!args.out_report.empty()) {
    save_scenario_report(result.report, result.confusion, args.out_report);
    std::printf("wrote scenario report to %s\n", args.out_report.c_str());
  }
  if (!args.out_confusion.empty()) {
    write_file(args.out_confusion, confusion_to_csv(result.confusion));
    std::printf("wrote confusion matrix to %s\n", args.out_confusion.c_str());
  }
  if (args.out_table.empty()) {
    std::fputs(table.c_str(), stdout);
  } else {
    write_file(args.out_table, table);
    std::printf("wrote report table to %s\n", args.out_table.c_str());
  }
  std::printf("classification accuracy: %ld/%ld\n", result.confusion.trace(),
              result.confusion.total());
  return 0;
}

struct ReportArgs {
  std::string report;
  std::string baseline_report;
  std::string compare;
  std::string out;
  bool table = false;
  bool confusion = false;
  bool means = false;
};

int run_report(const ReportArgs& args) {
  const LoadedReport loaded = load_scenario_report(args.report);
  std::string out;
  if (!args.compare.empty()) {
    const std::size_t colon = args.compare.find(':');
    if (colon == std::string::npos)
      throw DataError("--compare expects '<scenario>:<scenario>'");
    const Scenario a = parse_scenario(args.compare.substr(0, colon));
    const Scenario b = parse_scenario(args.compare.substr(colon + 1));
    // The baseline scenario may come from a second report, e.g. the same
    // pipeline run on a different sample size or budget.
    const std::map<int, double> cells_b =
        args.baseline_report.empty()
            ? loaded.report.median_cells(b)
            : load_scenario_report(args.baseline_report).report.median_cells(b);
    const std::map<int, double> adv =
        relative_advantage(loaded.report.median_cells(a), cells_b);
    out += "problem,advantage\n";
    for (const auto& [problem, value] : adv)
      out += std::to_string(problem) + "," + format_double(value) + "\n";
  } else if (args.confusion) {
    out = confusion_to_csv(loaded.confusion);
  } else {
    out = render_report_table(loaded.report, args.means);
  }
  if (args.out.empty()) std::fputs(out.c_str(), stdout);
  else write_file(args.out, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"personalized performance regression for black-box optimizers"};
  app.require_subcommand(1);

  FeatureArgs fa;
  CLI::App* features = app.add_subcommand(
      "features", "compute the 56-feature table for a benchmark suite slice");
  features->add_option("--out", fa.out, "output feature table (csv)")->required();
  features->add_option("--design-dir", fa.design_dir,
                       "also export each sampled design set into this directory");
  features->add_option("--dim", fa.dim, "problem dimension");
  features->add_option("--multiplier", fa.multiplier, "sampling budget multiplier (n = m*d)");
  features->add_option("--seed", fa.seed, "master seed");
  features->add_option("--functions", fa.functions, "function ids, e.g. 1-24 or 1,3,7");
  features->add_option("--instances", fa.instances, "instance ids, e.g. 1-5");

  SimulateArgs sa;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate fixed-budget performance data with a built-in optimizer");
  simulate->add_option("--out", sa.out, "output performance table (csv)")->required();
  simulate->add_option("--optimizer", sa.optimizer, "random-search or 1+1-es");
  simulate->add_option("--budgets", sa.budgets, "comma-separated budgets");
  simulate->add_option("--algorithm", sa.algorithm, "algorithm id to record (default: optimizer name)");
  simulate->add_option("--dim", sa.dim, "problem dimension");
  simulate->add_option("--seed", sa.seed, "master seed");
  simulate->add_option("--functions", sa.functions, "function ids");
  simulate->add_option("--instances", sa.instances, "instance ids");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "train a personalized model manifest");
  train->add_option("--features", ta.features, "feature table (csv)")->required();
  train->add_option("--performance", ta.performance, "performance table (csv)")->required();
  train->add_option("--algorithm", ta.algorithm, "algorithm id to predict")->required();
  train->add_option("--budget", ta.budget, "fixed budget to predict")->required();
  train->add_option("--target", ta.target, "target transform: raw or log");
  train->add_option("--seed", ta.seed, "master seed");
  train->add_option("--threads", ta.threads, "worker threads (0 = auto)");
  train->add_option("--exclude-instance", ta.exclude_instance,
                    "hold out one instance id from training");
  train->add_option("--validation-fraction", ta.validation_fraction,
                    "score/weight members on a held-out split instead of the training fit");
  train->add_option("--out", ta.out, "output model manifest (json)")->required();

  PredictArgs pa;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict (class, y) per feature row");
  predict_cmd->add_option("--model", pa.model, "model manifest (json)")->required();
  predict_cmd->add_option("--features", pa.features, "feature table (csv)")->required();
  predict_cmd->add_option("--out", pa.out, "output predictions (csv; default stdout)");

  EvaluateArgs ea;
  CLI::App* evaluate_cmd = app.add_subcommand(
      "evaluate", "run the stratified-fold evaluation of all five scenarios");
  evaluate_cmd->add_option("--features", ea.features, "feature table (csv)")->required();
  evaluate_cmd->add_option("--performance", ea.performance, "performance table (csv)")->required();
  evaluate_cmd->add_option("--algorithm", ea.algorithm, "algorithm id to predict")->required();
  evaluate_cmd->add_option("--budget", ea.budget, "fixed budget to predict")->required();
  evaluate_cmd->add_option("--target", ea.target, "target transform: raw or log");
  evaluate_cmd->add_option("--seed", ea.seed, "master seed");
  evaluate_cmd->add_option("--threads", ea.threads, "worker threads (0 = auto)");
  evaluate_cmd->add_option("--multiplier", ea.multiplier,
                           "sample multiplier used for the features (metadata)");
  evaluate_cmd->add_flag("--no-best-test", ea.no_best_test,
                         "skip the test-informed best-test scenario");
  evaluate_cmd->add_option("--out-report", ea.out_report, "machine-readable report (json)");
  evaluate_cmd->add_option("--out-table", ea.out_table, "rendered table (text; default stdout)");
  evaluate_cmd->add_option("--out-confusion", ea.out_confusion, "confusion matrix (csv)");

  ReportArgs ra;
  CLI::App* report_cmd = app.add_subcommand("report", "render tables from a saved report");
  report_cmd->add_option("--report", ra.report, "scenario report (json)")->required();
  report_cmd->add_option("--compare", ra.compare,
                         "per-problem median-AE advantage, e.g. ensemble-class:best-train");
  report_cmd->add_option("--baseline-report", ra.baseline_report,
                         "take the right-hand scenario of --compare from this report");
  report_cmd->add_flag("--means", ra.means, "render mean instead of median AE");
  report_cmd->add_flag("--table", ra.table, "render the median table (default)");
  report_cmd->add_flag("--confusion", ra.confusion, "render the confusion matrix");
  report_cmd->add_option("--out", ra.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (features->parsed()) return run_features(fa);
    if (simulate->parsed()) return run_simulate(sa);
    if (train->parsed()) return run_train(ta);
    if (predict_cmd->parsed()) return run_predict(pa);
    if (evaluate_cmd->parsed()) return run_evaluate_cmd(ea);
    if (report_cmd->parsed()) return run_report(ra);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const perfreg::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const perfreg::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}

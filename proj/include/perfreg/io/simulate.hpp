#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "perfreg/data.hpp"
#include "perfreg/errors.hpp"
#include "perfreg/problems.hpp"
#include "perfreg/rng.hpp"

namespace perfreg {

// Which benchmark slice to generate: functions x instances at one dim.
struct SuiteConfig {
  int dim = 5;
  std::vector<int> function_ids = all_function_ids();
  std::vector<int> instance_ids = {1, 2, 3, 4, 5};

  static std::vector<int> all_function_ids() {
    std::vector<int> ids(benchmark_catalog().size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i + 1);
    return ids;
  }
};

enum class SimpleOptimizer { RandomSearch, OnePlusOneEs };

inline const char* optimizer_name(SimpleOptimizer o) {
  return o == SimpleOptimizer::RandomSearch ? "random-search" : "1+1-es";
}

inline SimpleOptimizer parse_optimizer(const std::string& s) {
  if (s == "random-search") return SimpleOptimizer::RandomSearch;
  if (s == "1+1-es" || s == "es") return SimpleOptimizer::OnePlusOneEs;
  throw DataError("unknown optimizer: " + s);
}

namespace detail {

// Best-so-far objective values at the requested evaluation checkpoints.
inline std::vector<double> run_optimizer(const ProblemInstance& inst,
                                         SimpleOptimizer optimizer,
                                         std::span<const long> checkpoints,
                                         std::uint64_t seed) {
  const long max_budget = *std::max_element(checkpoints.begin(), checkpoints.end());
  Rng rng(seed);
  const std::size_t d = static_cast<std::size_t>(inst.dim);

  std::vector<double> x(d), candidate(d);
  for (std::size_t i = 0; i < d; ++i)
    x[i] = rng.uniform(inst.lower_bound, inst.upper_bound);
  double best = evaluate(inst, x);
  double sigma = 0.3 * (inst.upper_bound - inst.lower_bound);

  std::vector<double> best_at(checkpoints.size());
  const auto record = [&](long evals) {
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
      if (checkpoints[c] == evals) best_at[c] = best;
  };
  record(1);

  for (long evals = 2; evals <= max_budget; ++evals) {
    if (optimizer == SimpleOptimizer::RandomSearch) {
      for (std::size_t i = 0; i < d; ++i)
        candidate[i] = rng.uniform(inst.lower_bound, inst.upper_bound);
      best = std::min(best, evaluate(inst, candidate));
    } else {
      for (std::size_t i = 0; i < d; ++i) {
        candidate[i] = std::clamp(x[i] + sigma * rng.normal(), inst.lower_bound,
                                  inst.upper_bound);
      }
      const double f = evaluate(inst, candidate);
      // 1/5th success rule.
      if (f <= best) {
        x = candidate;
        best = f;
        sigma *= 1.5;
      } else {
        sigma *= std::pow(1.5, -0.25);
      }
      sigma = std::clamp(sigma, 1e-12, inst.upper_bound - inst.lower_bound);
    }
    record(evals);
  }
  return best_at;
}

}  // namespace detail

// Desk-scale substitute for externally collected algorithm data: one run
// of a simple optimizer per (problem, instance), reporting the target
// precision (best-so-far minus instance optimum) at each budget.
inline PerformanceTable generate_performance(const SuiteConfig& suite,
                                             SimpleOptimizer optimizer,
                                             std::span<const long> budgets,
                                             std::uint64_t seed,
                                             const std::string& algorithm_id = "") {
  if (budgets.empty()) throw ContractError("generate_performance: no budgets");
  for (long b : budgets)
    if (b < 1) throw ContractError("generate_performance: budgets must be >= 1");

  std::vector<long> sorted(budgets.begin(), budgets.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::string algo =
      algorithm_id.empty() ? optimizer_name(optimizer) : algorithm_id;

  PerformanceTable table;
  for (int fid : suite.function_ids) {
    for (int iid : suite.instance_ids) {
      const ProblemInstance inst = instantiate(fid, iid, suite.dim);
      const double opt = instance_optimum(inst);
      const std::vector<double> best_at = detail::run_optimizer(
          inst, optimizer, sorted,
          mix_seed(seed, 0x73696dULL, static_cast<std::uint64_t>(fid),
                   static_cast<std::uint64_t>(iid)));
      for (std::size_t c = 0; c < sorted.size(); ++c) {
        PerformanceRecord r;
        r.algorithm_id = algo;
        r.problem_id = fid;
        r.instance_id = iid;
        r.budget = sorted[c];
        r.target_precision = std::max(0.0, best_at[c] - opt);
        table.records.push_back(std::move(r));
      }
    }
  }
  table.validate();
  return table;
}

}  // namespace perfreg

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/features/config.hpp"
#include "perfreg/linalg.hpp"

namespace perfreg {

enum class TargetTransform { Raw, NaturalLog };

inline const char* target_transform_name(TargetTransform t) {
  return t == TargetTransform::Raw ? "raw" : "natural_log";
}

inline TargetTransform parse_target_transform(const std::string& s) {
  if (s == "raw") return TargetTransform::Raw;
  if (s == "natural_log" || s == "log") return TargetTransform::NaturalLog;
  throw DataError("unknown target transform: " + s);
}

// raw -> identity; natural_log -> ln(max(value, 1e-8)), so zero target
// precisions stay finite.
inline double transform_target(double value, TargetTransform mode) {
  if (!(value >= 0.0)) throw DataError("target precision must be nonnegative and finite");
  if (mode == TargetTransform::Raw) return value;
  return std::log(std::max(value, 1e-8));
}

// One fixed-budget measurement of one algorithm run.
struct PerformanceRecord {
  std::string algorithm_id;
  int problem_id = 0;
  int instance_id = 0;
  long budget = 0;
  double target_precision = 0.0;
};

struct PerformanceTable {
  std::vector<PerformanceRecord> records;

  void validate() const {
    std::set<std::tuple<std::string, int, int, long>> seen;
    for (const PerformanceRecord& r : records) {
      if (r.budget <= 0) throw DataError("performance record with non-positive budget");
      if (!(r.target_precision >= 0.0) || !std::isfinite(r.target_precision))
        throw DataError("performance record with negative or non-finite precision");
      if (!seen.insert({r.algorithm_id, r.problem_id, r.instance_id, r.budget}).second)
        throw DataError("duplicate performance record for (" + r.algorithm_id + ", " +
                        std::to_string(r.problem_id) + ", " + std::to_string(r.instance_id) +
                        ", " + std::to_string(r.budget) + ")");
    }
  }

  std::set<long> budgets() const {
    std::set<long> out;
    for (const PerformanceRecord& r : records) out.insert(r.budget);
    return out;
  }
};

struct FeatureTable {
  std::vector<FeatureVector> rows;

  void validate() const {
    std::set<std::pair<int, int>> seen;
    for (const FeatureVector& fv : rows) {
      if (!seen.insert({fv.problem_id, fv.instance_id}).second)
        throw DataError("duplicate feature row for (" + std::to_string(fv.problem_id) +
                        ", " + std::to_string(fv.instance_id) + ")");
      for (double v : fv.values)
        if (!std::isfinite(v))
          throw DataError("non-finite feature value for (" + std::to_string(fv.problem_id) +
                          ", " + std::to_string(fv.instance_id) + ")");
    }
  }
};

// Feature rows joined with one (algorithm, budget) performance slice.
struct JoinedData {
  std::vector<int> problem_ids;
  std::vector<int> instance_ids;
  RowMatrix x;  // n x 56
  std::vector<double> y;
  std::string algorithm_id;
  long budget = 0;
  TargetTransform transform = TargetTransform::Raw;

  std::size_t size() const { return y.size(); }
};

inline JoinedData join_tables(const FeatureTable& features, const PerformanceTable& perf,
                              const std::string& algorithm, long budget,
                              TargetTransform transform) {
  features.validate();
  perf.validate();

  std::map<std::pair<int, int>, double> slice;
  for (const PerformanceRecord& r : perf.records)
    if (r.algorithm_id == algorithm && r.budget == budget)
      slice[{r.problem_id, r.instance_id}] = r.target_precision;
  if (slice.empty()) {
    std::string avail;
    for (long b : perf.budgets()) avail += " " + std::to_string(b);
    throw DataError("no performance records for algorithm '" + algorithm +
                    "' at budget " + std::to_string(budget) + "; table has budgets:" + avail);
  }

  std::vector<std::string> orphans;
  JoinedData joined;
  joined.algorithm_id = algorithm;
  joined.budget = budget;
  joined.transform = transform;
  joined.x = RowMatrix(features.rows.size(), kFeatureCount);
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    const FeatureVector& fv = features.rows[i];
    const auto it = slice.find({fv.problem_id, fv.instance_id});
    if (it == slice.end()) {
      orphans.push_back("features(" + std::to_string(fv.problem_id) + "," +
                        std::to_string(fv.instance_id) + ")");
      continue;
    }
    joined.problem_ids.push_back(fv.problem_id);
    joined.instance_ids.push_back(fv.instance_id);
    std::copy(fv.values.begin(), fv.values.end(), joined.x.row(i - orphans.size()).begin());
    joined.y.push_back(transform_target(it->second, transform));
    slice.erase(it);
  }
  for (const auto& [key, value] : slice)
    orphans.push_back("performance(" + std::to_string(key.first) + "," +
                      std::to_string(key.second) + ")");
  if (!orphans.empty()) {
    std::string msg = "feature/performance join mismatch; orphan keys:";
    for (const std::string& o : orphans) msg += " " + o;
    throw DataError(msg);
  }
  joined.x.rows = joined.y.size();
  joined.x.data.resize(joined.x.rows * joined.x.cols);
  return joined;
}

// Stratified folds: fold t holds instance t of every problem. Requires an
// identical instance-id set per problem.
struct FoldSpec {
  std::vector<int> instance_ids;  // sorted; fold t <-> instance_ids[t]

  std::size_t n_folds() const { return instance_ids.size(); }

  std::size_t fold_of_instance(int instance_id) const {
    const auto it =
        std::lower_bound(instance_ids.begin(), instance_ids.end(), instance_id);
    if (it == instance_ids.end() || *it != instance_id)
      throw InternalError("fold_of_instance: unknown instance id");
    return static_cast<std::size_t>(it - instance_ids.begin());
  }
};

inline FoldSpec make_stratified_folds(std::span<const int> problem_ids,
                                      std::span<const int> instance_ids) {
  if (problem_ids.size() != instance_ids.size() || problem_ids.empty())
    throw ContractError("make_stratified_folds: empty or mismatched key lists");
  std::map<int, std::set<int>> per_problem;
  std::set<int> all_instances;
  for (std::size_t i = 0; i < problem_ids.size(); ++i) {
    if (!per_problem[problem_ids[i]].insert(instance_ids[i]).second)
      throw DataError("duplicate (problem, instance) key (" +
                      std::to_string(problem_ids[i]) + ", " +
                      std::to_string(instance_ids[i]) + ")");
    all_instances.insert(instance_ids[i]);
  }
  for (const auto& [problem, instances] : per_problem) {
    for (int inst : all_instances)
      if (!instances.count(inst))
        throw DataError("problem " + std::to_string(problem) + " is missing instance " +
                        std::to_string(inst));
  }
  FoldSpec spec;
  spec.instance_ids.assign(all_instances.begin(), all_instances.end());
  return spec;
}

}  // namespace perfreg

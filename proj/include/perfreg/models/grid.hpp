#pragma once

#include <string>
#include <vector>

#include "perfreg/errors.hpp"

namespace perfreg {

enum class Technique { DecisionTree, RandomForest, BaggingDT };
enum class SplitCriterion { Mse, Mae, FriedmanMse };

inline const char* technique_name(Technique t) {
  switch (t) {
    case Technique::DecisionTree: return "DecisionTree";
    case Technique::RandomForest: return "RandomForest";
    case Technique::BaggingDT: return "BaggingDT";
  }
  throw InternalError("technique_name: bad enum");
}

inline const char* criterion_name(SplitCriterion c) {
  switch (c) {
    case SplitCriterion::Mse: return "mse";
    case SplitCriterion::Mae: return "mae";
    case SplitCriterion::FriedmanMse: return "friedman_mse";
  }
  throw InternalError("criterion_name: bad enum");
}

// One hyperparameter point of a regression technique. `nest` is 0 for
// DecisionTree and the tree count for the ensemble techniques.
struct RMConfig {
  Technique technique = Technique::DecisionTree;
  SplitCriterion crit = SplitCriterion::Mse;
  int minsplit = 2;
  int nest = 0;

  bool operator==(const RMConfig&) const = default;

  std::string canonical_name() const {
    std::string s = technique_name(technique);
    s += "_crit-";
    s += criterion_name(crit);
    s += "_minsplit-" + std::to_string(minsplit);
    if (technique != Technique::DecisionTree) s += "_nest-" + std::to_string(nest);
    return s;
  }
};

inline void validate_rm_config(const RMConfig& cfg) {
  if (cfg.minsplit < 2) throw ContractError("RMConfig: minsplit must be >= 2");
  if (cfg.technique == Technique::DecisionTree) {
    if (cfg.nest != 0) throw ContractError("RMConfig: DecisionTree takes no nest");
  } else {
    if (cfg.nest < 1) throw ContractError("RMConfig: ensemble nest must be >= 1");
    if (cfg.crit == SplitCriterion::FriedmanMse)
      throw ContractError("RMConfig: friedman_mse is DecisionTree-only");
  }
}

// The full 430-point grid: 3x10 DecisionTree, 2x10x10 RandomForest,
// 2x10x10 BaggingDT, in stable (technique, crit, minsplit, nest) order.
inline std::vector<RMConfig> enumerate_grid() {
  std::vector<RMConfig> grid;
  grid.reserve(430);
  const SplitCriterion dt_crits[] = {SplitCriterion::Mse, SplitCriterion::Mae,
                                     SplitCriterion::FriedmanMse};
  const SplitCriterion ens_crits[] = {SplitCriterion::Mse, SplitCriterion::Mae};
  for (SplitCriterion crit : dt_crits)
    for (int minsplit = 2; minsplit <= 20; minsplit += 2)
      grid.push_back({Technique::DecisionTree, crit, minsplit, 0});
  for (Technique tech : {Technique::RandomForest, Technique::BaggingDT})
    for (SplitCriterion crit : ens_crits)
      for (int minsplit = 2; minsplit <= 20; minsplit += 2)
        for (int nest = 10; nest <= 100; nest += 10)
          grid.push_back({tech, crit, minsplit, nest});
  return grid;
}

inline RMConfig parse_rm_config(const std::string& name) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t pos = name.find('_', start);
    if (pos == std::string::npos) {
      parts.push_back(name.substr(start));
      break;
    }
    parts.push_back(name.substr(start, pos - start));
    start = pos + 1;
  }
  if (parts.size() < 3) throw DataError("unparseable model name: " + name);

  RMConfig cfg;
  if (parts[0] == "DecisionTree") cfg.technique = Technique::DecisionTree;
  else if (parts[0] == "RandomForest") cfg.technique = Technique::RandomForest;
  else if (parts[0] == "BaggingDT") cfg.technique = Technique::BaggingDT;
  else throw DataError("unknown technique in model name: " + name);

  bool have_crit = false, have_minsplit = false, have_nest = false;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    const auto starts_with = [&](const char* prefix) {
      return p.rfind(prefix, 0) == 0;
    };
    if (starts_with("crit-")) {
      const std::string v = p.substr(5);
      if (v == "mse") cfg.crit = SplitCriterion::Mse;
      else if (v == "mae") cfg.crit = SplitCriterion::Mae;
      else if (v == "friedman") {
        // "friedman_mse" splits across two tokens.
        if (i + 1 < parts.size() && parts[i + 1] == "mse") {
          cfg.crit = SplitCriterion::FriedmanMse;
          ++i;
        } else {
          throw DataError("unknown criterion in model name: " + name);
        }
      } else throw DataError("unknown criterion in model name: " + name);
      have_crit = true;
    } else if (starts_with("minsplit-")) {
      cfg.minsplit = std::stoi(p.substr(9));
      have_minsplit = true;
    } else if (starts_with("nest-")) {
      cfg.nest = std::stoi(p.substr(5));
      have_nest = true;
    } else {
      throw DataError("unknown token '" + p + "' in model name: " + name);
    }
  }
  if (!have_crit || !have_minsplit)
    throw DataError("model name missing crit/minsplit: " + name);
  if ((cfg.technique != Technique::DecisionTree) != have_nest)
    throw DataError("model name has wrong nest arity: " + name);
  validate_rm_config(cfg);
  return cfg;
}

}  // namespace perfreg

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "perfreg/errors.hpp"

namespace perfreg {

inline constexpr std::size_t kFeatureCount = 56;

// Sampling/quantile parameters for feature extraction. The quantile list
// lengths are pinned (4 dispersion, 3 level) so that the feature vector
// keeps its fixed 56-entry layout; the values themselves are adjustable.
struct FeatureConfig {
  int budget_multiplier = 400;
  std::vector<double> disp_quantiles = {0.02, 0.05, 0.10, 0.25};
  std::vector<double> level_quantiles = {0.10, 0.25, 0.50};
  std::vector<double> ic_epsilons = default_ic_epsilons();
  std::uint64_t seed = 1;

  // {0} followed by a 30-point geometric grid over [1e-5, 1e15].
  static std::vector<double> default_ic_epsilons() {
    std::vector<double> eps = {0.0};
    constexpr int kPoints = 30;
    for (int i = 0; i < kPoints; ++i) {
      const double expo = -5.0 + 20.0 * static_cast<double>(i) / (kPoints - 1);
      eps.push_back(std::pow(10.0, expo));
    }
    return eps;
  }
};

inline void validate_feature_config(const FeatureConfig& cfg) {
  const auto check_quantiles = [](const std::vector<double>& q, std::size_t want,
                                  const char* which) {
    if (q.size() != want)
      throw ContractError(std::string(which) + ": quantile list length is fixed by the 56-feature layout");
    double prev = 0.0;
    for (double v : q) {
      if (v <= prev || v >= 1.0)
        throw ContractError(std::string(which) + ": quantiles must be strictly increasing in (0, 1)");
      prev = v;
    }
  };
  check_quantiles(cfg.disp_quantiles, 4, "disp_quantiles");
  check_quantiles(cfg.level_quantiles, 3, "level_quantiles");
  if (cfg.ic_epsilons.size() < 2)
    throw ContractError("ic_epsilons: need at least two grid points");
  double prev = -1.0;
  for (double e : cfg.ic_epsilons) {
    if (e < 0.0 || e <= prev)
      throw ContractError("ic_epsilons: grid must be nonnegative and strictly increasing");
    prev = e;
  }
}

enum class FeatureGroup { Disp, ElaLevel, ElaMeta, Ic, Nbc };

inline const char* feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Disp: return "disp";
    case FeatureGroup::ElaLevel: return "ela_level";
    case FeatureGroup::ElaMeta: return "ela_meta";
    case FeatureGroup::Ic: return "ic";
    case FeatureGroup::Nbc: return "nbc";
  }
  throw InternalError("feature_group_name: bad enum");
}

// Canonical feature order: disp (16), ela_level (21), ela_meta (9),
// ic (5), nbc (5). Quantile suffixes in the names refer to the default
// configuration.
inline const std::array<std::string, kFeatureCount>& canonical_feature_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> n;
    std::size_t i = 0;
    const char* disp_q[] = {"02", "05", "10", "25"};
    for (const char* stat : {"ratio_mean", "ratio_median", "diff_mean", "diff_median"})
      for (const char* q : disp_q) n[i++] = std::string("disp.") + stat + "_" + q;
    for (const char* q : {"10", "25", "50"}) {
      for (const char* stat : {"mmce_lda", "mmce_qda", "mmce_tree", "ratio_lda_qda",
                               "ratio_lda_tree", "ratio_qda_tree", "mmce_mean"})
        n[i++] = std::string("ela_level.") + stat + "_" + q;
    }
    for (const char* stat :
         {"lin_simple.adj_r2", "lin_simple.intercept", "lin_simple.coef.min",
          "lin_simple.coef.max", "lin_simple.coef.max_by_min", "lin_w_interact.adj_r2",
          "quad_simple.adj_r2", "quad_simple.cond", "quad_w_interact.adj_r2"})
      n[i++] = std::string("ela_meta.") + stat;
    for (const char* stat : {"h_max", "eps_s", "eps_max", "eps_ratio", "m0"})
      n[i++] = std::string("ic.") + stat;
    for (const char* stat : {"nn_nb.sd_ratio", "nn_nb.mean_ratio", "nn_nb.cor",
                             "dist_ratio.coeff_var", "nb_fitness.cor"})
      n[i++] = std::string("nbc.") + stat;
    if (i != kFeatureCount) throw InternalError("canonical_feature_names: bad count");
    return n;
  }();
  return names;
}

inline FeatureGroup feature_group_of(std::size_t index) {
  if (index < 16) return FeatureGroup::Disp;
  if (index < 37) return FeatureGroup::ElaLevel;
  if (index < 46) return FeatureGroup::ElaMeta;
  if (index < 51) return FeatureGroup::Ic;
  if (index < kFeatureCount) return FeatureGroup::Nbc;
  throw ContractError("feature_group_of: index out of range");
}

// The 56-entry landscape representation of one problem instance.
struct FeatureVector {
  int problem_id = 0;
  int instance_id = 0;
  std::array<double, kFeatureCount> values{};

  bool operator==(const FeatureVector&) const = default;
};

}  // namespace perfreg

#pragma once

#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/features/config.hpp"
#include "perfreg/features/dispersion.hpp"
#include "perfreg/features/info_content.hpp"
#include "perfreg/features/level_set.hpp"
#include "perfreg/features/meta_model.hpp"
#include "perfreg/features/nearest_better.hpp"
#include "perfreg/problems.hpp"

namespace perfreg {

// The full 56-entry representation: disp, ela_level, ela_meta, ic, nbc in
// canonical order. Raw values, no normalization. Deterministic for a
// fixed (design set, config); groups raise DegenerateInputError naming
// themselves when the sample cannot support them.
inline FeatureVector compute_features(const DesignSet& ds, const FeatureConfig& cfg) {
  validate_feature_config(cfg);
  if (ds.points.rows != ds.fitness.size())
    throw ContractError("compute_features: points/fitness size mismatch");

  FeatureVector fv;
  fv.problem_id = ds.problem_id;
  fv.instance_id = ds.instance_id;

  std::size_t i = 0;
  const auto append = [&](const std::vector<double>& vals) {
    for (double v : vals) {
      if (i >= kFeatureCount) throw InternalError("compute_features: overflow");
      fv.values[i++] = v;
    }
  };
  append(disp_group(ds, cfg.disp_quantiles));
  append(ela_level_group(ds, cfg.level_quantiles, cfg.seed));
  append(ela_meta_group(ds));
  append(ic_group(ds, cfg.ic_epsilons, cfg.seed));
  append(nbc_group(ds));
  if (i != kFeatureCount)
    throw InternalError("compute_features: produced " + std::to_string(i) + " values");
  for (double v : fv.values)
    if (!std::isfinite(v))
      throw InternalError("compute_features: non-finite feature value");
  return fv;
}

}  // namespace perfreg

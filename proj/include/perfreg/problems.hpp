#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/linalg.hpp"
#include "perfreg/rng.hpp"

namespace perfreg {

struct BenchmarkFunction {
  int function_id = 0;
  std::string name;
  bool separable = false;
  bool multimodal = false;
};

// The 24-function catalog. Base formulas echo the classic benchmark suite
// but are self-contained stand-ins: every base function takes its optimum
// at the origin, so an instance's optimum sits at its shift.
inline const std::vector<BenchmarkFunction>& benchmark_catalog() {
  static const std::vector<BenchmarkFunction> catalog = {
      {1, "Sphere", true, false},
      {2, "Ellipsoidal", true, false},
      {3, "Rastrigin", true, true},
      {4, "Bueche-Rastrigin", true, true},
      {5, "Linear Slope", true, false},
      {6, "Attractive Sector", false, false},
      {7, "Step Ellipsoidal", false, false},
      {8, "Rosenbrock", false, false},
      {9, "Rosenbrock Rotated", false, false},
      {10, "Ellipsoidal High-Conditioned", false, false},
      {11, "Discus", false, false},
      {12, "Bent Cigar", false, false},
      {13, "Sharp Ridge", false, false},
      {14, "Different Powers", false, false},
      {15, "Rastrigin Rotated", false, true},
      {16, "Weierstrass", false, true},
      {17, "Schaffers F7", false, true},
      {18, "Schaffers F7 Ill-Conditioned", false, true},
      {19, "Griewank-Rosenbrock", false, true},
      {20, "Schwefel", false, true},
      {21, "Gallagher 101 Peaks", false, true},
      {22, "Gallagher 21 Peaks", false, true},
      {23, "Katsuura", false, true},
      {24, "Lunacek bi-Rastrigin", false, true},
  };
  return catalog;
}

inline const BenchmarkFunction& catalog_entry(int function_id) {
  const auto& cat = benchmark_catalog();
  if (function_id < 1 || function_id > static_cast<int>(cat.size()))
    throw DataError("unknown benchmark function id " + std::to_string(function_id));
  return cat[static_cast<std::size_t>(function_id - 1)];
}

struct GallagherPeaks {
  RowMatrix centers;  // peaks x dim; peak 0 is the origin
  std::vector<double> heights;
  std::vector<double> widths;
};

struct ProblemInstance {
  int function_id = 0;
  int instance_id = 0;
  int dim = 0;
  std::vector<double> shift;
  std::uint64_t rotation_seed = 0;
  bool rotated = false;
  RowMatrix rotation;  // identity when not rotated
  double lower_bound = -5.0;
  double upper_bound = 5.0;
  std::shared_ptr<const GallagherPeaks> peaks;  // functions 21/22 only
};

namespace detail {

constexpr double kPi = 3.14159265358979323846;

// Exponent helper for conditioning ramps; flat at d = 1.
inline double ramp(int i, int d, double top) {
  return d <= 1 ? 0.0 : top * static_cast<double>(i) / static_cast<double>(d - 1);
}

inline double sq(double v) { return v * v; }

inline double base_sphere(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return s;
}

inline double base_ellipsoid(std::span<const double> z, double top) {
  const int d = static_cast<int>(z.size());
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += std::pow(10.0, ramp(i, d, top)) * sq(z[i]);
  return s;
}

inline double base_rastrigin(std::span<const double> z) {
  const double d = static_cast<double>(z.size());
  double cos_sum = 0.0, sq_sum = 0.0;
  for (double v : z) {
    cos_sum += std::cos(2.0 * kPi * v);
    sq_sum += v * v;
  }
  return 10.0 * (d - cos_sum) + sq_sum;
}

inline double base_bueche(std::span<const double> z) {
  const int d = static_cast<int>(z.size());
  std::vector<double> y(z.size());
  for (int i = 0; i < d; ++i) {
    double s = std::pow(10.0, ramp(i, d, 0.5));
    if (z[i] > 0.0 && i % 2 == 0) s *= std::sqrt(10.0);
    y[static_cast<std::size_t>(i)] = s * z[i];
  }
  return base_rastrigin(y);
}

inline double base_linear_slope(std::span<const double> z) {
  const int d = static_cast<int>(z.size());
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += std::pow(10.0, ramp(i, d, 1.0)) * std::abs(z[i]);
  return s;
}

inline double base_attractive_sector(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) {
    const double scaled = (v > 0.0 ? 100.0 : 1.0) * v;
    s += scaled * scaled;
  }
  return s;
}

inline double base_step_ellipsoid(std::span<const double> z) {
  const int d = static_cast<int>(z.size());
  double s = 0.0, reg = 0.0;
  for (int i = 0; i < d; ++i) {
    const double w = std::floor(0.5 + z[i]);
    s += std::pow(10.0, ramp(i, d, 2.0)) * w * w;
    reg += sq(z[i]);
  }
  return s + 1e-4 * reg;
}

inline double base_rosenbrock(std::span<const double> z, double scale) {
  const std::size_t d = z.size();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < std::max<std::size_t>(d, 2); ++i) {
    const double a = scale * z[i] + 1.0;
    const double b = scale * z[(i + 1) % d] + 1.0;
    s += 100.0 * sq(a * a - b) + sq(a - 1.0);
  }
  return s;
}

inline double base_discus(std::span<const double> z) {
  double s = 1e6 * sq(z[0]);
  for (std::size_t i = 1; i < z.size(); ++i) s += sq(z[i]);
  return s;
}

inline double base_bent_cigar(std::span<const double> z) {
  double s = sq(z[0]);
  for (std::size_t i = 1; i < z.size(); ++i) s += 1e6 * sq(z[i]);
  return s;
}

inline double base_sharp_ridge(std::span<const double> z) {
  double tail = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) tail += sq(z[i]);
  return sq(z[0]) + 100.0 * std::sqrt(tail);
}

inline double base_different_powers(std::span<const double> z) {
  const int d = static_cast<int>(z.size());
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    s += std::pow(std::abs(z[i]), 2.0 + ramp(i, d, 4.0));
  return std::sqrt(s);
}

inline double base_weierstrass(std::span<const double> z) {
  constexpr int kTerms = 12;
  constexpr double kA = 0.5;
  constexpr double kB = 3.0;
  double w0 = 0.0, ak = 1.0, bk = 1.0;
  for (int k = 0; k < kTerms; ++k) {
    w0 += ak * std::cos(kPi * bk);
    ak *= kA;
    bk *= kB;
  }
  double s = 0.0;
  for (double v : z) {
    ak = 1.0;
    bk = 1.0;
    for (int k = 0; k < kTerms; ++k) {
      s += ak * std::cos(2.0 * kPi * bk * (v + 0.5));
      ak *= kA;
      bk *= kB;
    }
  }
  return s - static_cast<double>(z.size()) * w0;
}

inline double base_schaffers(std::span<const double> z, double cond_top) {
  const int d = static_cast<int>(z.size());
  std::vector<double> y(z.size());
  for (int i = 0; i < d; ++i)
    y[static_cast<std::size_t>(i)] = std::pow(10.0, ramp(i, d, cond_top)) * z[i];
  const std::size_t pairs = std::max<std::size_t>(z.size() - 1, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double si = std::sqrt(sq(y[i]) + sq(y[(i + 1) % y.size()]));
    const double root = std::sqrt(si);
    s += root + root * sq(std::sin(50.0 * std::pow(si, 0.2)));
  }
  s /= static_cast<double>(pairs);
  return s * s;
}

inline double base_griewank_rosenbrock(std::span<const double> z) {
  const std::size_t d = z.size();
  const std::size_t pairs = std::max<std::size_t>(d - 1, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double a = z[i] + 1.0;
    const double b = z[(i + 1) % d] + 1.0;
    const double si = 100.0 * sq(a * a - b) + sq(a - 1.0);
    s += si / 4000.0 - std::cos(si);
  }
  return s / static_cast<double>(pairs) + 1.0;
}

inline double base_schwefel(std::span<const double> z) {
  constexpr double kOpt = 420.968746227503674;
  double s = 0.0;
  for (double v : z) {
    const double t = v + kOpt;
    s += t * std::sin(std::sqrt(std::abs(t)));
  }
  return 418.9828872724339 * static_cast<double>(z.size()) - s;
}

inline double base_gallagher(std::span<const double> z, const GallagherPeaks& peaks) {
  const double d = static_cast<double>(z.size());
  double best = 0.0;
  for (std::size_t k = 0; k < peaks.heights.size(); ++k) {
    double dist2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      dist2 += sq(z[i] - peaks.centers.at(k, i));
    const double v = peaks.heights[k] *
                     std::exp(-dist2 / (2.0 * d * sq(peaks.widths[k])));
    best = std::max(best, v);
  }
  return 10.0 - best;
}

inline double base_katsuura(std::span<const double> z) {
  const double d = static_cast<double>(z.size());
  const double expo = 10.0 / std::pow(d, 1.2);
  double prod = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double inner = 0.0, p2 = 2.0;
    for (int j = 1; j <= 32; ++j) {
      const double t = p2 * z[i];
      inner += std::abs(t - std::round(t)) / p2;
      p2 *= 2.0;
    }
    prod *= std::pow(1.0 + static_cast<double>(i + 1) * inner, expo);
  }
  return 10.0 / (d * d) * (prod - 1.0);
}

inline double base_lunacek(std::span<const double> z) {
  const double d = static_cast<double>(z.size());
  double s1 = 0.0, s2 = 0.0, cos_sum = 0.0;
  for (double v : z) {
    s1 += v * v;
    s2 += sq(v - 3.0);
    cos_sum += std::cos(2.0 * kPi * v);
  }
  return std::min(s1, 2.0 * d + 0.9 * s2) + 10.0 * (d - cos_sum);
}

inline std::shared_ptr<const GallagherPeaks> make_gallagher_peaks(int function_id,
                                                                  int dim) {
  const std::size_t count = function_id == 21 ? 101 : 21;
  auto peaks = std::make_shared<GallagherPeaks>();
  peaks->centers = RowMatrix(count, static_cast<std::size_t>(dim));
  peaks->heights.resize(count);
  peaks->widths.resize(count);
  peaks->heights[0] = 10.0;
  peaks->widths[0] = 1.0;
  Rng rng(mix_seed(0x67616c6cULL, static_cast<std::uint64_t>(function_id),
                   static_cast<std::uint64_t>(dim)));
  for (std::size_t k = 1; k < count; ++k) {
    for (int i = 0; i < dim; ++i)
      peaks->centers.at(k, static_cast<std::size_t>(i)) = rng.uniform(-4.5, 4.5);
    peaks->heights[k] = rng.uniform(1.0, 9.5);
    peaks->widths[k] = rng.uniform(0.4, 2.4);
  }
  return peaks;
}

}  // namespace detail

inline double base_value(const ProblemInstance& inst, std::span<const double> z) {
  using namespace detail;
  switch (inst.function_id) {
    case 1: return base_sphere(z);
    case 2: return base_ellipsoid(z, 6.0);
    case 3: return base_rastrigin(z);
    case 4: return base_bueche(z);
    case 5: return base_linear_slope(z);
    case 6: return base_attractive_sector(z);
    case 7: return base_step_ellipsoid(z);
    case 8: return base_rosenbrock(z, 1.0);
    case 9: return base_rosenbrock(z, std::max(1.0, std::sqrt(static_cast<double>(z.size())) / 8.0));
    case 10: return base_ellipsoid(z, 6.0);
    case 11: return base_discus(z);
    case 12: return base_bent_cigar(z);
    case 13: return base_sharp_ridge(z);
    case 14: return base_different_powers(z);
    case 15: return base_rastrigin(z);
    case 16: return base_weierstrass(z);
    case 17: return base_schaffers(z, 0.0);
    case 18: return base_schaffers(z, 1.5);
    case 19: return base_griewank_rosenbrock(z);
    case 20: return base_schwefel(z);
    case 21:
    case 22: return base_gallagher(z, *inst.peaks);
    case 23: return base_katsuura(z);
    case 24: return base_lunacek(z);
    default:
      throw DataError("unknown benchmark function id " + std::to_string(inst.function_id));
  }
}

// Builds a problem instance. The shift and rotation are derived
// deterministically from (function_id, instance_id, dim); instance 0 is
// the untransformed base function. Separable functions are never rotated.
inline ProblemInstance instantiate(int function_id, int instance_id, int dim) {
  const BenchmarkFunction& fn = catalog_entry(function_id);
  if (instance_id < 0) throw ContractError("instantiate: instance_id must be >= 0");
  if (dim < 1) throw ContractError("instantiate: dim must be >= 1");

  ProblemInstance inst;
  inst.function_id = function_id;
  inst.instance_id = instance_id;
  inst.dim = dim;
  inst.shift.assign(static_cast<std::size_t>(dim), 0.0);

  const std::uint64_t h = mix_seed(0x70657266ULL, static_cast<std::uint64_t>(function_id),
                                   static_cast<std::uint64_t>(instance_id),
                                   static_cast<std::uint64_t>(dim));
  inst.rotation_seed = mix_seed(h, 0x726f74ULL);
  if (instance_id > 0) {
    Rng rng(h);
    // Optimum strictly inside the box.
    for (double& s : inst.shift) s = rng.uniform(-4.0, 4.0);
  }
  inst.rotated = instance_id > 0 && !fn.separable;
  inst.rotation = inst.rotated ? random_rotation(inst.rotation_seed, static_cast<std::size_t>(dim))
                               : identity_matrix(static_cast<std::size_t>(dim));
  if (function_id == 21 || function_id == 22)
    inst.peaks = detail::make_gallagher_peaks(function_id, dim);
  return inst;
}

inline double evaluate(const ProblemInstance& inst, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(inst.dim))
    throw ContractError("evaluate: point dimension does not match instance");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - inst.shift[i];
  if (inst.rotated) z = mat_vec(inst.rotation, z);
  return base_value(inst, z);
}

// Objective value at the instance optimum (the shift).
inline double instance_optimum(const ProblemInstance& inst) {
  return evaluate(inst, inst.shift);
}

struct DesignSet {
  int problem_id = 0;
  int instance_id = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  RowMatrix points;  // n x dim
  std::vector<double> fitness;
};

// n = budget_multiplier * dim points, i.i.d. uniform over the box.
inline DesignSet uniform_sample(const ProblemInstance& inst, int budget_multiplier,
                                std::uint64_t seed) {
  if (budget_multiplier < 1)
    throw ContractError("uniform_sample: budget_multiplier must be >= 1");
  const std::size_t n =
      static_cast<std::size_t>(budget_multiplier) * static_cast<std::size_t>(inst.dim);
  DesignSet ds;
  ds.problem_id = inst.function_id;
  ds.instance_id = inst.instance_id;
  ds.dim = inst.dim;
  ds.seed = seed;
  ds.points = RowMatrix(n, static_cast<std::size_t>(inst.dim));
  ds.fitness.resize(n);
  Rng rng(seed);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < ds.points.cols; ++c)
      ds.points.at(r, c) = rng.uniform(inst.lower_bound, inst.upper_bound);
  for (std::size_t r = 0; r < n; ++r) {
    ds.fitness[r] = evaluate(inst, ds.points.row(r));
    if (!std::isfinite(ds.fitness[r]))
      throw InternalError("uniform_sample: non-finite fitness value");
  }
  return ds;
}

}  // namespace perfreg

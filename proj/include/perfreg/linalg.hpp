#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "perfreg/errors.hpp"
#include "perfreg/rng.hpp"

namespace perfreg {

// Dense row-major matrix; the one numeric container shared across modules.
struct RowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RowMatrix() = default;
  RowMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> row(std::size_t r) {
    return {data.data() + r * cols, cols};
  }

  bool operator==(const RowMatrix&) const = default;
};

inline std::vector<double> mat_vec(const RowMatrix& m, std::span<const double> v) {
  if (v.size() != m.cols) throw ContractError("mat_vec: dimension mismatch");
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double s = 0.0;
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * v[c];
    out[r] = s;
  }
  return out;
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Throws DegenerateInputError when a pivot falls below tolerance.
inline std::vector<double> solve_linear_system(RowMatrix a, std::vector<double> b,
                                               const char* what = "linear system") {
  const std::size_t n = a.rows;
  if (a.cols != n || b.size() != n)
    throw ContractError("solve_linear_system: non-square system");
  double scale = 0.0;
  for (double v : a.data) scale = std::max(scale, std::abs(v));
  const double tol = std::max(scale, 1.0) * 1e-13;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a.at(r, k)) > std::abs(a.at(piv, k))) piv = r;
    if (std::abs(a.at(piv, k)) <= tol)
      throw DegenerateInputError(std::string("singular ") + what);
    if (piv != k) {
      for (std::size_t c = k; c < n; ++c) std::swap(a.at(piv, c), a.at(k, c));
      std::swap(b[piv], b[k]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a.at(r, k) / a.at(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) a.at(r, c) -= f * a.at(k, c);
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a.at(ri, c) * x[c];
    x[ri] = s / a.at(ri, ri);
  }
  return x;
}

// log(det(A)) together with A^{-1} b solves, via LU with partial pivoting.
// Returns false when A is numerically singular.
struct LuDecomposition {
  RowMatrix lu;
  std::vector<std::size_t> perm;
  double log_abs_det = 0.0;
  bool ok = false;
};

inline LuDecomposition lu_decompose(RowMatrix a) {
  const std::size_t n = a.rows;
  LuDecomposition d;
  d.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.perm[i] = i;
  double scale = 0.0;
  for (double v : a.data) scale = std::max(scale, std::abs(v));
  const double tol = std::max(scale, 1e-30) * 1e-15;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a.at(r, k)) > std::abs(a.at(piv, k))) piv = r;
    if (std::abs(a.at(piv, k)) <= tol) return d;
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a.at(piv, c), a.at(k, c));
      std::swap(d.perm[piv], d.perm[k]);
    }
    d.log_abs_det += std::log(std::abs(a.at(k, k)));
    for (std::size_t r = k + 1; r < n; ++r) {
      a.at(r, k) /= a.at(k, k);
      const double f = a.at(r, k);
      if (f == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) a.at(r, c) -= f * a.at(k, c);
    }
  }
  d.lu = std::move(a);
  d.ok = true;
  return d;
}

inline std::vector<double> lu_solve(const LuDecomposition& d, std::span<const double> b) {
  const std::size_t n = d.perm.size();
  if (!d.ok) throw DegenerateInputError("lu_solve: singular matrix");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[d.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= d.lu.at(i, j) * x[j];
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= d.lu.at(ii, j) * x[j];
    x[ii] /= d.lu.at(ii, ii);
  }
  return x;
}

// Random orthogonal matrix: modified Gram-Schmidt on a seeded Gaussian
// matrix, with one re-orthogonalization pass.
inline RowMatrix random_rotation(std::uint64_t seed, std::size_t dim) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    RowMatrix q(dim, dim);
    for (double& v : q.data) v = rng.normal();
    bool degenerate = false;
    for (std::size_t c = 0; c < dim && !degenerate; ++c) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t prev = 0; prev < c; ++prev) {
          double dot = 0.0;
          for (std::size_t r = 0; r < dim; ++r) dot += q.at(r, c) * q.at(r, prev);
          for (std::size_t r = 0; r < dim; ++r) q.at(r, c) -= dot * q.at(r, prev);
        }
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < dim; ++r) norm += q.at(r, c) * q.at(r, c);
      norm = std::sqrt(norm);
      if (norm < 1e-8) {
        degenerate = true;
        break;
      }
      for (std::size_t r = 0; r < dim; ++r) q.at(r, c) /= norm;
    }
    if (!degenerate) return q;
  }
  throw InternalError("random_rotation: could not orthogonalize");
}

inline RowMatrix identity_matrix(std::size_t dim) {
  RowMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

}  // namespace perfreg

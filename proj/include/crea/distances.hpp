#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "crea/concept.hpp"
#include "crea/error.hpp"

namespace crea {

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
}

inline double squared_norm(std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s += x * x;
  return s;
}

}  // namespace detail

/// l2 norm of u - v.
inline double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  detail::require_same_dim(u.size(), v.size(), "euclidean_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// 1 - cos(u, v), clamped into [0, 2].
///
/// Zero vectors have no direction. Against a nonzero vector the distance is 1
/// (similarity 0); two zero vectors are at distance 0.
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
  detail::require_same_dim(u.size(), v.size(), "cosine_distance");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  const double nu = std::sqrt(detail::squared_norm(u));
  const double nv = std::sqrt(detail::squared_norm(v));
  const bool zu = nu == 0.0;
  const bool zv = nv == 0.0;
  if (zu && zv) return 0.0;
  if (zu || zv) return 1.0;
  const double sim = std::clamp(dot / (nu * nv), -1.0, 1.0);
  return std::clamp(1.0 - sim, 0.0, 2.0);
}

/// Copy of m with zero rows appended up to `rows` rows.
inline Matrix pad_rows(const Matrix& m, std::size_t rows) {
  if (rows < m.rows) throw InvalidArgument("pad_rows: target shorter than matrix");
  Matrix out(rows, m.cols, 0.0);
  std::copy(m.data.begin(), m.data.end(), out.data.begin());
  return out;
}

/// Euclidean distance between two feature matrices after zero-padding the
/// shorter one at the end. Feature dimensions must agree.
inline double matrix_distance(const Matrix& a, const Matrix& b) {
  detail::require_same_dim(a.cols, b.cols, "matrix_distance");
  const Matrix& longer = a.rows >= b.rows ? a : b;
  const Matrix& shorter = a.rows >= b.rows ? b : a;
  const std::size_t overlap = shorter.data.size();
  double s = 0.0;
  for (std::size_t i = 0; i < overlap; ++i) {
    const double d = longer.data[i] - shorter.data[i];
    s += d * d;
  }
  for (std::size_t i = overlap; i < longer.data.size(); ++i) s += longer.data[i] * longer.data[i];
  return std::sqrt(s);
}

/// Frobenius norm, i.e. the distance to the all-zero matrix.
inline double frobenius_norm(const Matrix& m) { return std::sqrt(detail::squared_norm(m.data)); }

}  // namespace crea

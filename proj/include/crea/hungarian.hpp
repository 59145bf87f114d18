#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "crea/concept.hpp"
#include "crea/error.hpp"

namespace crea {

struct Assignment {
  /// (row, col) pairs of the padded square problem, sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;
};

/// Minimum-cost perfect matching (Kuhn-Munkres with row/column potentials,
/// O(n^3)). Rectangular inputs are padded to a square with zero entries, so
/// the assignment covers max(rows, cols) rows and columns.
inline Assignment hungarian(const Matrix& cost) {
  for (double c : cost.data)
    if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("hungarian: cost entries must be finite and non-negative");

  const std::size_t n = std::max(cost.rows, cost.cols);
  Assignment result;
  if (n == 0) return result;

  auto at = [&](std::size_t r, std::size_t c) {
    return (r < cost.rows && c < cost.cols) ? cost(r, c) : 0.0;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual start column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = at(r0 - 1, c - 1) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  result.pairs.resize(n);
  for (std::size_t c = 1; c <= n; ++c) result.pairs[match[c] - 1] = {match[c] - 1, c - 1};
  for (const auto& [r, c] : result.pairs) result.total += at(r, c);
  return result;
}

}  // namespace crea

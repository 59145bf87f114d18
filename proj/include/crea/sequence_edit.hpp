#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "crea/concept.hpp"
#include "crea/metric.hpp"

namespace crea {

/// Order-preserving alignment cost between two sequences (weighted
/// Levenshtein). `cost` follows the same null-pointer convention as
/// tree_edit_distance.
template <class T, class Cost>
double sequence_edit_distance(std::span<const T> a, std::span<const T> b, Cost&& cost) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1] + cost(nullptr, &b[j - 1]);
  for (std::size_t i = 1; i <= n; ++i) {
    const double del = cost(&a[i - 1], nullptr);
    cur[0] = prev[0] + del;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j] + del, cur[j - 1] + cost(nullptr, &b[j - 1]),
                         prev[j - 1] + cost(&a[i - 1], &b[j - 1])});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline double sequence_edit_distance(std::span<const Concept> a, std::span<const Concept> b,
                                     const DistanceMetric& metric) {
  return sequence_edit_distance(a, b, concept_cost(metric));
}

}  // namespace crea

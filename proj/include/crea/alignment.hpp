#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "crea/concept.hpp"
#include "crea/hungarian.hpp"
#include "crea/metric.hpp"

namespace crea {

/// One aligned pair; an empty side means the nullconcept.
struct AlignedPair {
  std::optional<std::size_t> left;
  std::optional<std::size_t> right;

  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct Alignment {
  std::vector<AlignedPair> pairs;
  double cost = 0.0;
};

/// Cost of an explicit alignment.
template <class T, class Cost>
double alignment_cost(std::span<const T> s, std::span<const T> t, const std::vector<AlignedPair>& pairs, Cost&& cost) {
  double total = 0.0;
  for (const auto& p : pairs) {
    const T* x = p.left ? &s[*p.left] : nullptr;
    const T* y = p.right ? &t[*p.right] : nullptr;
    if (x == nullptr && y == nullptr) continue;
    total += cost(x, y);
  }
  return total;
}

/// Cheapest alignment between two concept multisets, nullconcept pairings
/// allowed. Reduced to an (n+m) x (n+m) assignment problem: the upper-right
/// block prices x -> 0, the lower-left 0 -> y, the lower-right 0 -> 0 (free).
template <class T, class Cost>
Alignment align(std::span<const T> s, std::span<const T> t, Cost&& cost) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  const std::size_t size = n + m;
  Matrix c(size, size, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) c(i, j) = cost(&s[i], &t[j]);
    const double del = cost(&s[i], nullptr);
    for (std::size_t k = 0; k < n; ++k) c(i, m + k) = del;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double ins = cost(nullptr, &t[j]);
    for (std::size_t k = 0; k < m; ++k) c(n + k, j) = ins;
  }

  const Assignment a = hungarian(c);
  Alignment out;
  for (const auto& [r, col] : a.pairs) {
    AlignedPair p;
    if (r < n) p.left = r;
    if (col < m) p.right = col;
    if (!p.left && !p.right) continue;
    out.pairs.push_back(p);
  }
  out.cost = a.total;
  return out;
}

/// Alignment distance between products under a concept metric.
inline Alignment alignment_distance(const Product& s, const Product& t, const DistanceMetric& metric) {
  return align(std::span<const Concept>(s.concepts()), std::span<const Concept>(t.concepts()), concept_cost(metric));
}

}  // namespace crea

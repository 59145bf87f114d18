#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crea/alignment.hpp"
#include "crea/concept.hpp"
#include "crea/error.hpp"
#include "crea/metric.hpp"

namespace crea {

/// How two products are compared for originality.
enum class ProductDistance {
  alignment,      ///< cheapest alignment with nullconcept pairings
  mean_pairwise,  ///< mean concept distance over all cross pairs
  tree_3step,     ///< stage TED + sprite TEDs matched by assignment (Scratch code only)
};

struct MeasureConfig {
  bool squared = false;
  bool dedup = false;
  ProductDistance product_distance = ProductDistance::alignment;

  static MeasureConfig code() { return {true, true, ProductDistance::tree_3step}; }
  static MeasureConfig visual() { return {false, true, ProductDistance::mean_pairwise}; }
  static MeasureConfig audio() { return {false, true, ProductDistance::mean_pairwise}; }
};

/// The nine automatic features of a project.
struct CreativityVector {
  double code_fluency = 0.0;
  double code_flexibility = 0.0;
  double code_originality = 0.0;
  double visual_fluency = 0.0;
  double visual_flexibility = 0.0;
  double visual_originality = 0.0;
  double audio_fluency = 0.0;
  double audio_flexibility = 0.0;
  double audio_originality = 0.0;

  static constexpr std::array<const char*, 9> names{
      "code_fluency",   "code_flexibility",   "code_originality",  "visual_fluency",   "visual_flexibility",
      "visual_originality", "audio_fluency", "audio_flexibility", "audio_originality"};

  std::array<double, 9> values() const {
    return {code_fluency,       code_flexibility, code_originality,  visual_fluency,   visual_flexibility,
            visual_originality, audio_fluency,    audio_flexibility, audio_originality};
  }

  bool valid() const {
    for (double v : values())
      if (!std::isfinite(v) || v < 0.0) return false;
    return true;
  }
};

namespace detail {

inline double maybe_square(double d, bool squared) { return squared ? d * d : d; }

}  // namespace detail

/// Sum of distances to the nullconcept; duplicates count.
template <class T, class Cost>
double fluency(std::span<const T> concepts, Cost&& cost, bool squared) {
  double s = 0.0;
  for (const auto& x : concepts) s += detail::maybe_square(cost(&x, nullptr), squared);
  return s;
}

/// First occurrences of each distinct payload, in input order.
template <class T>
std::vector<T> distinct(std::span<const T> concepts) {
  std::vector<T> out;
  for (const auto& x : concepts) {
    bool seen = false;
    for (const auto& y : out)
      if (y == x) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(x);
  }
  return out;
}

struct FlexibilityTerms {
  double sum = 0.0;        ///< sum over all ordered pairs of the (squared) distance
  std::size_t count = 0;   ///< number of concepts after optional dedup

  /// sum / (count - 1); zero when at most one concept remains.
  double value() const { return count <= 1 ? 0.0 : sum / static_cast<double>(count - 1); }
};

template <class T, class Cost>
FlexibilityTerms flexibility_terms(std::span<const T> concepts, Cost&& cost, bool squared, bool dedup) {
  std::vector<T> unique;
  std::span<const T> w = concepts;
  if (dedup) {
    unique = distinct(concepts);
    w = unique;
  }
  FlexibilityTerms terms;
  terms.count = w.size();
  double half = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j) half += detail::maybe_square(cost(&w[i], &w[j]), squared);
  terms.sum = 2.0 * half;
  return terms;
}

template <class T, class Cost>
double flexibility(std::span<const T> concepts, Cost&& cost, bool squared, bool dedup) {
  return flexibility_terms(concepts, cost, squared, dedup).value();
}

/// Mean concept distance over all cross pairs. An empty side stands for the
/// nullconcept alone.
template <class T, class Cost>
double mean_pairwise_distance(std::span<const T> a, std::span<const T> b, Cost&& cost, bool squared) {
  if (a.empty() && b.empty()) return 0.0;
  double s = 0.0;
  if (a.empty() || b.empty()) {
    const bool left = b.empty();
    for (const auto& x : left ? a : b) s += detail::maybe_square(left ? cost(&x, nullptr) : cost(nullptr, &x), squared);
    return s / static_cast<double>(left ? a.size() : b.size());
  }
  for (const auto& x : a)
    for (const auto& y : b) s += detail::maybe_square(cost(&x, &y), squared);
  return s / static_cast<double>(a.size() * b.size());
}

/// Mean product distance to a reference sample.
template <class P, class Dist>
  requires std::invocable<Dist&, const P&, const P&>
double originality(const P& s, std::span<const P> sample, Dist&& dist) {
  if (sample.empty()) throw InvalidArgument("originality needs a reference sample");
  double total = 0.0;
  for (const auto& ref : sample) total += dist(s, ref);
  return total / static_cast<double>(sample.size());
}

// --- Product / DistanceMetric entry points ---------------------------------

inline auto squared_concept_cost(const DistanceMetric& metric, bool squared) {
  return [&metric, squared](const Concept* x, const Concept* y) {
    return detail::maybe_square(metric(x ? *x : Concept::null(), y ? *y : Concept::null()), squared);
  };
}

inline double fluency(const Product& s, const DistanceMetric& metric, const MeasureConfig& cfg = {}) {
  return fluency(std::span<const Concept>(s.concepts()), concept_cost(metric), cfg.squared);
}

inline double flexibility(const Product& s, const DistanceMetric& metric, const MeasureConfig& cfg = {}) {
  return flexibility(std::span<const Concept>(s.concepts()), concept_cost(metric), cfg.squared, cfg.dedup);
}

/// Distance between two products as selected by `cfg.product_distance`.
/// Squaring, when enabled, applies to every concept-level distance.
inline double product_distance(const Product& s, const Product& t, const DistanceMetric& metric,
                               const MeasureConfig& cfg) {
  const std::span<const Concept> a(s.concepts());
  const std::span<const Concept> b(t.concepts());
  switch (cfg.product_distance) {
    case ProductDistance::alignment:
      return align(a, b, squared_concept_cost(metric, cfg.squared)).cost;
    case ProductDistance::mean_pairwise:
      return mean_pairwise_distance(a, b, concept_cost(metric), cfg.squared);
    case ProductDistance::tree_3step:
      break;
  }
  throw InvalidArgument("tree_3step product distance applies to Scratch projects only");
}

inline double originality(const Product& s, const std::vector<Product>& sample, const DistanceMetric& metric,
                          const MeasureConfig& cfg = {}) {
  return originality(s, std::span<const Product>(sample),
                     [&](const Product& a, const Product& b) { return product_distance(a, b, metric, cfg); });
}

}  // namespace crea

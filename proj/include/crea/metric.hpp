#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "crea/concept.hpp"
#include "crea/distances.hpp"
#include "crea/error.hpp"
#include "crea/semantic_network.hpp"

namespace crea {

/// A distance between concepts of one space, including the nullconcept.
///
/// `pseudo` declares that identity of indiscernibles may fail, i.e. distinct
/// concepts can be at distance zero (cosine on parallel vectors).
class DistanceMetric {
 public:
  using Fn = std::function<double(const Concept&, const Concept&)>;

  DistanceMetric(Fn fn, bool pseudo = false, std::string name = "custom")
      : fn_(std::move(fn)), pseudo_(pseudo), name_(std::move(name)) {}

  double operator()(const Concept& x, const Concept& y) const { return fn_(x, y); }

  bool pseudo() const noexcept { return pseudo_; }
  const std::string& name() const noexcept { return name_; }

 private:
  Fn fn_;
  bool pseudo_;
  std::string name_;
};

namespace detail {

inline const std::vector<double>& vector_payload(const Concept& c, const char* metric) {
  if (const auto* v = c.as_vector()) return *v;
  throw InvalidArgument(std::string(metric) + ": concept '" + c.id + "' has no vector payload");
}

inline const Matrix& matrix_payload(const Concept& c, const char* metric) {
  if (const auto* m = c.as_matrix()) return *m;
  throw InvalidArgument(std::string(metric) + ": concept '" + c.id + "' has no matrix payload");
}

template <class Dist>
double vector_metric_eval(const Concept& x, const Concept& y, const char* name, Dist dist) {
  if (x.is_null && y.is_null) return 0.0;
  if (x.is_null || y.is_null) {
    const auto& v = vector_payload(x.is_null ? y : x, name);
    const std::vector<double> zero(v.size(), 0.0);
    return dist(v, zero);
  }
  return dist(vector_payload(x, name), vector_payload(y, name));
}

}  // namespace detail

/// Shortest-path metric over a semantic network. Symbolic concepts name
/// network nodes; the nullconcept maps to the network's null node.
inline DistanceMetric network_metric(std::shared_ptr<const SemanticNetwork> net) {
  return DistanceMetric(
      [net = std::move(net)](const Concept& x, const Concept& y) {
        auto node = [&](const Concept& c) -> const std::string& {
          if (c.is_null) return net->null_id();
          if (const auto* s = c.as_symbol()) return *s;
          throw InvalidArgument("network metric: concept '" + c.id + "' is not symbolic");
        };
        return net->distance(node(x), node(y));
      },
      false, "network");
}

/// Euclidean distance; the nullconcept is the zero vector.
inline DistanceMetric euclidean_metric() {
  return DistanceMetric(
      [](const Concept& x, const Concept& y) {
        return detail::vector_metric_eval(x, y, "euclidean",
                                          [](const auto& u, const auto& v) { return euclidean_distance(u, v); });
      },
      false, "euclidean");
}

/// Cosine distance; the nullconcept is the zero vector. Pseudo-metric.
inline DistanceMetric cosine_metric() {
  return DistanceMetric(
      [](const Concept& x, const Concept& y) {
        return detail::vector_metric_eval(x, y, "cosine",
                                          [](const auto& u, const auto& v) { return cosine_distance(u, v); });
      },
      true, "cosine");
}

/// Padded matrix distance; the nullconcept is an all-zero matrix.
inline DistanceMetric matrix_metric() {
  return DistanceMetric(
      [](const Concept& x, const Concept& y) {
        if (x.is_null && y.is_null) return 0.0;
        if (x.is_null || y.is_null) return frobenius_norm(detail::matrix_payload(x.is_null ? y : x, "matrix"));
        return matrix_distance(detail::matrix_payload(x, "matrix"), detail::matrix_payload(y, "matrix"));
      },
      false, "matrix");
}

/// Discrete metric: 0 for equal payloads, 1 otherwise (nullconcept included).
inline DistanceMetric discrete_metric() {
  return DistanceMetric([](const Concept& x, const Concept& y) { return x == y ? 0.0 : 1.0; }, false, "discrete");
}

/// Adapts a metric to the pointer-based cost signature used by the edit and
/// alignment algorithms, where nullptr stands for the nullconcept.
inline auto concept_cost(const DistanceMetric& metric) {
  return [&metric](const Concept* x, const Concept* y) {
    return metric(x ? *x : Concept::null(), y ? *y : Concept::null());
  };
}

struct AxiomViolation {
  enum class Kind { negative, asymmetric, nonzero_self, indiscernible };
  Kind kind;
  std::size_t i;
  std::size_t j;
  double value;
};

inline const char* to_string(AxiomViolation::Kind k) {
  switch (k) {
    case AxiomViolation::Kind::negative: return "negative";
    case AxiomViolation::Kind::asymmetric: return "asymmetric";
    case AxiomViolation::Kind::nonzero_self: return "nonzero-self-distance";
    case AxiomViolation::Kind::indiscernible: return "identity-of-indiscernibles";
  }
  return "?";
}

struct AxiomReport {
  std::size_t pairs_checked = 0;
  std::vector<AxiomViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Checks non-negativity, symmetry and zero self-distance over all ordered
/// pairs of `sample`; for non-pseudo metrics also that distance zero implies
/// equal payloads. Violations are collected, never thrown.
inline AxiomReport check_metric_axioms(const DistanceMetric& metric, const std::vector<Concept>& sample,
                                       double tol = 1e-12) {
  if (sample.empty()) throw InvalidArgument("check_metric_axioms: empty sample");
  AxiomReport report;
  using K = AxiomViolation::Kind;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    for (std::size_t j = i; j < sample.size(); ++j) {
      ++report.pairs_checked;
      const double dij = metric(sample[i], sample[j]);
      if (i == j) {
        if (!(std::abs(dij) <= tol)) report.violations.push_back({K::nonzero_self, i, j, dij});
        continue;
      }
      const double dji = metric(sample[j], sample[i]);
      if (!(dij >= -tol)) report.violations.push_back({K::negative, i, j, dij});
      if (!(dji >= -tol)) report.violations.push_back({K::negative, j, i, dji});
      if (!(std::abs(dij - dji) <= tol)) report.violations.push_back({K::asymmetric, i, j, dij - dji});
      if (!metric.pseudo() && std::abs(dij) <= tol && !(sample[i] == sample[j]))
        report.violations.push_back({K::indiscernible, i, j, dij});
    }
  }
  return report;
}

}  // namespace crea

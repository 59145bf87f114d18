#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "crea/error.hpp"

namespace crea {

/// Dense row-major matrix of doubles. Rows are time steps, columns features.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows_in) {
    Matrix m;
    m.rows = rows_in.size();
    m.cols = rows_in.empty() ? 0 : rows_in.front().size();
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : rows_in) {
      if (row.size() != m.cols) throw InvalidArgument("ragged matrix rows");
      m.data.insert(m.data.end(), row.begin(), row.end());
    }
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool empty() const noexcept { return data.empty(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline bool all_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Element of a concept space. Concepts are compared by payload, never by id.
struct Concept {
  using Payload = std::variant<std::monostate, std::string, std::vector<double>, Matrix>;

  std::string id;
  Payload payload;
  bool is_null = false;

  /// The neutral nullconcept 0.
  static const Concept& null() {
    static const Concept zero{"0", std::monostate{}, true};
    return zero;
  }

  static Concept symbol(std::string label) {
    Concept c;
    c.id = label;
    c.payload = std::move(label);
    return c;
  }

  static Concept vector(std::string id, std::vector<double> v) {
    if (!all_finite(v)) throw InvalidArgument("non-finite vector payload in concept " + id);
    return Concept{std::move(id), std::move(v), false};
  }

  static Concept matrix(std::string id, Matrix m) {
    if (!all_finite(m.data)) throw InvalidArgument("non-finite matrix payload in concept " + id);
    return Concept{std::move(id), std::move(m), false};
  }

  const std::string* as_symbol() const { return std::get_if<std::string>(&payload); }
  const std::vector<double>* as_vector() const { return std::get_if<std::vector<double>>(&payload); }
  const Matrix* as_matrix() const { return std::get_if<Matrix>(&payload); }

  /// Payload equality (the dedup notion of sameness).
  friend bool operator==(const Concept& a, const Concept& b) {
    return a.is_null == b.is_null && a.payload == b.payload;
  }
};

/// A creative product: a graph over (possibly repeated) concepts.
class Product {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  Product() = default;

  explicit Product(std::vector<Concept> concepts, std::vector<Edge> edges = {})
      : concepts_(std::move(concepts)), edges_(std::move(edges)) {
    for (const auto& [a, b] : edges_) {
      if (a >= concepts_.size() || b >= concepts_.size())
        throw InvalidArgument("product edge index out of range");
      if (concepts_[a].is_null || concepts_[b].is_null)
        throw InvalidArgument("product edge touches the nullconcept");
    }
  }

  const std::vector<Concept>& concepts() const noexcept { return concepts_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return concepts_.size(); }
  bool empty() const noexcept { return concepts_.empty(); }

 private:
  std::vector<Concept> concepts_;
  std::vector<Edge> edges_;
};

}  // namespace crea

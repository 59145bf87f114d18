#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "crea/concept.hpp"
#include "crea/metric.hpp"

namespace crea {

/// Ordered, labeled tree. Children order is significant.
template <class Label>
struct Tree {
  Label label;
  std::vector<Tree> children;

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.size();
    return n;
  }

  template <class Fn>
  void for_each_preorder(Fn&& fn) const {
    fn(label);
    for (const auto& c : children) c.for_each_preorder(fn);
  }
};

using LabeledTree = Tree<Concept>;

/// Postorder view of a tree or forest used by the Zhang-Shasha recursion.
/// A forest gets a virtual root whose label pointer is null; it behaves like
/// the nullconcept, so matching, deleting or inserting it is free.
template <class Label>
class PostorderTree {
 public:
  PostorderTree() = default;

  explicit PostorderTree(const Tree<Label>& t) {
    visit(t);
    finish();
  }

  explicit PostorderTree(std::span<const Tree<Label>> forest) {
    if (!forest.empty()) {
      for (const auto& t : forest) visit(t);
      // virtual root: leftmost leaf is the forest's first node
      labels_.push_back(nullptr);
      leftmost_.push_back(0);
    }
    finish();
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const Label* label(std::size_t i) const { return labels_[i]; }
  std::size_t leftmost(std::size_t i) const { return leftmost_[i]; }
  const std::vector<std::size_t>& keyroots() const noexcept { return keyroots_; }

 private:
  std::size_t visit(const Tree<Label>& t) {
    std::size_t first_leaf = static_cast<std::size_t>(-1);
    for (const auto& c : t.children) {
      const std::size_t lm = visit(c);
      if (first_leaf == static_cast<std::size_t>(-1)) first_leaf = lm;
    }
    if (first_leaf == static_cast<std::size_t>(-1)) first_leaf = labels_.size();
    labels_.push_back(&t.label);
    leftmost_.push_back(first_leaf);
    return first_leaf;
  }

  void finish() {
    // keyroots: the highest node for each distinct leftmost leaf
    std::vector<char> seen(labels_.size(), 0);
    for (std::size_t i = labels_.size(); i-- > 0;) {
      if (!seen[leftmost_[i]]) {
        seen[leftmost_[i]] = 1;
        keyroots_.push_back(i);
      }
    }
    std::sort(keyroots_.begin(), keyroots_.end());
  }

  std::vector<const Label*> labels_;
  std::vector<std::size_t> leftmost_;
  std::vector<std::size_t> keyroots_;
};

/// Zhang-Shasha ordered tree edit distance.
///
/// `cost(x, y)` prices a relabel; `cost(x, nullptr)` a deletion and
/// `cost(nullptr, y)` an insertion. Two null labels always cost zero.
template <class Label, class Cost>
double tree_edit_distance(const PostorderTree<Label>& a, const PostorderTree<Label>& b, Cost&& cost) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  auto price = [&](const Label* x, const Label* y) -> double {
    if (x == nullptr && y == nullptr) return 0.0;
    return cost(x, y);
  };
  if (n == 0 && m == 0) return 0.0;
  if (n == 0) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += price(nullptr, b.label(j));
    return s;
  }
  if (m == 0) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += price(a.label(i), nullptr);
    return s;
  }

  std::vector<double> del(n), ins(m);
  for (std::size_t i = 0; i < n; ++i) del[i] = price(a.label(i), nullptr);
  for (std::size_t j = 0; j < m; ++j) ins[j] = price(nullptr, b.label(j));

  std::vector<double> td(n * m, 0.0);
  std::vector<double> fd((n + 1) * (m + 1), 0.0);

  for (std::size_t kr_a : a.keyroots()) {
    for (std::size_t kr_b : b.keyroots()) {
      const std::size_t la = a.leftmost(kr_a);
      const std::size_t lb = b.leftmost(kr_b);
      const std::size_t cols = kr_b - lb + 2;
      auto f = [&](std::size_t r, std::size_t c) -> double& { return fd[r * cols + c]; };
      f(0, 0) = 0.0;
      for (std::size_t x = la; x <= kr_a; ++x) f(x - la + 1, 0) = f(x - la, 0) + del[x];
      for (std::size_t y = lb; y <= kr_b; ++y) f(0, y - lb + 1) = f(0, y - lb) + ins[y];
      for (std::size_t x = la; x <= kr_a; ++x) {
        const std::size_t r = x - la + 1;
        for (std::size_t y = lb; y <= kr_b; ++y) {
          const std::size_t c = y - lb + 1;
          const double via_del = f(r - 1, c) + del[x];
          const double via_ins = f(r, c - 1) + ins[y];
          if (a.leftmost(x) == la && b.leftmost(y) == lb) {
            const double via_rel = f(r - 1, c - 1) + price(a.label(x), b.label(y));
            const double best = std::min({via_del, via_ins, via_rel});
            f(r, c) = best;
            td[x * m + y] = best;
          } else {
            const double via_sub = f(a.leftmost(x) - la, b.leftmost(y) - lb) + td[x * m + y];
            f(r, c) = std::min({via_del, via_ins, via_sub});
          }
        }
      }
    }
  }
  return td[(n - 1) * m + (m - 1)];
}

template <class Label, class Cost>
double tree_edit_distance(const Tree<Label>& a, const Tree<Label>& b, Cost&& cost) {
  return tree_edit_distance(PostorderTree<Label>(a), PostorderTree<Label>(b), cost);
}

/// Edit distance between ordered forests (sequences of trees).
template <class Label, class Cost>
double forest_edit_distance(std::span<const Tree<Label>> a, std::span<const Tree<Label>> b, Cost&& cost) {
  return tree_edit_distance(PostorderTree<Label>(a), PostorderTree<Label>(b), cost);
}

inline double tree_edit_distance(const LabeledTree& a, const LabeledTree& b, const DistanceMetric& metric) {
  return tree_edit_distance(a, b, concept_cost(metric));
}

/// Distance from a tree to the empty tree: the cost of deleting every node.
inline double tree_edit_distance(const LabeledTree& a, std::nullptr_t, const DistanceMetric& metric) {
  return forest_edit_distance(std::span<const LabeledTree>(&a, 1), std::span<const LabeledTree>(), concept_cost(metric));
}

}  // namespace crea

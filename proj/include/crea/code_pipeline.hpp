#pragma once

#include <optional>
#include <span>
#include <vector>

#include "crea/blocks.hpp"
#include "crea/hungarian.hpp"
#include "crea/measures.hpp"
#include "crea/sb3.hpp"
#include "crea/tree_edit.hpp"

namespace crea {

struct CodeOptions {
  bool squared = true;
  bool dedup = true;
};

/// Block cost for tree edits, squared when requested.
inline auto block_cost(bool squared) {
  return [squared](const BlockConcept* a, const BlockConcept* b) {
    const double d = block_distance(a, b);
    return squared ? d * d : d;
  };
}

/// Postorder forms of a project's scripts, one forest per target. Holds
/// pointers into the project, which must outlive it.
struct PreparedCode {
  PostorderTree<BlockConcept> stage;
  std::vector<PostorderTree<BlockConcept>> sprites;

  explicit PreparedCode(const Sb3Project& p) : stage(std::span<const BlockTree>(p.stage.scripts)) {
    for (const auto& s : p.sprites) sprites.emplace_back(std::span<const BlockTree>(s.scripts));
  }
};

/// Stage edit distance plus the cheapest matching of sprites, where a sprite
/// may also be matched to an empty sprite at the cost of deleting (or
/// inserting) all of its blocks.
inline double code_project_distance(const PreparedCode& p, const PreparedCode& q, bool squared = true) {
  const auto cost = block_cost(squared);
  const PostorderTree<BlockConcept> empty;
  double total = tree_edit_distance(p.stage, q.stage, cost);
  const std::size_t n = p.sprites.size(), m = q.sprites.size();
  if (n + m == 0) return total;
  Matrix c(n + m, n + m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) c(i, j) = tree_edit_distance(p.sprites[i], q.sprites[j], cost);
    const double del = tree_edit_distance(p.sprites[i], empty, cost);
    for (std::size_t k = 0; k < n; ++k) c(i, m + k) = del;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double ins = tree_edit_distance(empty, q.sprites[j], cost);
    for (std::size_t k = 0; k < m; ++k) c(n + k, j) = ins;
  }
  return total + hungarian(c).total;
}

inline double code_project_distance(const Sb3Project& p, const Sb3Project& q, bool squared = true) {
  return code_project_distance(PreparedCode(p), PreparedCode(q), squared);
}

struct ModalityScores {
  double fluency = 0.0;
  double flexibility = 0.0;
  std::optional<double> originality;
};

inline double code_fluency(const Sb3Project& p, const CodeOptions& opt = {}) {
  const auto blocks = p.blocks();
  return fluency(std::span<const BlockConcept>(blocks), block_cost(false), opt.squared);
}

inline FlexibilityTerms code_flexibility_terms(const Sb3Project& p, const CodeOptions& opt = {}) {
  const auto blocks = p.blocks();
  return flexibility_terms(std::span<const BlockConcept>(blocks), block_cost(false), opt.squared, opt.dedup);
}

/// Code fluency, flexibility and, for a non-empty sample, originality as
/// the mean 3-step distance to the sample.
inline ModalityScores code_creativity(const Sb3Project& p, std::span<const Sb3Project> sample,
                                      const CodeOptions& opt = {}) {
  ModalityScores s;
  s.fluency = code_fluency(p, opt);
  s.flexibility = code_flexibility_terms(p, opt).value();
  if (!sample.empty()) {
    const PreparedCode pp(p);
    double total = 0.0;
    for (const auto& q : sample) total += code_project_distance(pp, PreparedCode(q), opt.squared);
    s.originality = total / static_cast<double>(sample.size());
  }
  return s;
}

}  // namespace crea

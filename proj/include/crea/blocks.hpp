#pragma once

#include <array>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "crea/concept.hpp"
#include "crea/error.hpp"
#include "crea/metric.hpp"
#include "crea/semantic_network.hpp"

namespace crea {

enum class BlockFamily { predefined, extension, custom };

inline const char* to_string(BlockFamily f) {
  switch (f) {
    case BlockFamily::predefined: return "predefined";
    case BlockFamily::extension: return "extension";
    case BlockFamily::custom: return "custom";
  }
  return "?";
}

/// Where a block sits in the block network: its family plus the
/// subcategory (predefined) or package (extension). Custom blocks have an
/// empty group.
struct Taxonomy {
  BlockFamily family = BlockFamily::predefined;
  std::string group;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;
};

/// A block instance as a concept. `key` identifies the block kind: the
/// opcode, or "custom:<proccode>" for calls of a user-defined block.
struct BlockConcept {
  std::string opcode;
  std::string key;
  Taxonomy taxonomy;

  friend bool operator==(const BlockConcept& a, const BlockConcept& b) { return a.key == b.key; }
};

inline constexpr std::array<std::string_view, 8> predefined_categories{"motion",  "looks",   "sound",    "event",
                                                                       "control", "sensing", "operator", "data"};

/// Taxonomy of an opcode. The text before the first underscore selects the
/// category; procedures_* and argument_* blocks and opcodes listed in
/// `custom_prototypes` are custom; every other prefix is an extension.
inline Taxonomy classify_block(const std::string& opcode, const std::set<std::string>& custom_prototypes = {}) {
  if (custom_prototypes.count(opcode)) return {BlockFamily::custom, ""};
  const std::string prefix = opcode.substr(0, opcode.find('_'));
  if (prefix == "procedures" || prefix == "argument") return {BlockFamily::custom, ""};
  for (auto c : predefined_categories)
    if (prefix == c) return {BlockFamily::predefined, prefix};
  return {BlockFamily::extension, prefix};
}

inline BlockConcept make_block(const std::string& opcode, const std::string& proccode = "",
                               const std::set<std::string>& custom_prototypes = {}) {
  if (opcode.empty()) throw InvalidArgument("block with empty opcode");
  BlockConcept b{opcode, opcode, classify_block(opcode, custom_prototypes)};
  if (!proccode.empty() && (opcode == "procedures_call" || opcode == "procedures_prototype"))
    b.key = "custom:" + proccode;
  return b;
}

/// Shortest-path distance in the block network, in closed form. A null
/// pointer stands for the nullconcept.
inline double block_distance(const BlockConcept* a, const BlockConcept* b) {
  using F = BlockFamily;
  if (a == nullptr && b == nullptr) return 0.0;
  if (a == nullptr || b == nullptr) {
    switch ((a ? a : b)->taxonomy.family) {
      case F::predefined: return 3.0;
      case F::extension: return 4.0;
      case F::custom: return 5.0;
    }
  }
  if (a->key == b->key) return 0.0;
  const F fa = a->taxonomy.family, fb = b->taxonomy.family;
  if (fa == fb) {
    if (fa == F::custom) return 2.0;
    return a->taxonomy.group == b->taxonomy.group ? 1.0 : 2.0;
  }
  const bool has_pre = fa == F::predefined || fb == F::predefined;
  const bool has_cus = fa == F::custom || fb == F::custom;
  if (has_pre && has_cus) return 4.0;
  return 3.0;
}

inline double block_distance(const BlockConcept& a, const BlockConcept& b) { return block_distance(&a, &b); }

/// Symbolic concept for a block: "<family>|<group>|<key>".
inline Concept to_concept(const BlockConcept& b) {
  return Concept::symbol(std::string(to_string(b.taxonomy.family)) + "|" + b.taxonomy.group + "|" + b.key);
}

inline BlockConcept block_from_concept(const Concept& c) {
  const auto* s = c.as_symbol();
  if (s == nullptr) throw InvalidArgument("concept '" + c.id + "' is not a block");
  const auto p1 = s->find('|');
  const auto p2 = p1 == std::string::npos ? std::string::npos : s->find('|', p1 + 1);
  if (p2 == std::string::npos) throw InvalidArgument("concept '" + c.id + "' is not a block");
  const std::string fam = s->substr(0, p1);
  BlockConcept b;
  b.taxonomy.group = s->substr(p1 + 1, p2 - p1 - 1);
  b.key = s->substr(p2 + 1);
  b.opcode = b.key;
  if (fam == "predefined")
    b.taxonomy.family = BlockFamily::predefined;
  else if (fam == "extension")
    b.taxonomy.family = BlockFamily::extension;
  else if (fam == "custom")
    b.taxonomy.family = BlockFamily::custom;
  else
    throw InvalidArgument("concept '" + c.id + "' has unknown block family " + fam);
  return b;
}

/// Concept metric backed by block_distance.
inline DistanceMetric block_metric() {
  return DistanceMetric(
      [](const Concept& x, const Concept& y) {
        if (x.is_null && y.is_null) return 0.0;
        if (x.is_null || y.is_null) {
          const auto b = block_from_concept(x.is_null ? y : x);
          return block_distance(&b, nullptr);
        }
        const auto a = block_from_concept(x), b = block_from_concept(y);
        return block_distance(a, b);
      },
      false, "block");
}

/// Materializes the block network for the given blocks: null to the
/// predefined hub (2), predefined hub to extension hub (1), extension hub to
/// custom hub (1), each hub to its subcategories or packages (0.5) and those
/// to their blocks (0.5); custom blocks hang off the custom hub (1).
inline SemanticNetwork build_block_network(const std::vector<BlockConcept>& blocks) {
  std::vector<SemanticNetwork::Edge> edges{
      {"#null", "#predefined", 2.0}, {"#predefined", "#extension", 1.0}, {"#extension", "#custom", 1.0}};
  std::set<std::string> groups, keys;
  for (const auto& b : blocks) {
    if (!keys.insert(b.key).second) continue;
    switch (b.taxonomy.family) {
      case BlockFamily::predefined:
      case BlockFamily::extension: {
        const std::string hub = b.taxonomy.family == BlockFamily::predefined ? "#predefined" : "#extension";
        const std::string group = hub + "/" + b.taxonomy.group;
        if (groups.insert(group).second) edges.push_back({hub, group, 0.5});
        edges.push_back({group, b.key, 0.5});
        break;
      }
      case BlockFamily::custom:
        edges.push_back({"#custom", b.key, 1.0});
        break;
    }
  }
  return SemanticNetwork(edges, "#null");
}

}  // namespace crea

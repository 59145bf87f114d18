#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crea/error.hpp"

namespace crea {

/// Undirected, positively weighted concept graph. Distances between concepts
/// are shortest-path lengths. Immutable after construction.
class SemanticNetwork {
 public:
  struct Edge {
    std::string a;
    std::string b;
    double length;
  };

  /// Networks up to this many nodes keep a dense all-pairs distance table.
  static constexpr std::size_t kDenseCacheLimit = 4096;

  SemanticNetwork(const std::vector<Edge>& edges, std::string null_id) : null_id_(std::move(null_id)) {
    intern(null_id_);
    for (const auto& e : edges) {
      if (!std::isfinite(e.length) || e.length <= 0.0)
        throw InvalidArgument("edge " + e.a + " -- " + e.b + " must have a positive finite length");
      const std::size_t ia = intern(e.a);
      const std::size_t ib = intern(e.b);
      if (ia == ib) throw InvalidArgument("self loop on " + e.a);
      add_edge(ia, ib, e.length);
    }
    // connectivity from the nullconcept
    const auto dist = dijkstra(index_.at(null_id_));
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (!std::isfinite(dist[i])) throw InvalidArgument("node " + names_[i] + " is not reachable from " + null_id_);
    if (names_.size() <= kDenseCacheLimit) {
      dense_.resize(names_.size());
      for (std::size_t i = 0; i < names_.size(); ++i) dense_[i] = dijkstra(i);
      // summation order differs per source; keep the table exactly symmetric
      for (std::size_t i = 0; i < names_.size(); ++i)
        for (std::size_t j = i + 1; j < names_.size(); ++j)
          dense_[i][j] = dense_[j][i] = std::min(dense_[i][j], dense_[j][i]);
    }
  }

  /// Parses the edge-list text format: `<idA> <idB> <length>` per edge and a
  /// single `null <id>` line. Blank lines are ignored.
  static SemanticNetwork parse(std::istream& in) {
    std::vector<Edge> edges;
    std::string null_id;
    bool have_null = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ls(line);
      std::vector<std::string> tok;
      for (std::string t; ls >> t;) tok.push_back(std::move(t));
      if (tok.empty()) continue;
      const auto where = " (line " + std::to_string(lineno) + ")";
      if (tok[0] == "null" && tok.size() == 2) {
        if (have_null) throw FormatError("duplicate null line" + where);
        null_id = tok[1];
        have_null = true;
      } else if (tok.size() == 3) {
        double len = 0.0;
        const auto& s = tok[2];
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), len);
        if (ec != std::errc{} || p != s.data() + s.size()) throw FormatError("bad edge length '" + s + "'" + where);
        edges.push_back({tok[0], tok[1], len});
      } else {
        throw FormatError("expected '<idA> <idB> <length>' or 'null <id>'" + where);
      }
    }
    if (!have_null) throw FormatError("network has no 'null <id>' line");
    try {
      return SemanticNetwork(edges, null_id);
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
  }

  static SemanticNetwork load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open network file " + path);
    return parse(in);
  }

  const std::string& null_id() const noexcept { return null_id_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return names_; }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  std::size_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownId(id, "network node");
    return it->second;
  }

  /// Shortest-path length between two nodes.
  double distance(const std::string& a, const std::string& b) const {
    return distance(index_of(a), index_of(b));
  }

  double distance(std::size_t a, std::size_t b) const {
    if (!dense_.empty()) return dense_[a][b];
    return dijkstra(a)[b];
  }

 private:
  std::size_t intern(const std::string& id) {
    auto [it, inserted] = index_.try_emplace(id, names_.size());
    if (inserted) {
      names_.push_back(id);
      adj_.emplace_back();
    }
    return it->second;
  }

  void add_edge(std::size_t a, std::size_t b, double len) {
    // parallel edges collapse to the shortest
    for (auto& [to, l] : adj_[a])
      if (to == b) {
        l = std::min(l, len);
        for (auto& [to2, l2] : adj_[b])
          if (to2 == a) l2 = std::min(l2, len);
        return;
      }
    adj_[a].emplace_back(b, len);
    adj_[b].emplace_back(a, len);
  }

  std::vector<double> dijkstra(std::size_t src) const {
    std::vector<double> dist(names_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (const auto& [v, len] : adj_[u]) {
        const double nd = d + len;
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.emplace(nd, v);
        }
      }
    }
    return dist;
  }

  std::string null_id_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
  std::vector<std::vector<double>> dense_;
};

/// Shortest-path distance between two nodes of a semantic network.
inline double network_distance(const SemanticNetwork& net, const std::string& a, const std::string& b) {
  return net.distance(a, b);
}

}  // namespace crea

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "crea/concept.hpp"
#include "crea/error.hpp"

namespace crea {

struct GbtParams {
  int n_trees = 15;
  int max_depth = 3;
  double shrinkage = 0.3;
};

/// Regression tree stored as a flat node array; node 0 is the root.
/// Inner nodes send x[feature] < threshold to `left`, everything else to
/// `right`. Leaves have feature == -1.
struct RegressionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    friend bool operator==(const Node&, const Node&) = default;
  };

  std::vector<Node> nodes;

  double predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const Node& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  int depth() const { return nodes.empty() ? 0 : depth_from(0); }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  int depth_from(int i) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

struct GbtModel {
  std::vector<RegressionTree> trees;
  double shrinkage = 0.3;
  double base_score = 0.0;
  int max_trees = 0;
  int max_depth = 0;
  std::size_t n_features = 0;
  /// Training MSE after the base score (index 0) and after each tree.
  std::vector<double> train_mse;

  double predict(std::span<const double> x) const {
    if (x.size() != n_features)
      throw InvalidArgument("predict: expected " + std::to_string(n_features) + " features, got " +
                            std::to_string(x.size()));
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return base_score + shrinkage * s;
  }

  friend bool operator==(const GbtModel& a, const GbtModel& b) {
    return a.trees == b.trees && a.shrinkage == b.shrinkage && a.base_score == b.base_score &&
           a.max_trees == b.max_trees && a.max_depth == b.max_depth && a.n_features == b.n_features;
  }
};

namespace detail {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exact greedy search. Ties keep the lowest feature, then the lowest threshold.
inline SplitChoice best_split(const Matrix& x, std::span<const double> r, const std::vector<std::size_t>& rows) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  double total = 0.0, sq = 0.0;
  for (auto i : rows) {
    total += r[i];
    sq += r[i] * r[i];
  }
  const double sse = std::max(0.0, sq - total * total / n);
  const double min_gain = 1e-12 * std::max(1.0, sse);
  std::vector<std::size_t> sorted = rows;
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    double left = 0.0;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      left += r[sorted[k]];
      const double lo = x(sorted[k], f), hi = x(sorted[k + 1], f);
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(k + 1), nr = n - nl;
      const double right = total - left;
      const double gain = left * left / nl + right * right / nr - total * total / n;
      if (gain > min_gain && gain > best.gain) {
        const double mid = lo + (hi - lo) / 2.0;
        best = {static_cast<int>(f), mid > lo ? mid : hi, gain};
      }
    }
  }
  return best;
}

inline int grow(RegressionTree& tree, const Matrix& x, std::span<const double> r, const std::vector<std::size_t>& rows,
                int depth, int max_depth) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  double sum = 0.0;
  for (auto i : rows) sum += r[i];
  tree.nodes.back().value = sum / static_cast<double>(rows.size());
  if (depth >= max_depth || rows.size() < 2) return id;
  const SplitChoice s = best_split(x, r, rows);
  if (s.feature < 0) return id;
  std::vector<std::size_t> lrows, rrows;
  for (auto i : rows) (x(i, static_cast<std::size_t>(s.feature)) < s.threshold ? lrows : rrows).push_back(i);
  tree.nodes[static_cast<std::size_t>(id)].feature = s.feature;
  tree.nodes[static_cast<std::size_t>(id)].threshold = s.threshold;
  tree.nodes[static_cast<std::size_t>(id)].value = 0.0;
  const int l = grow(tree, x, r, lrows, depth + 1, max_depth);
  const int rr = grow(tree, x, r, rrows, depth + 1, max_depth);
  tree.nodes[static_cast<std::size_t>(id)].left = l;
  tree.nodes[static_cast<std::size_t>(id)].right = rr;
  return id;
}

inline double mse(std::span<const double> y, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace detail

/// Squared-loss gradient boosting. Each tree fits the current residuals with
/// mean-valued leaves; the model adds shrinkage times its output.
inline GbtModel fit_gbt(const Matrix& x, std::span<const double> y, const GbtParams& params = {}) {
  if (x.rows != y.size()) throw InvalidArgument("fit_gbt: row count differs from target count");
  if (x.rows < 2) throw InvalidArgument("fit_gbt: needs at least two rows");
  if (x.cols < 1) throw InvalidArgument("fit_gbt: needs at least one feature");
  if (!all_finite(x.data) || !all_finite(y)) throw InvalidArgument("fit_gbt: non-finite input");
  if (params.n_trees < 0 || params.max_depth < 0 || !(params.shrinkage > 0.0) || !(params.shrinkage <= 1.0))
    throw InvalidArgument("fit_gbt: bad parameters");

  GbtModel m;
  m.shrinkage = params.shrinkage;
  m.max_trees = params.n_trees;
  m.max_depth = params.max_depth;
  m.n_features = x.cols;
  m.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> f(y.size(), m.base_score), r(y.size());
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  m.train_mse.push_back(detail::mse(y, f));
  for (int t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - f[i];
    RegressionTree tree;
    detail::grow(tree, x, r, rows, 0, params.max_depth);
    for (std::size_t i = 0; i < y.size(); ++i) f[i] += m.shrinkage * tree.predict(x.row(i));
    m.trees.push_back(std::move(tree));
    m.train_mse.push_back(detail::mse(y, f));
  }
  return m;
}

// --- text format ------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw FormatError(std::string("model: bad ") + what + " '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, const char* what) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError(std::string("model: bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace detail

struct NamedModel {
  std::string name;
  std::vector<std::string> features;
  GbtModel model;
};

/// Writes models in the `CREAGBT 1` text format (see README).
inline void write_models(std::ostream& out, const std::vector<NamedModel>& models) {
  using detail::format_double;
  out << "CREAGBT 1\n";
  out << "models " << models.size() << '\n';
  for (const auto& nm : models) {
    const auto& m = nm.model;
    out << "model " << nm.name << '\n';
    out << "features " << m.n_features;
    for (const auto& f : nm.features) out << ' ' << f;
    out << '\n';
    out << "base " << format_double(m.base_score) << '\n';
    out << "shrinkage " << format_double(m.shrinkage) << '\n';
    out << "max_trees " << m.max_trees << '\n';
    out << "max_depth " << m.max_depth << '\n';
    out << "trees " << m.trees.size() << '\n';
    for (const auto& t : m.trees) {
      out << "tree " << t.nodes.size() << '\n';
      for (const auto& n : t.nodes) {
        if (n.feature < 0)
          out << "leaf " << format_double(n.value) << '\n';
        else
          out << "split " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right
              << '\n';
      }
    }
    out << "end\n";
  }
}

inline std::vector<NamedModel> read_models(std::istream& in) {
  std::size_t line_no = 0;
  auto next_tokens = [&](std::size_t expect_min, const char* keyword) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(std::string("model: unexpected end of file, expected ") + keyword);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.size() < expect_min || tok[0] != keyword)
      throw FormatError("model: line " + std::to_string(line_no) + ": expected '" + keyword + "'");
    return tok;
  };
  auto exact = [&](const char* keyword, std::size_t n) {
    auto tok = next_tokens(n, keyword);
    if (tok.size() != n) throw FormatError("model: line " + std::to_string(line_no) + ": bad field count");
    return tok;
  };

  auto header = exact("CREAGBT", 2);
  if (header[1] != "1") throw FormatError("model: unsupported version " + header[1]);
  const auto count = detail::parse_int(exact("models", 2)[1], "model count");
  if (count < 0) throw FormatError("model: negative model count");
  std::vector<NamedModel> out;
  for (long long k = 0; k < count; ++k) {
    NamedModel nm;
    nm.name = exact("model", 2)[1];
    const auto ftok = next_tokens(2, "features");
    const auto nf = detail::parse_int(ftok[1], "feature count");
    if (nf < 1) throw FormatError("model: feature count must be positive");
    nm.model.n_features = static_cast<std::size_t>(nf);
    nm.features.assign(ftok.begin() + 2, ftok.end());
    if (!nm.features.empty() && nm.features.size() != nm.model.n_features)
      throw FormatError("model: feature names do not match feature count");
    nm.model.base_score = detail::parse_double(exact("base", 2)[1], "base");
    nm.model.shrinkage = detail::parse_double(exact("shrinkage", 2)[1], "shrinkage");
    nm.model.max_trees = static_cast<int>(detail::parse_int(exact("max_trees", 2)[1], "max_trees"));
    nm.model.max_depth = static_cast<int>(detail::parse_int(exact("max_depth", 2)[1], "max_depth"));
    const auto nt = detail::parse_int(exact("trees", 2)[1], "tree count");
    if (nt < 0) throw FormatError("model: negative tree count");
    for (long long t = 0; t < nt; ++t) {
      const auto nn = detail::parse_int(exact("tree", 2)[1], "node count");
      if (nn < 1) throw FormatError("model: empty tree");
      RegressionTree tree;
      for (long long i = 0; i < nn; ++i) {
        std::string line;
        if (!std::getline(in, line)) throw FormatError("model: unexpected end of file in tree");
        ++line_no;
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string s; ss >> s;) tok.push_back(s);
        RegressionTree::Node node;
        if (tok.size() == 2 && tok[0] == "leaf") {
          node.value = detail::parse_double(tok[1], "leaf value");
        } else if (tok.size() == 5 && tok[0] == "split") {
          node.feature = static_cast<int>(detail::parse_int(tok[1], "split feature"));
          node.threshold = detail::parse_double(tok[2], "threshold");
          node.left = static_cast<int>(detail::parse_int(tok[3], "child"));
          node.right = static_cast<int>(detail::parse_int(tok[4], "child"));
          if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= nm.model.n_features)
            throw FormatError("model: line " + std::to_string(line_no) + ": split feature out of range");
          if (node.left <= i || node.right <= i || node.left >= nn || node.right >= nn)
            throw FormatError("model: line " + std::to_string(line_no) + ": child index out of range");
        } else {
          throw FormatError("model: line " + std::to_string(line_no) + ": expected 'leaf' or 'split'");
        }
        tree.nodes.push_back(node);
      }
      nm.model.trees.push_back(std::move(tree));
    }
    if (static_cast<long long>(nm.model.trees.size()) > nm.model.max_trees && nm.model.max_trees >= 0)
      throw FormatError("model: more trees than max_trees");
    exact("end", 1);
    out.push_back(std::move(nm));
  }
  return out;
}

}  // namespace crea

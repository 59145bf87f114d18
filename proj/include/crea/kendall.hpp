#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "crea/error.hpp"

namespace crea {

/// Kendall's tau is undefined for the given input (all values tied, or no
/// qualifying pairs).
class UndefinedTau : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class TauVariant { b, a };

inline const char* to_string(TauVariant v) { return v == TauVariant::b ? "b" : "a"; }

inline TauVariant parse_tau_variant(const std::string& s) {
  if (s == "b" || s == "tau-b") return TauVariant::b;
  if (s == "a" || s == "tau-a") return TauVariant::a;
  throw InvalidArgument("unknown tau variant '" + s + "'");
}

/// Pair counts behind a tau value. `tied_a` and `tied_b` include pairs tied
/// in both lists.
struct PairCounts {
  std::int64_t pairs = 0;
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t tied_a = 0;
  std::int64_t tied_b = 0;

  double tau(TauVariant variant) const {
    if (pairs == 0) throw UndefinedTau("kendall_tau: no pairs");
    if (tied_a == pairs || tied_b == pairs) throw UndefinedTau("kendall_tau: all values tied");
    const double s = static_cast<double>(concordant - discordant);
    if (variant == TauVariant::a) return s / static_cast<double>(pairs);
    const double da = static_cast<double>(pairs - tied_a);
    const double db = static_cast<double>(pairs - tied_b);
    return std::clamp(s / std::sqrt(da * db), -1.0, 1.0);
  }
};

namespace detail {

inline std::int64_t tie_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Counts inversions of v (as a strictly-greater relation) while sorting it.
inline std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

/// Pair counts over all pairs in O(n log n) (Knight's algorithm).
inline PairCounts kendall_counts(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("kendall_tau: length mismatch");
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw InvalidArgument("kendall_tau: non-finite value");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j];
  });

  PairCounts c;
  c.pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n > 0 ? n - 1 : 0) / 2;
  std::int64_t joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && a[order[j]] == a[order[i]]) ++j;
    c.tied_a += detail::tie_pairs(static_cast<std::int64_t>(j - i));
    for (std::size_t k = i; k < j;) {
      std::size_t l = k;
      while (l < j && b[order[l]] == b[order[k]]) ++l;
      joint += detail::tie_pairs(static_cast<std::int64_t>(l - k));
      k = l;
    }
    i = j;
  }

  std::vector<double> bs(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) bs[i] = b[order[i]];
  const std::int64_t swaps = detail::merge_count(bs, buf, 0, n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && bs[j] == bs[i]) ++j;
    c.tied_b += detail::tie_pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }
  // untied-in-both pairs split into concordant and discordant
  const std::int64_t untied = c.pairs - c.tied_a - c.tied_b + joint;
  c.discordant = swaps;
  c.concordant = untied - swaps;
  return c;
}

/// Kendall rank correlation between two equally long lists.
inline double kendall_tau(std::span<const double> a, std::span<const double> b, TauVariant variant = TauVariant::b) {
  if (a.size() != b.size()) throw InvalidArgument("kendall_tau: length mismatch");
  if (a.size() < 2) throw InvalidArgument("kendall_tau: needs at least two items");
  return kendall_counts(a, b).tau(variant);
}

/// Pair counts restricted to pairs with at least one endpoint in the test set.
inline PairCounts restricted_counts(std::span<const double> truth, std::span<const double> ranked,
                                    std::span<const char> is_test) {
  if (truth.size() != ranked.size() || truth.size() != is_test.size())
    throw InvalidArgument("restricted_tau: length mismatch");
  PairCounts c;
  const std::size_t n = truth.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!is_test[i] && !is_test[j]) continue;
      ++c.pairs;
      const double da = truth[i] - truth[j];
      const double db = ranked[i] - ranked[j];
      if (da == 0.0) ++c.tied_a;
      if (db == 0.0) ++c.tied_b;
      if (da == 0.0 || db == 0.0) continue;
      if ((da > 0.0) == (db > 0.0))
        ++c.concordant;
      else
        ++c.discordant;
    }
  return c;
}

/// Tau between the true ranking and the ranking formed by true scores for
/// training items and predicted scores for test items, over pairs that
/// touch at least one test item.
inline double restricted_tau(std::span<const double> truth, std::span<const double> ranked,
                             std::span<const char> is_test, TauVariant variant = TauVariant::b) {
  if (std::find(is_test.begin(), is_test.end(), char{1}) == is_test.end())
    throw InvalidArgument("restricted_tau: empty test set");
  return restricted_counts(truth, ranked, is_test).tau(variant);
}

/// Keyed form: `truth` covers train and test ids, `predicted` covers the
/// test ids.
inline double restricted_tau(const std::map<std::string, double>& truth, const std::map<std::string, double>& predicted,
                             const std::vector<std::string>& train_ids, const std::vector<std::string>& test_ids,
                             TauVariant variant = TauVariant::b) {
  if (test_ids.empty()) throw InvalidArgument("restricted_tau: empty test set");
  auto lookup = [](const std::map<std::string, double>& m, const std::string& id) {
    const auto it = m.find(id);
    if (it == m.end()) throw UnknownId(id, "project");
    return it->second;
  };
  std::vector<double> t, r;
  std::vector<char> test;
  for (const auto& id : train_ids) {
    t.push_back(lookup(truth, id));
    r.push_back(t.back());
    test.push_back(0);
  }
  for (const auto& id : test_ids) {
    t.push_back(lookup(truth, id));
    r.push_back(lookup(predicted, id));
    test.push_back(1);
  }
  return restricted_tau(t, r, test, variant);
}

}  // namespace crea

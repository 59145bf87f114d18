#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crea/concept.hpp"
#include "crea/error.hpp"
#include "crea/gbt.hpp"
#include "crea/kendall.hpp"
#include "crea/labels.hpp"
#include "crea/measures.hpp"

namespace crea {

enum class Target { code, visual, audio, weighted };
enum class Mode { per_expert, combined };

inline const char* to_string(Target t) {
  switch (t) {
    case Target::code: return "code";
    case Target::visual: return "visual";
    case Target::audio: return "audio";
    case Target::weighted: return "weighted";
  }
  return "?";
}

inline const char* to_string(Mode m) { return m == Mode::per_expert ? "per-expert" : "combined"; }

inline Target parse_target(const std::string& s) {
  if (s == "code") return Target::code;
  if (s == "visual") return Target::visual;
  if (s == "audio") return Target::audio;
  if (s == "weighted") return Target::weighted;
  throw InvalidArgument("unknown target '" + s + "'");
}

inline Mode parse_mode(const std::string& s) {
  if (s == "per-expert") return Mode::per_expert;
  if (s == "combined") return Mode::combined;
  throw InvalidArgument("unknown mode '" + s + "'");
}

/// Indices into CreativityVector::values() used as model inputs. The three
/// modality targets use that modality's fluency, flexibility and
/// originality; the weighted target uses all nine.
inline std::vector<std::size_t> feature_indices(Target t) {
  switch (t) {
    case Target::code: return {0, 1, 2};
    case Target::visual: return {3, 4, 5};
    case Target::audio: return {6, 7, 8};
    case Target::weighted: break;
  }
  return {0, 1, 2, 3, 4, 5, 6, 7, 8};
}

inline double target_value(const ExpertLabels& labels, const LabelRow& row, Target t) {
  switch (t) {
    case Target::code: return row.code;
    case Target::visual: return row.visual;
    case Target::audio: return row.audio;
    case Target::weighted: break;
  }
  return weighted_combination(labels, row.expert_id, row.project_id);
}

/// Features of `project` with originality measured against `reference`.
using FeatureFn = std::function<CreativityVector(const std::string& project, const std::vector<std::string>& reference)>;

struct ExperimentConfig {
  std::uint64_t seed = 20231019;
  TauVariant tau = TauVariant::b;
  int per_expert_folds = 5;
  int combined_folds = 10;
  double shrinkage = 0.3;
};

/// Model capacity for a training group: 29 trees combined, otherwise 10 for
/// at most ten projects and 15 beyond; depth 3 for three features, 4 for nine.
inline GbtParams capacity(Mode mode, std::size_t group_rows, std::size_t n_features, double shrinkage) {
  GbtParams p;
  p.n_trees = mode == Mode::combined ? 29 : (group_rows <= 10 ? 10 : 15);
  p.max_depth = n_features <= 3 ? 3 : 4;
  p.shrinkage = shrinkage;
  return p;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Uniform draw in [0, bound) by rejection; independent of the standard
// library's distribution implementations.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % bound;
}

}  // namespace detail

/// Partition of 0..n-1 into k folds: shuffled with a seeded Fisher-Yates,
/// cut into contiguous chunks whose sizes differ by at most one, each chunk
/// sorted.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InvalidArgument("make_folds: zero folds");
  if (n < k) throw InvalidArgument("make_folds: " + std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[detail::bounded(rng, i)]);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

struct FoldResult {
  std::vector<std::string> test;  ///< "project" or "expert:project" in combined mode
  std::optional<double> tau;
  std::string note;
};

struct GroupResult {
  std::string group;  ///< expert id, or "combined"
  std::size_t rows = 0;
  int n_trees = 0;
  int max_depth = 0;
  std::vector<FoldResult> folds;
  std::optional<double> mean_tau;
};

struct TargetResult {
  Mode mode = Mode::per_expert;
  Target target = Target::code;
  std::vector<GroupResult> groups;
};

struct EvalReport {
  std::uint64_t seed = 0;
  TauVariant tau = TauVariant::b;
  std::vector<TargetResult> results;
};

/// One training row: a (project, expert) label with its features.
struct Instance {
  std::string project;
  std::string expert;
  CreativityVector features;
};

/// Builds the instances of one group. Originality is measured against all
/// other projects the same expert rated.
inline std::vector<Instance> build_instances(const ExpertLabels& labels, const std::vector<std::string>& experts,
                                             const FeatureFn& features) {
  std::vector<Instance> out;
  for (const auto& e : experts) {
    std::vector<std::string> projects;
    for (const auto& r : labels.rows)
      if (r.expert_id == e) projects.push_back(r.project_id);
    for (const auto& p : projects) {
      std::vector<std::string> ref;
      for (const auto& q : projects)
        if (q != p) ref.push_back(q);
      out.push_back({p, e, features(p, ref)});
    }
  }
  return out;
}

inline Matrix design_matrix(const std::vector<Instance>& rows, std::span<const std::size_t> cols,
                            std::span<const std::size_t> pick) {
  Matrix x(pick.size(), cols.size());
  for (std::size_t i = 0; i < pick.size(); ++i) {
    const auto v = rows[pick[i]].features.values();
    for (std::size_t j = 0; j < cols.size(); ++j) x(i, j) = v[cols[j]];
  }
  return x;
}

/// Cross-validated evaluation of one group of instances.
inline GroupResult evaluate_group(const std::string& group, const std::vector<Instance>& rows,
                                  std::span<const double> y, Mode mode, Target target, const ExperimentConfig& cfg) {
  const auto cols = feature_indices(target);
  const std::size_t k = static_cast<std::size_t>(mode == Mode::combined ? cfg.combined_folds : cfg.per_expert_folds);
  if (mode == Mode::per_expert && rows.size() < 2 * k)
    throw InvalidArgument("group " + group + ": " + std::to_string(rows.size()) + " projects cannot fill " +
                          std::to_string(k) + " folds of at least two");
  const auto folds = make_folds(rows.size(), k, cfg.seed ^ detail::fnv1a(group));

  GroupResult g;
  g.group = group;
  g.rows = rows.size();
  const GbtParams params = capacity(mode, rows.size(), cols.size(), cfg.shrinkage);
  g.n_trees = params.n_trees;
  g.max_depth = params.max_depth;

  double tau_sum = 0.0;
  int defined = 0;
  for (const auto& test : folds) {
    FoldResult fr;
    std::vector<char> is_test(rows.size(), 0);
    for (auto i : test) {
      is_test[i] = 1;
      fr.test.push_back(mode == Mode::combined ? rows[i].expert + ":" + rows[i].project : rows[i].project);
    }
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!is_test[i]) train.push_back(i);
    std::vector<double> ytrain;
    for (auto i : train) ytrain.push_back(y[i]);
    const GbtModel model = fit_gbt(design_matrix(rows, cols, train), ytrain, params);
    std::vector<double> ranked(y.begin(), y.end());
    for (auto i : test) {
      const auto v = rows[i].features.values();
      std::vector<double> x;
      for (auto c : cols) x.push_back(v[c]);
      ranked[i] = model.predict(x);
    }
    try {
      fr.tau = restricted_tau(y, ranked, is_test, cfg.tau);
      tau_sum += *fr.tau;
      ++defined;
    } catch (const UndefinedTau& e) {
      fr.note = e.what();
    }
    g.folds.push_back(std::move(fr));
  }
  if (defined > 0) g.mean_tau = tau_sum / defined;
  return g;
}

inline TargetResult run_experiment(const ExpertLabels& labels, const FeatureFn& features, Mode mode, Target target,
                                   const ExperimentConfig& cfg = {}) {
  TargetResult out;
  out.mode = mode;
  out.target = target;
  auto targets_of = [&](const std::vector<Instance>& rows) {
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(target_value(labels, labels.row(r.expert, r.project), target));
    return y;
  };
  if (mode == Mode::per_expert) {
    for (const auto& e : labels.experts()) {
      const auto rows = build_instances(labels, {e}, features);
      out.groups.push_back(evaluate_group(e, rows, targets_of(rows), mode, target, cfg));
    }
  } else {
    const auto rows = build_instances(labels, labels.experts(), features);
    out.groups.push_back(evaluate_group("combined", rows, targets_of(rows), mode, target, cfg));
  }
  return out;
}

/// Mean of every defined group mean in the report.
inline std::optional<double> overall_mean_tau(const EvalReport& r) {
  double s = 0.0;
  int n = 0;
  for (const auto& t : r.results)
    for (const auto& g : t.groups)
      if (g.mean_tau) {
        s += *g.mean_tau;
        ++n;
      }
  if (n == 0) return std::nullopt;
  return s / n;
}

/// Fits one model per group on all of its rows.
inline std::vector<NamedModel> train_models(const ExpertLabels& labels, const FeatureFn& features, Mode mode,
                                            Target target, double shrinkage = 0.3) {
  std::vector<NamedModel> out;
  const auto cols = feature_indices(target);
  std::vector<std::string> names;
  for (auto c : cols) names.push_back(CreativityVector::names[c]);
  auto fit = [&](const std::string& group, const std::vector<Instance>& rows) {
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(target_value(labels, labels.row(r.expert, r.project), target));
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) all[i] = i;
    const auto params = capacity(mode, rows.size(), cols.size(), shrinkage);
    out.push_back({std::string(to_string(mode)) + "/" + to_string(target) + "/" + group, names,
                   fit_gbt(design_matrix(rows, cols, all), y, params)});
  };
  if (mode == Mode::per_expert) {
    for (const auto& e : labels.experts()) fit(e, build_instances(labels, {e}, features));
  } else {
    fit("combined", build_instances(labels, labels.experts(), features));
  }
  return out;
}

// --- output -----------------------------------------------------------------

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["seed"] = r.seed;
  j["tau_variant"] = to_string(r.tau);
  j["results"] = ordered_json::array();
  for (const auto& t : r.results) {
    ordered_json jt;
    jt["mode"] = to_string(t.mode);
    jt["target"] = to_string(t.target);
    jt["groups"] = ordered_json::array();
    for (const auto& g : t.groups) {
      ordered_json jg;
      jg["group"] = g.group;
      jg["rows"] = g.rows;
      jg["trees"] = g.n_trees;
      jg["max_depth"] = g.max_depth;
      jg["mean_tau"] = g.mean_tau ? ordered_json(*g.mean_tau) : ordered_json(nullptr);
      jg["folds"] = ordered_json::array();
      for (const auto& f : g.folds) {
        ordered_json jf;
        jf["test"] = f.test;
        jf["tau"] = f.tau ? ordered_json(*f.tau) : ordered_json(nullptr);
        if (!f.note.empty()) jf["note"] = f.note;
        jg["folds"].push_back(std::move(jf));
      }
      jt["groups"].push_back(std::move(jg));
    }
    j["results"].push_back(std::move(jt));
  }
  const auto overall = overall_mean_tau(r);
  j["mean_tau"] = overall ? ordered_json(*overall) : ordered_json(nullptr);
  return j;
}

namespace detail {

inline std::string tau_cell(const std::optional<double>& t) {
  if (!t) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", *t);
  return buf;
}

}  // namespace detail

/// Plain-text table with one row per expert (and a final "Combined" row)
/// and one column per target.
inline std::string to_table(const EvalReport& r) {
  const std::array<Target, 4> order{Target::code, Target::visual, Target::audio, Target::weighted};
  const std::array<const char*, 4> heads{"Code", "Visual", "Audio", "Weighted combination"};
  std::vector<std::string> row_names;
  for (const auto& t : r.results)
    if (t.mode == Mode::per_expert)
      for (const auto& g : t.groups)
        if (std::find(row_names.begin(), row_names.end(), g.group) == row_names.end()) row_names.push_back(g.group);
  bool combined = false;
  for (const auto& t : r.results) combined = combined || t.mode == Mode::combined;

  auto cell = [&](Mode m, const std::string& group, Target target) -> std::string {
    for (const auto& t : r.results)
      if (t.mode == m && t.target == target)
        for (const auto& g : t.groups)
          if (g.group == group) return detail::tau_cell(g.mean_tau);
    return "";
  };

  std::string out = "Kendall's tau between model predictions and expert scores (tau-" + std::string(to_string(r.tau)) +
                    ", seed " + std::to_string(r.seed) + ")\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %22s\n", "Expert", heads[0], heads[1], heads[2], heads[3]);
  out += buf;
  auto line = [&](const std::string& label, Mode m, const std::string& group) {
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %22s\n", label.c_str(), cell(m, group, order[0]).c_str(),
                  cell(m, group, order[1]).c_str(), cell(m, group, order[2]).c_str(), cell(m, group, order[3]).c_str());
    out += buf;
  };
  for (const auto& name : row_names) line(name, Mode::per_expert, name);
  if (combined) line("Combined", Mode::combined, "combined");
  return out;
}

}  // namespace crea

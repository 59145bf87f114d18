// crea: creativity measures for Scratch projects.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "crea/corpus.hpp"
#include "crea/experiment.hpp"
#include "crea/gbt.hpp"
#include "crea/labels.hpp"
#include "crea/media.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string sidecars;
  bool fallback = false;
  bool squared = true;
  bool dedup = true;
  bool include_shadow = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string format = "json";
  std::string output;
};

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Writes to -o or stdout.
void emit(const Common& c, const std::string& text) {
  if (c.output.empty() || c.output == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw crea::Error("cannot write " + c.output);
  out << text;
}

crea::CorpusOptions corpus_options(const Common& c) {
  crea::CorpusOptions o;
  o.parse.include_shadow = c.include_shadow;
  o.code.squared = c.squared;
  o.code.dedup = c.dedup;
  if (!c.sidecars.empty()) o.features.sidecar_dir = c.sidecars;
  o.features.fallback = c.fallback;
  o.jobs = c.jobs;
  return o;
}

// Expands directories to their .sb3 files (sorted by name).
std::vector<std::string> expand(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".sb3") found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(in);
    }
  }
  return out;
}

std::string key_of(const std::string& path) { return fs::weakly_canonical(path).string(); }

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

void add_common(CLI::App* cmd, Common& c, bool features, bool format) {
  cmd->add_option("--sidecars", c.sidecars, "Directory of <digest>.cfv feature files")->envname("CREA_SIDECAR_DIR");
  if (features) cmd->add_flag("--fallback-features", c.fallback, "Use built-in baseline features when a sidecar is missing");
  cmd->add_flag("--squared,!--no-squared", c.squared, "Square block distances (default on)");
  cmd->add_flag("--dedup,!--no-dedup", c.dedup, "Deduplicate concepts before flexibility (default on)");
  cmd->add_flag("--include-shadow", c.include_shadow, "Keep shadow blocks in code trees");
  cmd->add_option("-j,--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--output", c.output, "Output file (default stdout)");
  if (format) {
    auto* f = cmd->add_option("--format", c.format, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));
    auto* j = cmd->add_flag_callback("--json", [&c] { c.format = "json"; }, "Same as --format json");
    auto* v = cmd->add_flag_callback("--csv", [&c] { c.format = "csv"; }, "Same as --format csv");
    auto* t = cmd->add_flag_callback("--table", [&c] { c.format = "table"; }, "Same as --format table");
    f->excludes(j)->excludes(v)->excludes(t);
    j->excludes(v)->excludes(t);
    v->excludes(t);
  }
}

// --- score ------------------------------------------------------------------

struct ScoreArgs {
  std::vector<std::string> inputs;
  std::string reference;
};

int cmd_score(const Common& c, const ScoreArgs& a) {
  const auto inputs = expand(a.inputs);
  if (inputs.empty()) throw crea::InvalidArgument("score: no projects given");
  std::vector<std::string> refs;
  if (!a.reference.empty()) {
    if (!fs::is_directory(a.reference)) throw crea::InvalidArgument("score: reference " + a.reference + " is not a directory");
    refs = expand({a.reference});
    if (refs.empty()) throw crea::InvalidArgument("score: reference directory " + a.reference + " has no .sb3 files");
  }

  std::vector<std::pair<std::string, std::string>> items;
  std::set<std::string> seen;
  auto add = [&](const std::vector<std::string>& list) {
    for (const auto& p : list)
      if (seen.insert(key_of(p)).second) items.emplace_back(key_of(p), p);
  };
  add(inputs);
  add(refs);
  crea::Corpus corpus(corpus_options(c));
  std::map<std::string, std::string> failed;
  for (const auto& f : corpus.load(items)) failed[f.id] = f.message;

  std::vector<std::string> ref_ids;
  for (const auto& r : refs)
    if (corpus.contains(key_of(r))) ref_ids.push_back(key_of(r));
  std::vector<std::string> input_ids;
  for (const auto& p : inputs)
    if (corpus.contains(key_of(p))) input_ids.push_back(key_of(p));
  corpus.precompute(input_ids, ref_ids);

  ordered_json rows = ordered_json::array();
  ordered_json errors = ordered_json::array();
  std::vector<crea::ProjectScores> scores;
  std::vector<std::string> score_paths;
  for (const auto& r : refs)
    if (failed.count(key_of(r)) && std::find(inputs.begin(), inputs.end(), r) == inputs.end())
      errors.push_back({{"path", r}, {"message", "reference: " + failed[key_of(r)]}});
  for (const auto& p : inputs) {
    const std::string id = key_of(p);
    if (failed.count(id)) {
      errors.push_back({{"path", p}, {"message", failed[id]}});
      continue;
    }
    std::vector<std::string> sample;
    for (const auto& r : ref_ids)
      if (r != id) sample.push_back(r);
    if (!a.reference.empty() && sample.empty()) {
      errors.push_back({{"path", p}, {"message", "reference sample is empty after leaving the project out"}});
      continue;
    }
    try {
      scores.push_back(corpus.scores(id, sample));
      score_paths.push_back(p);
    } catch (const crea::Error& e) {
      errors.push_back({{"path", p}, {"message", e.what()}});
    }
  }

  const auto names = crea::CreativityVector::names;
  auto is_orig = [](std::size_t k) { return k % 3 == 2; };
  std::string text;
  if (c.format == "json") {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const auto& s = scores[i];
      ordered_json f;
      const auto v = s.features.values();
      for (std::size_t k = 0; k < 9; ++k) f[names[k]] = (is_orig(k) && !s.has_originality) ? ordered_json(nullptr) : ordered_json(v[k]);
      rows.push_back({{"name", stem(score_paths[i])},
                      {"path", score_paths[i]},
                      {"features", f},
                      {"provenance", {{"visual", s.visual_source}, {"audio", s.audio_source}}},
                      {"reference_size", s.reference_size}});
    }
    text = ordered_json{{"projects", rows}, {"errors", errors}}.dump(2) + "\n";
  } else if (c.format == "csv") {
    text = "name";
    for (auto n : names) text += std::string(",") + n;
    text += ",visual_source,audio_source\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const auto v = scores[i].features.values();
      text += stem(score_paths[i]);
      for (std::size_t k = 0; k < 9; ++k) text += "," + ((is_orig(k) && !scores[i].has_originality) ? std::string() : num(v[k]));
      text += "," + scores[i].visual_source + "," + scores[i].audio_source + "\n";
    }
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-20s", "Project");
    text = buf;
    for (const char* h : {"CodeFlu", "CodeFlex", "CodeOrig", "VisFlu", "VisFlex", "VisOrig", "AudFlu", "AudFlex", "AudOrig"}) {
      std::snprintf(buf, sizeof buf, " %10s", h);
      text += buf;
    }
    text += "\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%-20s", stem(score_paths[i]).c_str());
      text += buf;
      const auto v = scores[i].features.values();
      for (std::size_t k = 0; k < 9; ++k) {
        if (is_orig(k) && !scores[i].has_originality)
          std::snprintf(buf, sizeof buf, " %10s", "-");
        else
          std::snprintf(buf, sizeof buf, " %10.4g", v[k]);
        text += buf;
      }
      text += "\n";
    }
  }
  emit(c, text);
  if (c.format != "json")
    for (const auto& e : errors)
      std::cerr << "error: " << e["path"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
  return errors.empty() ? 0 : 1;
}

// --- distance ---------------------------------------------------------------

struct DistanceArgs {
  std::string a, b;
  std::string modality = "code";
};

int cmd_distance(const Common& c, const DistanceArgs& d) {
  auto opt = corpus_options(c);
  opt.code_only = d.modality == "code";
  crea::Corpus corpus(opt);
  std::vector<std::pair<std::string, std::string>> items{{"a", d.a}};
  if (key_of(d.a) != key_of(d.b)) items.emplace_back("b", d.b);
  const auto failures = corpus.load(items);
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "error: " << f.path << ": " << f.message << "\n";
    return 1;
  }
  const std::string ib = corpus.contains("b") ? "b" : "a";
  double v = 0.0;
  if (d.modality == "code") {
    v = ib == "a" ? 0.0 : corpus.code_distance("a", ib);
  } else {
    const auto& pa = corpus.entry("a").media;
    const auto& pb = corpus.entry(ib).media;
    if (d.modality == "visual")
      v = crea::mean_pairwise_distance(std::span<const crea::AssetFeatures>(pa.images),
                                       std::span<const crea::AssetFeatures>(pb.images), crea::image_cost, false);
    else
      v = crea::mean_pairwise_distance(std::span<const crea::AssetFeatures>(pa.sounds),
                                       std::span<const crea::AssetFeatures>(pb.sounds), crea::sound_cost, false);
  }
  emit(c, num(v) + "\n");
  return 0;
}

// --- train / evaluate ---------------------------------------------------------

struct ModelArgs {
  std::string labels, weights, corpus;
  std::string mode = "all";
  std::string target = "all";
  std::uint64_t seed = crea::ExperimentConfig{}.seed;
  std::string tau = "b";
  double shrinkage = 0.3;
};

std::vector<crea::Mode> modes_of(const std::string& s) {
  if (s == "all") return {crea::Mode::per_expert, crea::Mode::combined};
  return {crea::parse_mode(s)};
}

std::vector<crea::Target> targets_of(const std::string& s) {
  if (s == "all") return {crea::Target::code, crea::Target::visual, crea::Target::audio, crea::Target::weighted};
  return {crea::parse_target(s)};
}

// Loads labels and the labeled projects from `<corpus>/<project_id>.sb3`.
// Returns false (after reporting) if anything is missing or fails.
bool load_labeled(const ModelArgs& m, crea::ExpertLabels& labels, crea::Corpus& corpus) {
  labels = crea::load_labels(m.labels, m.weights);
  std::vector<std::string> ids;
  for (const auto& r : labels.rows)
    if (std::find(ids.begin(), ids.end(), r.project_id) == ids.end()) ids.push_back(r.project_id);
  std::vector<std::string> missing;
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& id : ids) {
    const auto path = fs::path(m.corpus) / (id + ".sb3");
    if (!fs::is_regular_file(path))
      missing.push_back(id);
    else
      items.emplace_back(id, path.string());
  }
  if (!missing.empty()) {
    std::cerr << "error: labels cite projects missing from " << m.corpus << ":";
    for (const auto& id : missing) std::cerr << " " << id;
    std::cerr << "\n";
    return false;
  }
  const auto failures = corpus.load(items);
  for (const auto& f : failures) std::cerr << "error: " << f.path << ": " << f.message << "\n";
  if (!failures.empty()) return false;
  // every pair within an expert's projects is needed for leave-one-out originality
  for (const auto& e : labels.experts()) {
    std::vector<std::string> mine;
    for (const auto& r : labels.rows)
      if (r.expert_id == e) mine.push_back(r.project_id);
    corpus.precompute(mine, mine);
  }
  return true;
}

int cmd_train(const Common& c, const ModelArgs& m) {
  if (c.output.empty()) throw crea::InvalidArgument("train: -o <model file> is required");
  crea::ExpertLabels labels;
  crea::Corpus corpus(corpus_options(c));
  if (!load_labeled(m, labels, corpus)) return 1;
  std::vector<crea::NamedModel> models;
  for (auto mode : modes_of(m.mode))
    for (auto target : targets_of(m.target))
      for (auto& nm : crea::train_models(labels, corpus.feature_fn(), mode, target, m.shrinkage)) models.push_back(std::move(nm));
  std::ostringstream out;
  crea::write_models(out, models);
  emit(c, out.str());
  return 0;
}

int cmd_evaluate(const Common& c, const ModelArgs& m) {
  crea::ExpertLabels labels;
  crea::Corpus corpus(corpus_options(c));
  if (!load_labeled(m, labels, corpus)) return 1;
  crea::ExperimentConfig cfg;
  cfg.seed = m.seed;
  cfg.tau = crea::parse_tau_variant(m.tau);
  cfg.shrinkage = m.shrinkage;
  crea::EvalReport report;
  report.seed = cfg.seed;
  report.tau = cfg.tau;
  for (auto mode : modes_of(m.mode))
    for (auto target : targets_of(m.target))
      report.results.push_back(crea::run_experiment(labels, corpus.feature_fn(), mode, target, cfg));
  emit(c, c.format == "table" ? crea::to_table(report) : crea::to_json(report).dump(2) + "\n");
  return 0;
}

// --- extract-features ---------------------------------------------------------

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string out;
  bool images = false;
  bool sounds = false;
  std::string adapter;
};

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return q + "'";
}

int cmd_extract(const Common& c, ExtractArgs x) {
  if (!x.images && !x.sounds) x.images = x.sounds = true;
  const auto inputs = expand(x.inputs);
  if (inputs.empty()) throw crea::InvalidArgument("extract-features: no projects given");
  fs::create_directories(x.out);
  crea::ParseOptions popt;
  popt.include_shadow = c.include_shadow;
  std::vector<crea::Sb3Project> projects(inputs.size());
  const auto errors = crea::parallel_for(inputs.size(), c.jobs, [&](std::size_t i) { projects[i] = crea::parse_sb3(inputs[i], popt); });
  int failures = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << "error: " << inputs[i] << ": " << errors[i] << "\n";
      ++failures;
    }

  // unique assets by digest, first occurrence wins
  struct Job {
    const crea::Sb3Project* project;
    const crea::AssetRef* asset;
  };
  std::vector<Job> jobs;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!errors[i].empty()) continue;
    for (const auto* list : {&projects[i].images, &projects[i].sounds})
      for (const auto& a : *list) {
        if ((a.kind == crea::AssetKind::image && !x.images) || (a.kind == crea::AssetKind::sound && !x.sounds)) continue;
        if (seen.insert(a.digest).second) jobs.push_back({&projects[i], &a});
      }
  }

  if (!x.adapter.empty()) {
    const fs::path staging = fs::temp_directory_path() / ("crea-assets-" + std::to_string(std::hash<std::string>{}(x.out)) + "-" +
                                                          std::to_string(::getpid()));
    fs::create_directories(staging);
    for (const auto& j : jobs) {
      const auto ext = fs::path(j.asset->filename).extension().string();
      crea::write_file((staging / (j.asset->digest + ext)).string(), j.project->asset_bytes(*j.asset));
    }
    std::string cmd = x.adapter + " extract --in " + shell_quote(staging.string()) + " --out " + shell_quote(x.out);
    if (x.images) cmd += " --images";
    if (x.sounds) cmd += " --sounds";
    const int rc = std::system(cmd.c_str());
    fs::remove_all(staging);
    if (rc != 0) {
      std::cerr << "error: adapter failed (" << cmd << ")\n";
      return 1;
    }
    return failures ? 1 : 0;
  }

  const crea::AudioFrameConfig frames;
  const auto job_errors = crea::parallel_for(jobs.size(), c.jobs, [&](std::size_t i) {
    const auto& j = jobs[i];
    const auto m = crea::baseline_features(*j.project, *j.asset, frames);
    crea::write_sidecar(x.out, j.asset->digest,
                        j.asset->kind == crea::AssetKind::image ? crea::FeatureKind::image : crea::FeatureKind::audio, m);
  });
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!job_errors[i].empty()) {
      std::cerr << "error: " << jobs[i].asset->digest << " (" << jobs[i].asset->filename << " in " << jobs[i].project->name
                << "): " << job_errors[i] << "\n";
      ++failures;
    }
  std::cerr << "wrote " << (jobs.size() - static_cast<std::size_t>(std::count_if(job_errors.begin(), job_errors.end(),
                                                                                    [](const std::string& e) { return !e.empty(); })))
            << " sidecars to " << x.out << "\n";
  return failures ? 1 : 0;
}

// --- inspect ------------------------------------------------------------------

int cmd_inspect(const Common& c, const std::string& path) {
  crea::ParseOptions popt;
  popt.include_shadow = c.include_shadow;
  emit(c, crea::summary_json(crea::parse_sb3(path, popt)).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based creativity measures for Scratch projects"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "crea 1.0");

  Common score_c, dist_c, train_c, eval_c, extract_c, inspect_c;

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Nine creativity features per project");
  s->add_option("projects", score.inputs, "Project files or directories")->required();
  s->add_option("-r,--reference", score.reference, "Directory of reference projects for originality");
  add_common(s, score_c, true, true);

  DistanceArgs dist;
  auto* d = app.add_subcommand("distance", "Product distance between two projects");
  d->add_option("a", dist.a)->required()->check(CLI::ExistingFile);
  d->add_option("b", dist.b)->required()->check(CLI::ExistingFile);
  d->add_option("-m,--modality", dist.modality, "code, visual or audio")->check(CLI::IsMember({"code", "visual", "audio"}));
  add_common(d, dist_c, true, false);

  ModelArgs train, eval;
  auto model_opts = [](CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--labels", m.labels, "Labels CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--weights", m.weights, "Expert weights CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", m.corpus, "Directory holding <project_id>.sb3")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--mode", m.mode, "per-expert, combined or all")->check(CLI::IsMember({"per-expert", "combined", "all"}));
    cmd->add_option("--target", m.target, "code, visual, audio, weighted or all")
        ->check(CLI::IsMember({"code", "visual", "audio", "weighted", "all"}));
    cmd->add_option("--shrinkage", m.shrinkage, "Boosting learning rate")->check(CLI::Range(1e-6, 1.0));
  };
  auto* t = app.add_subcommand("train", "Fit and save boosted-tree models");
  model_opts(t, train);
  add_common(t, train_c, true, false);

  auto* e = app.add_subcommand("evaluate", "Cross-validated Kendall tau report");
  model_opts(e, eval);
  e->add_option("--seed", eval.seed, "Fold seed");
  e->add_option("--tau-variant", eval.tau, "b (tie-adjusted) or a")->check(CLI::IsMember({"a", "b"}));
  add_common(e, eval_c, true, false);
  eval_c.format = "json";
  e->add_option("--format", eval_c.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  ExtractArgs ext;
  auto* x = app.add_subcommand("extract-features", "Write CFV1 sidecars for project assets");
  x->add_option("projects", ext.inputs, "Project files or directories")->required();
  x->add_option("--out", ext.out, "Sidecar output directory")->required();
  x->add_flag("--images", ext.images, "Only images");
  x->add_flag("--sounds", ext.sounds, "Only sounds");
  x->add_option("--adapter", ext.adapter, "External extractor command")->envname("CREA_ADAPTER");
  x->add_flag("--include-shadow", extract_c.include_shadow);
  x->add_option("-j,--jobs", extract_c.jobs)->check(CLI::PositiveNumber);

  std::string inspect_path;
  auto* in = app.add_subcommand("inspect", "Print a project summary as JSON");
  in->add_option("project", inspect_path)->required()->check(CLI::ExistingFile);
  in->add_flag("--include-shadow", inspect_c.include_shadow);
  in->add_option("-o,--output", inspect_c.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) return cmd_score(score_c, score);
    if (d->parsed()) return cmd_distance(dist_c, dist);
    if (t->parsed()) return cmd_train(train_c, train);
    if (e->parsed()) return cmd_evaluate(eval_c, eval);
    if (x->parsed()) return cmd_extract(extract_c, ext);
    if (in->parsed()) return cmd_inspect(inspect_c, inspect_path);
  } catch (const crea::InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "crea/code_pipeline.hpp"
#include "crea/experiment.hpp"
#include "crea/media.hpp"
#include "crea/sb3.hpp"

namespace crea {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Returns the error
/// message of each failed index (empty on success).
template <class Fn>
std::vector<std::string> parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const unsigned t = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (t == 1) {
    work();
    return errors;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < t; ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return errors;
}

struct CorpusOptions {
  ParseOptions parse;
  CodeOptions code;
  FeatureSource features;
  unsigned jobs = 1;
  /// Skip image and sound features (code-only use).
  bool code_only = false;
};

/// A project together with everything derived from it once.
struct CorpusEntry {
  std::string id;
  std::string path;
  Sb3Project project;
  ProjectMedia media;
  std::unique_ptr<PreparedCode> code;
  ModalityScores code_self, visual_self, audio_self;
};

/// Scores returned for one project.
struct ProjectScores {
  std::string id;
  CreativityVector features;
  bool has_originality = false;
  std::string visual_source;
  std::string audio_source;
  std::size_t reference_size = 0;
};

/// A set of loaded projects with cached pairwise terms. Projects are
/// addressed by id (the file stem unless given explicitly).
class Corpus {
 public:
  struct Failure {
    std::string id;
    std::string path;
    std::string message;
  };

  explicit Corpus(CorpusOptions opt = {}) : opt_(std::move(opt)) {}

  const CorpusOptions& options() const noexcept { return opt_; }

  /// Loads (id, path) pairs in parallel. Items that fail are skipped and
  /// reported; ids must be unique.
  std::vector<Failure> load(const std::vector<std::pair<std::string, std::string>>& items) {
    std::vector<std::unique_ptr<CorpusEntry>> fresh(items.size());
    for (const auto& [id, path] : items)
      if (index_.count(id)) throw InvalidArgument("duplicate project id " + id);
    const auto errors = parallel_for(items.size(), opt_.jobs, [&](std::size_t i) {
      auto e = std::make_unique<CorpusEntry>();
      e->id = items[i].first;
      e->path = items[i].second;
      e->project = parse_sb3(e->path, opt_.parse);
      e->project.name = e->id;
      if (!opt_.code_only) e->media = load_media(e->project, opt_.features);
      e->code = std::make_unique<PreparedCode>(e->project);
      e->code_self = code_creativity(e->project, {}, opt_.code);
      e->visual_self = visual_creativity(e->media, {});
      e->audio_self = audio_creativity(e->media, {});
      fresh[i] = std::move(e);
    });
    std::vector<Failure> failures;
    std::map<std::string, bool> batch;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!batch.emplace(items[i].first, true).second) throw InvalidArgument("duplicate project id " + items[i].first);
      if (!errors[i].empty()) {
        failures.push_back({items[i].first, items[i].second, errors[i]});
        continue;
      }
      index_[items[i].first] = entries_.size();
      entries_.push_back(std::move(fresh[i]));
    }
    return failures;
  }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }

  const CorpusEntry& entry(const std::string& id) const { return *entries_[at(id)]; }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e->id);
    return out;
  }

  /// Code distance between two loaded projects.
  double code_distance(const std::string& a, const std::string& b) {
    ensure({{at(a), at(b)}});
    return pair(at(a), at(b)).code;
  }

  /// Computes every missing pair between `rows` and `cols` in parallel.
  void precompute(const std::vector<std::string>& rows, const std::vector<std::string>& cols) {
    std::vector<std::pair<std::size_t, std::size_t>> want;
    for (const auto& r : rows)
      for (const auto& c : cols)
        if (r != c) want.emplace_back(at(r), at(c));
    ensure(want);
  }

  /// All nine features; originality against `reference` (which must not be
  /// empty and must not contain `id`).
  CreativityVector features(const std::string& id, const std::vector<std::string>& reference) {
    return scores(id, reference).features;
  }

  ProjectScores scores(const std::string& id, const std::vector<std::string>& reference) {
    const std::size_t i = at(id);
    std::vector<std::size_t> refs;
    for (const auto& r : reference) {
      const std::size_t j = at(r);
      if (j == i) throw InvalidArgument("project " + id + " is in its own reference sample");
      refs.push_back(j);
    }
    const CorpusEntry& e = *entries_[i];
    ProjectScores s;
    s.id = id;
    s.reference_size = refs.size();
    s.visual_source = provenance(e.media.images);
    s.audio_source = provenance(e.media.sounds);
    auto& f = s.features;
    f.code_fluency = e.code_self.fluency;
    f.code_flexibility = e.code_self.flexibility;
    f.visual_fluency = e.visual_self.fluency;
    f.visual_flexibility = e.visual_self.flexibility;
    f.audio_fluency = e.audio_self.fluency;
    f.audio_flexibility = e.audio_self.flexibility;
    if (refs.empty()) return s;

    std::vector<std::pair<std::size_t, std::size_t>> want;
    for (auto j : refs) want.emplace_back(i, j);
    ensure(want);
    double code = 0.0;
    std::vector<CrossTerms> vis, aud;
    for (auto j : refs) {
      const auto& t = pair(i, j);
      code += t.code;
      vis.push_back(t.visual);
      aud.push_back(t.audio);
    }
    f.code_originality = code / static_cast<double>(refs.size());
    f.visual_originality = pooled_originality(std::span<const AssetFeatures>(e.media.images),
                                              std::span<const CrossTerms>(vis), image_cost);
    f.audio_originality = pooled_originality(std::span<const AssetFeatures>(e.media.sounds),
                                             std::span<const CrossTerms>(aud), sound_cost);
    s.has_originality = true;
    return s;
  }

  /// Adapter for the experiment driver.
  FeatureFn feature_fn() {
    return [this](const std::string& id, const std::vector<std::string>& ref) { return features(id, ref); };
  }

 private:
  struct PairTerms {
    double code = 0.0;
    CrossTerms visual, audio;
  };

  std::size_t at(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw UnknownId(id, "project");
    return it->second;
  }

  static std::pair<std::size_t, std::size_t> key(std::size_t a, std::size_t b) { return {std::min(a, b), std::max(a, b)}; }

  const PairTerms& pair(std::size_t a, std::size_t b) const { return pairs_.at(key(a, b)); }

  void ensure(const std::vector<std::pair<std::size_t, std::size_t>>& want) {
    std::vector<std::pair<std::size_t, std::size_t>> todo;
    std::map<std::pair<std::size_t, std::size_t>, bool> queued;
    for (const auto& [a, b] : want) {
      const auto k = key(a, b);
      if (!pairs_.count(k) && queued.emplace(k, true).second) todo.push_back(k);
    }
    std::vector<PairTerms> out(todo.size());
    const auto errors = parallel_for(todo.size(), opt_.jobs, [&](std::size_t n) {
      const CorpusEntry& x = *entries_[todo[n].first];
      const CorpusEntry& y = *entries_[todo[n].second];
      PairTerms t;
      t.code = code_project_distance(*x.code, *y.code, opt_.code.squared);
      t.visual = cross_terms(std::span<const AssetFeatures>(x.media.images), y.media.images, image_cost);
      t.audio = cross_terms(std::span<const AssetFeatures>(x.media.sounds), y.media.sounds, sound_cost);
      out[n] = t;
    });
    for (std::size_t n = 0; n < todo.size(); ++n) {
      if (!errors[n].empty())
        throw Error("comparing " + entries_[todo[n].first]->id + " with " + entries_[todo[n].second]->id + ": " +
                    errors[n]);
      pairs_.emplace(todo[n], out[n]);
    }
  }

  CorpusOptions opt_;
  std::vector<std::unique_ptr<CorpusEntry>> entries_;
  std::map<std::string, std::size_t> index_;
  std::map<std::pair<std::size_t, std::size_t>, PairTerms> pairs_;
};

}  // namespace crea

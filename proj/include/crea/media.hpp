#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "crea/audio.hpp"
#include "crea/cfv.hpp"
#include "crea/code_pipeline.hpp"
#include "crea/distances.hpp"
#include "crea/image.hpp"
#include "crea/measures.hpp"
#include "crea/sb3.hpp"

namespace crea {

enum class FeatureOrigin { sidecar, baseline };

inline const char* to_string(FeatureOrigin o) { return o == FeatureOrigin::sidecar ? "sidecar" : "baseline"; }

/// Where asset features come from: `<sidecar_dir>/<digest>.cfv` when
/// present, otherwise the built-in baseline if `fallback` is set.
struct FeatureSource {
  std::optional<std::filesystem::path> sidecar_dir;
  bool fallback = false;
  AudioFrameConfig frames;
};

/// Features of one asset instance. Images carry a single row.
struct AssetFeatures {
  std::string digest;
  Matrix features;
  FeatureOrigin origin = FeatureOrigin::sidecar;

  friend bool operator==(const AssetFeatures& a, const AssetFeatures& b) { return a.digest == b.digest; }
};

struct ProjectMedia {
  std::vector<AssetFeatures> images;
  std::vector<AssetFeatures> sounds;
};

/// Computes baseline features for an asset from its bytes.
inline Matrix baseline_features(const Sb3Project& p, const AssetRef& a, const AudioFrameConfig& frames = {}) {
  const Bytes& bytes = p.asset_bytes(a);
  if (a.kind == AssetKind::image) {
    const auto h = baseline_image_embedding(decode_image(bytes));
    Matrix m(1, h.size());
    m.data = h;
    return m;
  }
  return baseline_audio_features(decode_wav(bytes), frames);
}

/// Loads features for every image and sound of a project. Throws
/// MissingFeatures naming every asset that has neither a sidecar nor (with
/// fallback enabled) usable baseline features.
inline ProjectMedia load_media(const Sb3Project& p, const FeatureSource& src) {
  ProjectMedia out;
  std::vector<std::string> missing;
  std::set<std::string> seen_missing;
  std::string reasons;
  auto one = [&](const AssetRef& a, std::vector<AssetFeatures>& dst) {
    const FeatureKind kind = a.kind == AssetKind::image ? FeatureKind::image : FeatureKind::audio;
    if (src.sidecar_dir && std::filesystem::exists(sidecar_path(*src.sidecar_dir, a.digest))) {
      dst.push_back({a.digest, load_sidecar(*src.sidecar_dir, a.digest, kind).matrix, FeatureOrigin::sidecar});
      return;
    }
    if (src.fallback) {
      try {
        dst.push_back({a.digest, baseline_features(p, a, src.frames), FeatureOrigin::baseline});
        return;
      } catch (const Error& e) {
        reasons += "; " + a.filename + ": " + e.what();
      }
    }
    if (seen_missing.insert(a.digest).second) missing.push_back(a.digest);
  };
  for (const auto& a : p.images) one(a, out.images);
  for (const auto& a : p.sounds) one(a, out.sounds);
  if (!missing.empty()) {
    MissingFeatures err(missing);
    if (reasons.empty()) throw err;
    throw MissingFeatures(missing, std::string(err.what()) + " (" + reasons.substr(2) + ")");
  }
  for (const auto* list : {&out.images, &out.sounds})
    for (const auto& f : *list)
      if (f.features.cols != list->front().features.cols)
        throw InvalidArgument("project " + p.name + ": feature dimensions differ between assets " +
                              list->front().digest + " and " + f.digest);
  return out;
}

/// Cosine distance between image embeddings; null is the zero vector.
inline double image_cost(const AssetFeatures* a, const AssetFeatures* b) {
  if (a == nullptr && b == nullptr) return 0.0;
  if (a == nullptr || b == nullptr) return frobenius_norm((a ? a : b)->features) > 0.0 ? 1.0 : 0.0;
  return cosine_distance(a->features.data, b->features.data);
}

/// Padded Frobenius distance between feature matrices; null is the empty
/// matrix.
inline double sound_cost(const AssetFeatures* a, const AssetFeatures* b) {
  if (a == nullptr && b == nullptr) return 0.0;
  if (a == nullptr || b == nullptr) return frobenius_norm((a ? a : b)->features);
  return matrix_distance(a->features, b->features);
}

/// Cross-pair sum between two asset lists.
struct CrossTerms {
  double sum = 0.0;
  std::size_t count = 0;
};

template <class Cost>
CrossTerms cross_terms(std::span<const AssetFeatures> a, std::span<const AssetFeatures> b, Cost&& cost) {
  CrossTerms t;
  for (const auto& x : a)
    for (const auto& y : b) t.sum += cost(&x, &y);
  t.count = a.size() * b.size();
  return t;
}

/// Pooled originality: the mean distance over every cross pair with the
/// reference assets. When the references hold no assets at all, each asset
/// is compared with null. A project without assets scores zero.
template <class Cost>
double pooled_originality(std::span<const AssetFeatures> assets, std::span<const CrossTerms> refs, Cost&& cost) {
  if (assets.empty()) return 0.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : refs) {
    sum += r.sum;
    count += r.count;
  }
  if (count == 0) return mean_pairwise_distance(assets, std::span<const AssetFeatures>{}, cost, false);
  return sum / static_cast<double>(count);
}

namespace detail {

template <class Cost>
ModalityScores media_scores(std::span<const AssetFeatures> assets, const std::vector<std::span<const AssetFeatures>>& sample,
                            bool with_sample, Cost&& cost) {
  ModalityScores s;
  s.fluency = fluency(assets, cost, false);
  s.flexibility = flexibility(assets, cost, false, true);
  if (with_sample) {
    std::vector<CrossTerms> refs;
    for (const auto& r : sample) refs.push_back(cross_terms(assets, r, cost));
    s.originality = pooled_originality(assets, std::span<const CrossTerms>(refs), cost);
  }
  return s;
}

}  // namespace detail

/// Visual fluency, flexibility (distinct images) and, for a non-empty
/// sample, pooled originality.
inline ModalityScores visual_creativity(const ProjectMedia& p, std::span<const ProjectMedia> sample) {
  std::vector<std::span<const AssetFeatures>> refs;
  for (const auto& q : sample) refs.emplace_back(q.images);
  return detail::media_scores(std::span<const AssetFeatures>(p.images), refs, !sample.empty(), image_cost);
}

inline ModalityScores audio_creativity(const ProjectMedia& p, std::span<const ProjectMedia> sample) {
  std::vector<std::span<const AssetFeatures>> refs;
  for (const auto& q : sample) refs.emplace_back(q.sounds);
  return detail::media_scores(std::span<const AssetFeatures>(p.sounds), refs, !sample.empty(), sound_cost);
}

/// "sidecar", "baseline", "mixed" or "none" for a list of assets.
inline std::string provenance(const std::vector<AssetFeatures>& assets) {
  bool side = false, base = false;
  for (const auto& a : assets) (a.origin == FeatureOrigin::sidecar ? side : base) = true;
  if (side && base) return "mixed";
  if (side) return "sidecar";
  if (base) return "baseline";
  return "none";
}

}  // namespace crea

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "crea/blocks.hpp"
#include "crea/error.hpp"
#include "crea/tree_edit.hpp"
#include "crea/zip.hpp"

namespace crea {

using BlockTree = Tree<BlockConcept>;

struct SpriteCode {
  std::string name;
  std::vector<BlockTree> scripts;
  std::size_t block_count = 0;
};

enum class AssetKind { image, sound };

inline const char* to_string(AssetKind k) { return k == AssetKind::image ? "image" : "sound"; }

struct AssetRef {
  std::string digest;
  std::string filename;
  AssetKind kind = AssetKind::image;
  std::optional<double> sample_rate;
};

struct Sb3Project {
  std::string name;
  SpriteCode stage;
  std::vector<SpriteCode> sprites;
  std::vector<AssetRef> images;
  std::vector<AssetRef> sounds;
  /// Asset bytes by archive filename.
  std::map<std::string, Bytes> files;

  std::size_t block_count() const {
    std::size_t n = stage.block_count;
    for (const auto& s : sprites) n += s.block_count;
    return n;
  }

  /// Every block instance, stage first, in preorder.
  std::vector<BlockConcept> blocks() const {
    std::vector<BlockConcept> out;
    auto add = [&](const SpriteCode& s) {
      for (const auto& t : s.scripts) t.for_each_preorder([&](const BlockConcept& b) { out.push_back(b); });
    };
    add(stage);
    for (const auto& s : sprites) add(s);
    return out;
  }

  const Bytes& asset_bytes(const AssetRef& a) const {
    const auto it = files.find(a.filename);
    if (it == files.end()) throw UnknownId(a.filename, "asset file");
    return it->second;
  }
};

struct ParseOptions {
  bool include_shadow = false;
};

namespace detail {

inline bool is_hex(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::optional<AssetKind> kind_of_extension(const std::string& ext) {
  static const std::set<std::string> images{"png", "svg", "jpg", "jpeg", "bmp", "gif"};
  static const std::set<std::string> sounds{"wav", "mp3", "ogg", "wave"};
  const auto e = lower(ext);
  if (images.count(e)) return AssetKind::image;
  if (sounds.count(e)) return AssetKind::sound;
  return std::nullopt;
}

class ScriptBuilder {
 public:
  ScriptBuilder(const nlohmann::ordered_json& blocks, const std::string& target, const ParseOptions& opt)
      : blocks_(blocks), target_(target), opt_(opt) {}

  /// Builds the trees rooted at `id`. A shadow block yields its non-shadow
  /// descendants when shadows are excluded.
  std::vector<BlockTree> build(const std::string& id) {
    if (!blocks_.contains(id)) throw FormatError("sb3: target '" + target_ + "' references missing block " + id);
    const auto& b = blocks_.at(id);
    if (!b.is_object()) return {};
    if (!visited_.insert(id).second)
      throw FormatError("sb3: target '" + target_ + "' has a cycle or shared reference at block " + id);
    if (!b.contains("opcode") || !b["opcode"].is_string())
      throw FormatError("sb3: block " + id + " in target '" + target_ + "' has no opcode");

    std::vector<BlockTree> children;
    if (b.contains("inputs") && b["inputs"].is_object()) {
      for (const auto& [name, input] : b["inputs"].items()) {
        if (!input.is_array()) continue;
        for (std::size_t k = 1; k < input.size() && k <= 2; ++k)
          if (input[k].is_string()) append(children, build(input[k].get<std::string>()));
      }
    }
    if (b.contains("next") && b["next"].is_string()) append(children, build(b["next"].get<std::string>()));

    const bool shadow = b.value("shadow", false);
    if (shadow && !opt_.include_shadow) return children;

    std::string proccode;
    if (b.contains("mutation") && b["mutation"].is_object() && b["mutation"].contains("proccode") &&
        b["mutation"]["proccode"].is_string())
      proccode = b["mutation"]["proccode"].get<std::string>();
    BlockTree t{make_block(b["opcode"].get<std::string>(), proccode), std::move(children)};
    std::vector<BlockTree> out;
    out.push_back(std::move(t));
    return out;
  }

 private:
  static void append(std::vector<BlockTree>& dst, std::vector<BlockTree> src) {
    for (auto& t : src) dst.push_back(std::move(t));
  }

  const nlohmann::ordered_json& blocks_;
  const std::string& target_;
  const ParseOptions& opt_;
  std::set<std::string> visited_;
};

inline SpriteCode parse_target_code(const nlohmann::ordered_json& target, const std::string& name,
                                    const ParseOptions& opt) {
  SpriteCode code;
  code.name = name;
  if (!target.contains("blocks")) return code;
  const auto& blocks = target["blocks"];
  if (!blocks.is_object()) throw FormatError("sb3: target '" + name + "' has malformed blocks");
  ScriptBuilder builder(blocks, name, opt);
  for (const auto& [id, b] : blocks.items()) {
    if (!b.is_object() || !b.value("topLevel", false)) continue;
    for (auto& t : builder.build(id)) code.scripts.push_back(std::move(t));
  }
  for (const auto& t : code.scripts) code.block_count += t.size();
  return code;
}

inline AssetRef parse_asset(const nlohmann::ordered_json& entry, AssetKind kind, const std::string& target,
                            const ZipArchive& zip) {
  const char* what = kind == AssetKind::image ? "costume" : "sound";
  if (!entry.is_object() || !entry.contains("assetId") || !entry["assetId"].is_string())
    throw FormatError(std::string("sb3: ") + what + " without assetId in target '" + target + "'");
  AssetRef a;
  a.kind = kind;
  const std::string id = entry["assetId"].get<std::string>();
  if (!is_hex(id)) throw FormatError(std::string("sb3: ") + what + " asset id '" + id + "' is not hex");
  a.digest = lower(id);
  if (entry.contains("md5ext") && entry["md5ext"].is_string())
    a.filename = entry["md5ext"].get<std::string>();
  else if (entry.contains("dataFormat") && entry["dataFormat"].is_string())
    a.filename = id + "." + entry["dataFormat"].get<std::string>();
  else
    throw FormatError(std::string("sb3: ") + what + " " + id + " has no file name");
  const auto dot = a.filename.rfind('.');
  const auto ext_kind = kind_of_extension(dot == std::string::npos ? "" : a.filename.substr(dot + 1));
  if (ext_kind != kind)
    throw FormatError(std::string("sb3: ") + what + " file '" + a.filename + "' has the wrong extension");
  if (!zip.contains(a.filename)) throw UnknownId(a.filename, "asset file");
  if (kind == AssetKind::sound && entry.contains("rate") && entry["rate"].is_number())
    a.sample_rate = entry["rate"].get<double>();
  return a;
}

}  // namespace detail

/// Parses an in-memory .sb3 archive.
inline Sb3Project parse_sb3_bytes(Bytes bytes, const std::string& name, const ParseOptions& opt = {}) {
  const ZipArchive zip(std::move(bytes));
  if (!zip.contains("project.json")) throw FormatError("sb3: " + name + " has no project.json");
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(zip.read_text("project.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("sb3: " + name + ": project.json: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("targets") || !doc["targets"].is_array())
    throw FormatError("sb3: " + name + ": project.json has no targets");

  Sb3Project p;
  p.name = name;
  int stages = 0;
  for (const auto& t : doc["targets"]) {
    if (!t.is_object()) throw FormatError("sb3: " + name + ": malformed target");
    const std::string tname = t.value("name", std::string());
    SpriteCode code = detail::parse_target_code(t, tname, opt);
    if (t.value("isStage", false)) {
      ++stages;
      p.stage = std::move(code);
    } else {
      p.sprites.push_back(std::move(code));
    }
    if (t.contains("costumes") && t["costumes"].is_array())
      for (const auto& c : t["costumes"]) p.images.push_back(detail::parse_asset(c, AssetKind::image, tname, zip));
    if (t.contains("sounds") && t["sounds"].is_array())
      for (const auto& s : t["sounds"]) p.sounds.push_back(detail::parse_asset(s, AssetKind::sound, tname, zip));
  }
  if (stages != 1) throw FormatError("sb3: " + name + " has " + std::to_string(stages) + " stages, expected one");
  for (const auto* list : {&p.images, &p.sounds})
    for (const auto& a : *list)
      if (!p.files.count(a.filename)) p.files.emplace(a.filename, zip.read(a.filename));
  return p;
}

/// Parses a .sb3 file. The project name is the file stem.
inline Sb3Project parse_sb3(const std::string& path, const ParseOptions& opt = {}) {
  return parse_sb3_bytes(read_file(path), std::filesystem::path(path).stem().string(), opt);
}

// --- summary ----------------------------------------------------------------

/// Debug summary: per-target script and block counts, block counts per
/// taxonomy, and the asset inventory.
inline nlohmann::ordered_json summary_json(const Sb3Project& p) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = p.name;
  j["block_count"] = p.block_count();
  j["targets"] = ordered_json::array();
  auto target = [&](const SpriteCode& s, bool stage) {
    j["targets"].push_back({{"name", s.name}, {"is_stage", stage}, {"scripts", s.scripts.size()},
                            {"blocks", s.block_count}});
  };
  target(p.stage, true);
  for (const auto& s : p.sprites) target(s, false);

  std::map<std::string, std::size_t> pre, ext;
  std::size_t custom = 0;
  for (const auto& b : p.blocks()) {
    switch (b.taxonomy.family) {
      case BlockFamily::predefined: ++pre[b.taxonomy.group]; break;
      case BlockFamily::extension: ++ext[b.taxonomy.group]; break;
      case BlockFamily::custom: ++custom; break;
    }
  }
  j["taxonomy"] = {{"predefined", pre}, {"extension", ext}, {"custom", custom}};
  auto assets = [](const std::vector<AssetRef>& list) {
    ordered_json a = ordered_json::array();
    for (const auto& r : list) {
      ordered_json e{{"digest", r.digest}, {"filename", r.filename}, {"kind", to_string(r.kind)}};
      if (r.sample_rate) e["sample_rate"] = *r.sample_rate;
      a.push_back(std::move(e));
    }
    return a;
  };
  j["images"] = assets(p.images);
  j["sounds"] = assets(p.sounds);
  return j;
}

/// The parts of a summary that survive a round trip.
struct ProjectSummary {
  std::string name;
  std::size_t block_count = 0;
  std::vector<std::size_t> target_blocks;
  std::vector<std::string> image_digests;
  std::vector<std::string> sound_digests;

  friend bool operator==(const ProjectSummary&, const ProjectSummary&) = default;
};

inline ProjectSummary summarize(const Sb3Project& p) {
  ProjectSummary s{p.name, p.block_count(), {p.stage.block_count}, {}, {}};
  for (const auto& t : p.sprites) s.target_blocks.push_back(t.block_count);
  for (const auto& a : p.images) s.image_digests.push_back(a.digest);
  for (const auto& a : p.sounds) s.sound_digests.push_back(a.digest);
  return s;
}

inline ProjectSummary summary_from_json(const nlohmann::ordered_json& j) {
  try {
    ProjectSummary s;
    s.name = j.at("name").get<std::string>();
    s.block_count = j.at("block_count").get<std::size_t>();
    for (const auto& t : j.at("targets")) s.target_blocks.push_back(t.at("blocks").get<std::size_t>());
    for (const auto& a : j.at("images")) s.image_digests.push_back(a.at("digest").get<std::string>());
    for (const auto& a : j.at("sounds")) s.sound_digests.push_back(a.at("digest").get<std::string>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("summary: ") + e.what());
  }
}

}  // namespace crea

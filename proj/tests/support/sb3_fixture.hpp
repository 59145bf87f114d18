#pragma once

// Builds .sb3 archives in memory for tests.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "crea/audio.hpp"
#include "crea/image.hpp"
#include "crea/zip.hpp"

namespace fixture {

using crea::Bytes;

inline std::string md5_hex(const Bytes& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_md5(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

/// A block with input chains (each input is a script) and an optional
/// custom-block proccode.
struct Block {
  std::string opcode;
  std::vector<std::vector<Block>> inputs = {};
  std::string proccode = {};
  bool shadow = false;
};

using Script = std::vector<Block>;

struct Asset {
  std::string ext;
  Bytes bytes;
  double rate = 0.0;
};

struct Target {
  std::string name;
  std::vector<Script> scripts;
  std::vector<Asset> costumes;
  std::vector<Asset> sounds;
};

struct Project {
  Target stage{"Stage", {}, {}, {}};
  std::vector<Target> sprites;
};

namespace detail {

class BlockWriter {
 public:
  explicit BlockWriter(nlohmann::ordered_json& blocks) : blocks_(blocks) {}

  // Writes a chain and returns the id of its first block.
  std::string chain(const Script& s, const std::string& parent, bool top) {
    std::string first, prev;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string id = "b" + std::to_string(++counter_);
      nlohmann::ordered_json j;
      j["opcode"] = s[i].opcode;
      j["next"] = nullptr;
      j["parent"] = i == 0 ? (parent.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(parent))
                           : nlohmann::ordered_json(prev);
      j["inputs"] = nlohmann::ordered_json::object();
      j["fields"] = nlohmann::ordered_json::object();
      j["shadow"] = s[i].shadow;
      j["topLevel"] = top && i == 0;
      if (!s[i].proccode.empty()) j["mutation"] = {{"tagName", "mutation"}, {"proccode", s[i].proccode}};
      blocks_[id] = j;
      for (std::size_t k = 0; k < s[i].inputs.size(); ++k) {
        const auto& in = s[i].inputs[k];
        if (in.empty()) continue;
        const std::string child = chain(in, id, false);
        blocks_[id]["inputs"]["IN" + std::to_string(k)] = {in[0].shadow ? 1 : 2, child};
      }
      if (i == 0)
        first = id;
      else
        blocks_[prev]["next"] = id;
      prev = id;
    }
    return first;
  }

 private:
  nlohmann::ordered_json& blocks_;
  int counter_ = 0;
};

inline nlohmann::ordered_json target_json(const Target& t, bool stage, crea::ZipWriter& zip) {
  nlohmann::ordered_json j;
  j["isStage"] = stage;
  j["name"] = t.name;
  j["blocks"] = nlohmann::ordered_json::object();
  BlockWriter w(j["blocks"]);
  for (const auto& s : t.scripts) w.chain(s, "", true);
  auto assets = [&](const std::vector<Asset>& list, bool sound) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& a = list[i];
      const std::string md5 = md5_hex(a.bytes);
      nlohmann::ordered_json e{{"name", (sound ? "sound" : "costume") + std::to_string(i + 1)},
                               {"assetId", md5},
                               {"dataFormat", a.ext},
                               {"md5ext", md5 + "." + a.ext}};
      if (sound) e["rate"] = a.rate;
      arr.push_back(e);
      zip.add(md5 + "." + a.ext, a.bytes);
    }
    return arr;
  };
  j["costumes"] = assets(t.costumes, false);
  j["sounds"] = assets(t.sounds, true);
  return j;
}

}  // namespace detail

inline Bytes build_sb3(const Project& p) {
  crea::ZipWriter zip;
  nlohmann::ordered_json doc;
  doc["targets"] = nlohmann::ordered_json::array();
  doc["targets"].push_back(detail::target_json(p.stage, true, zip));
  for (const auto& s : p.sprites) doc["targets"].push_back(detail::target_json(s, false, zip));
  doc["meta"] = {{"semver", "3.0.0"}};
  zip.add("project.json", doc.dump());
  return zip.finish();
}

inline Asset png_asset(std::size_t w, std::size_t h, unsigned char r, unsigned char g, unsigned char b) {
  crea::RgbaImage img{w, h, {}};
  img.pixels.resize(w * h * 4);
  for (std::size_t i = 0; i < w * h; ++i) {
    img.pixels[i * 4] = r;
    img.pixels[i * 4 + 1] = g;
    img.pixels[i * 4 + 2] = b;
    img.pixels[i * 4 + 3] = 255;
  }
  return {"png", crea::encode_png(img), 0.0};
}

inline crea::MonoAudio sine(double freq, double rate, std::size_t n, double amp = 0.5) {
  crea::MonoAudio a{rate, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) a.samples[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate);
  return a;
}

inline Asset wav_asset(const crea::MonoAudio& a) { return {"wav", crea::encode_wav(a), a.rate}; }

}  // namespace fixture

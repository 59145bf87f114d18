#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "crea/concept.hpp"
#include "crea/error.hpp"

namespace crea {

enum class FeatureKind { image, audio };

inline const char* to_string(FeatureKind k) { return k == FeatureKind::image ? "image" : "audio"; }

struct FeatureSidecar {
  std::string digest;
  FeatureKind kind = FeatureKind::image;
  Matrix matrix;
};

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto sp = line.find(' ', start);
    out.push_back(line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return out;
}

inline std::size_t parse_cfv_count(std::string_view s, const std::string& where) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError(where + ": bad count '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

/// Parses CFV1 text: a `CFV1 <image|audio> <T> <F>` header followed by T
/// rows of F space-separated decimals. The final newline is optional;
/// blank lines are not allowed.
inline FeatureSidecar parse_cfv(std::string_view text, const std::string& digest = "") {
  const std::string where = "cfv " + digest;
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  std::vector<std::string_view> lines;
  for (std::size_t start = 0;;) {
    const auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  const auto head = detail::split_spaces(lines[0]);
  if (head.size() != 4 || head[0] != "CFV1") throw FormatError(where + ": bad header");
  FeatureSidecar s;
  s.digest = digest;
  if (head[1] == "image")
    s.kind = FeatureKind::image;
  else if (head[1] == "audio")
    s.kind = FeatureKind::audio;
  else
    throw FormatError(where + ": unknown kind '" + std::string(head[1]) + "'");
  const std::size_t t = detail::parse_cfv_count(head[2], where);
  const std::size_t f = detail::parse_cfv_count(head[3], where);
  if (t < 1 || f < 1) throw FormatError(where + ": empty shape");
  if (s.kind == FeatureKind::image && t != 1) throw FormatError(where + ": image sidecars have one row");
  if (lines.size() - 1 != t)
    throw FormatError(where + ": header declares " + std::to_string(t) + " rows, found " +
                      std::to_string(lines.size() - 1));
  s.matrix = Matrix(t, f);
  for (std::size_t r = 0; r < t; ++r) {
    const auto tok = detail::split_spaces(lines[r + 1]);
    if (tok.size() != f)
      throw FormatError(where + ": row " + std::to_string(r + 1) + " has " + std::to_string(tok.size()) +
                        " values, expected " + std::to_string(f));
    for (std::size_t c = 0; c < f; ++c) {
      double v = 0.0;
      const auto res = std::from_chars(tok[c].data(), tok[c].data() + tok[c].size(), v);
      if (tok[c].empty() || res.ec != std::errc() || res.ptr != tok[c].data() + tok[c].size() || !std::isfinite(v))
        throw FormatError(where + ": bad value '" + std::string(tok[c]) + "' in row " + std::to_string(r + 1));
      s.matrix(r, c) = v;
    }
  }
  return s;
}

inline std::string format_cfv(FeatureKind kind, const Matrix& m) {
  if (m.rows < 1 || m.cols < 1) throw InvalidArgument("cfv: empty matrix");
  if (kind == FeatureKind::image && m.rows != 1) throw InvalidArgument("cfv: image features have one row");
  if (!all_finite(m.data)) throw InvalidArgument("cfv: non-finite feature");
  std::string out = "CFV1 " + std::string(to_string(kind)) + " " + std::to_string(m.rows) + " " + std::to_string(m.cols) + "\n";
  char buf[32];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out += ' ';
      const auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& dir, const std::string& digest) {
  return dir / (digest + ".cfv");
}

/// Loads `<dir>/<digest>.cfv`. Throws MissingFeatures when the file does
/// not exist.
inline FeatureSidecar load_sidecar(const std::filesystem::path& dir, const std::string& digest,
                                   std::optional<FeatureKind> expect = std::nullopt) {
  const auto path = sidecar_path(dir, digest);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFeatures({digest});
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto s = parse_cfv(text, digest);
  if (expect && s.kind != *expect)
    throw FormatError("cfv " + digest + ": expected " + to_string(*expect) + " features, found " + to_string(s.kind));
  return s;
}

inline void write_sidecar(const std::filesystem::path& dir, const std::string& digest, FeatureKind kind,
                          const Matrix& m) {
  std::filesystem::create_directories(dir);
  const auto path = sidecar_path(dir, digest);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_cfv(kind, m);
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace crea

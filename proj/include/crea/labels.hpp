#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "crea/error.hpp"

namespace crea {

struct LabelRow {
  std::string project_id;
  std::string expert_id;
  double code = 0.0;
  double visual = 0.0;
  double audio = 0.0;
  std::optional<double> idea;
  std::optional<double> final_score;
};

/// Aspect weights of one expert, normalized to sum to one.
struct ExpertWeights {
  double code = 0.0;
  double visual = 0.0;
  double audio = 0.0;
  double idea = 0.0;
  double other = 0.0;
};

struct ExpertLabels {
  std::vector<LabelRow> rows;
  std::map<std::string, ExpertWeights> weights;

  /// Expert ids in order of first appearance in `rows`.
  std::vector<std::string> experts() const {
    std::vector<std::string> out;
    for (const auto& r : rows)
      if (std::find(out.begin(), out.end(), r.expert_id) == out.end()) out.push_back(r.expert_id);
    return out;
  }

  const LabelRow& row(const std::string& expert_id, const std::string& project_id) const {
    for (const auto& r : rows)
      if (r.expert_id == expert_id && r.project_id == project_id) return r;
    throw UnknownId(expert_id + "/" + project_id, "label row");
  }

  const ExpertWeights& weights_of(const std::string& expert_id) const {
    const auto it = weights.find(expert_id);
    if (it == weights.end()) throw UnknownId(expert_id, "expert");
    return it->second;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline double parse_csv_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw FormatError(where + ": bad number '" + s + "'");
  return v;
}

template <class RowFn>
void read_csv(std::istream& in, const std::vector<std::string>& header, const char* what, RowFn&& on_row) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string(what) + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (split_csv_line(line) != header) {
    std::string expect;
    for (const auto& h : header) expect += (expect.empty() ? "" : ",") + h;
    throw FormatError(std::string(what) + ": header must be '" + expect + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    const std::string where = std::string(what) + " line " + std::to_string(line_no);
    if (fields.size() != header.size()) throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields");
    on_row(fields, where);
  }
}

}  // namespace detail

/// Reads `project_id,expert_id,code,visual,audio,idea,final`. The idea and
/// final columns may be empty. Scores must lie in [0, 100].
inline std::vector<LabelRow> parse_labels(std::istream& in) {
  std::vector<LabelRow> rows;
  detail::read_csv(in, {"project_id", "expert_id", "code", "visual", "audio", "idea", "final"}, "labels",
                   [&](const std::vector<std::string>& f, const std::string& where) {
                     auto score = [&](const std::string& s) {
                       const double v = detail::parse_csv_number(s, where);
                       if (v < 0.0 || v > 100.0) throw FormatError(where + ": score " + s + " outside [0,100]");
                       return v;
                     };
                     auto optional_score = [&](const std::string& s) -> std::optional<double> {
                       if (s.empty()) return std::nullopt;
                       return score(s);
                     };
                     if (f[0].empty() || f[1].empty()) throw FormatError(where + ": empty id");
                     for (const auto& r : rows)
                       if (r.project_id == f[0] && r.expert_id == f[1])
                         throw FormatError(where + ": duplicate row for expert " + f[1] + " and project " + f[0]);
                     rows.push_back({f[0], f[1], score(f[2]), score(f[3]), score(f[4]), optional_score(f[5]),
                                     optional_score(f[6])});
                   });
  return rows;
}

/// Reads `expert_id,w_code,w_visual,w_audio,w_idea,w_other` and normalizes
/// each row to sum to one.
inline std::map<std::string, ExpertWeights> parse_weights(std::istream& in) {
  std::map<std::string, ExpertWeights> out;
  detail::read_csv(in, {"expert_id", "w_code", "w_visual", "w_audio", "w_idea", "w_other"}, "weights",
                   [&](const std::vector<std::string>& f, const std::string& where) {
                     double w[5];
                     double sum = 0.0;
                     for (int i = 0; i < 5; ++i) {
                       w[i] = detail::parse_csv_number(f[static_cast<std::size_t>(i) + 1], where);
                       if (w[i] < 0.0 || w[i] > 1.0) throw FormatError(where + ": weight outside [0,1]");
                       sum += w[i];
                     }
                     if (!(sum > 0.0)) throw FormatError(where + ": weights sum to zero");
                     if (!out.emplace(f[0], ExpertWeights{w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum, w[4] / sum})
                              .second)
                       throw FormatError(where + ": duplicate expert " + f[0]);
                   });
  return out;
}

inline ExpertLabels load_labels(const std::string& labels_path, const std::string& weights_path) {
  std::ifstream l(labels_path);
  if (!l) throw Error("cannot open labels file " + labels_path);
  std::ifstream w(weights_path);
  if (!w) throw Error("cannot open weights file " + weights_path);
  ExpertLabels out{parse_labels(l), parse_weights(w)};
  for (const auto& e : out.experts())
    if (!out.weights.count(e)) throw FormatError("weights: no row for expert " + e);
  return out;
}

/// Weighted mean of the three modality scores, with the expert's code,
/// visual and audio weights renormalized to sum to one.
inline double weighted_combination(const ExpertLabels& labels, const std::string& expert_id,
                                   const std::string& project_id) {
  const LabelRow& r = labels.row(expert_id, project_id);
  const ExpertWeights& w = labels.weights_of(expert_id);
  const double s = w.code + w.visual + w.audio;
  if (!(s > 0.0)) throw InvalidArgument("expert " + expert_id + " gives no weight to code, visual or audio");
  return (w.code * r.code + w.visual * r.visual + w.audio * r.audio) / s;
}

}  // namespace crea

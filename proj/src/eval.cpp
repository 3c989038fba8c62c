// Copyright 2026 The DICE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================
#include "dice/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "dice/errors.hpp"

namespace dice {
namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_distances(const std::vector<double>& v, const std::string& what) {
  for (double d : v) {
    if (!std::isfinite(d) || d < 0) throw ValidationError(what + ": distances must be finite and >= 0");
  }
}

void check_pair(const std::vector<double>& base, const std::vector<double>& erase,
                const std::string& what) {
  if (base.empty() || erase.empty()) throw ValidationError(what + ": empty reference list");
  if (base.size() != erase.size()) {
    throw ValidationError(what + ": base and erase lists differ in length");
  }
  check_distances(base, what);
  check_distances(erase, what);
}

std::vector<double> deltas(const std::vector<double>& base, const std::vector<double>& erase) {
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = erase[i] - base[i];
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool contains_word(const std::string& haystack, const std::string& needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

// Indefinite article for a noun phrase, by leading vowel letter.
std::string article(const std::string& noun, bool capital) {
  const bool vowel = !noun.empty() &&
                     std::string("aeiou").find(static_cast<char>(std::tolower(
                         static_cast<unsigned char>(noun.front())))) != std::string::npos;
  if (capital) return vowel ? "An" : "A";
  return vowel ? "an" : "a";
}

std::string known_full_name(const std::string& style) {
  static const std::map<std::string, std::string> kFullNames = {
      {"van gogh", "Vincent van Gogh"},
  };
  const auto it = kFullNames.find(lower(style));
  return it == kFullNames.end() ? style : it->second;
}

std::vector<double> number_list(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw ValidationError("manifest instance: missing '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ValidationError("manifest instance: '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError("manifest instance: non-numeric entry in '" + key + "'");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

void DistanceRecord::validate() const {
  if (!std::isfinite(l_gene) || l_gene < 0) {
    throw ValidationError("instance " + id + ": l_gene must be finite and >= 0");
  }
  check_pair(l_base_style, l_erase_style, "instance " + id + " style");
  check_pair(l_base_cont, l_erase_cont, "instance " + id + " content");
}

void DistanceManifest::validate() const {
  if (instances.empty()) throw ValidationError("distance manifest: no instances");
  for (const auto& r : instances) r.validate();
}

InstanceReport compute_dlpips(const DistanceRecord& record) {
  record.validate();
  InstanceReport r;
  r.id = record.id;
  r.l_gene = record.l_gene;
  r.mean_base_style = mean(record.l_base_style);
  r.mean_erase_style = mean(record.l_erase_style);
  r.mean_base_cont = mean(record.l_base_cont);
  r.mean_erase_cont = mean(record.l_erase_cont);
  r.c_style = r.mean_erase_style - r.mean_base_style;
  r.c_content = r.mean_erase_cont - r.mean_base_cont;
  r.style_deltas = deltas(record.l_base_style, record.l_erase_style);
  r.content_deltas = deltas(record.l_base_cont, record.l_erase_cont);
  r.n_references = std::max(record.l_base_style.size(), record.l_base_cont.size());
  return r;
}

double holistic_index(std::span<const double> c_style, std::span<const double> c_content) {
  if (c_style.empty() || c_content.empty()) throw ValidationError("holistic_index: empty list");
  if (c_style.size() != c_content.size()) throw ValidationError("holistic_index: length mismatch");
  return mean(c_style) - mean(c_content);
}

DlpipsReport compute_dlpips(const DistanceManifest& manifest) {
  manifest.validate();
  DlpipsReport rep;
  rep.source = manifest.source;
  std::vector<double> gene, cs, cc;
  for (const auto& rec : manifest.instances) {
    rep.instances.push_back(compute_dlpips(rec));
    const auto& r = rep.instances.back();
    gene.push_back(r.l_gene);
    cs.push_back(r.c_style);
    cc.push_back(r.c_content);
    rep.n_references = std::max(rep.n_references, r.n_references);
  }
  rep.l_gene = mean(gene);
  rep.c_style = mean(cs);
  rep.c_content = mean(cc);
  rep.h_o = holistic_index(cs, cc);
  return rep;
}

DistanceManifest parse_distance_manifest(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("distance manifest: expected a JSON object");
  static const std::set<std::string> kTop = {"source", "instances"};
  static const std::set<std::string> kInst = {"id",           "l_gene",      "l_base_style",
                                              "l_erase_style", "l_base_cont", "l_erase_cont",
                                              "images"};
  for (const auto& [k, _] : j.items()) {
    if (!kTop.contains(k)) throw ValidationError("distance manifest: unknown key '" + k + "'");
  }
  DistanceManifest m;
  m.source = j.value("source", std::string{});
  if (!j.contains("instances") || !j.at("instances").is_array()) {
    throw ValidationError("distance manifest: 'instances' must be a list");
  }
  std::size_t idx = 0;
  for (const auto& ji : j.at("instances")) {
    if (!ji.is_object()) throw ValidationError("distance manifest: instance must be an object");
    for (const auto& [k, _] : ji.items()) {
      if (!kInst.contains(k)) throw ValidationError("manifest instance: unknown key '" + k + "'");
    }
    DistanceRecord r;
    r.id = ji.value("id", "instance_" + std::to_string(idx));
    if (!ji.contains("l_gene") || !ji.at("l_gene").is_number()) {
      throw ValidationError("manifest instance " + r.id + ": 'l_gene' must be a number");
    }
    r.l_gene = ji.at("l_gene").get<double>();
    r.l_base_style = number_list(ji, "l_base_style");
    r.l_erase_style = number_list(ji, "l_erase_style");
    r.l_base_cont = number_list(ji, "l_base_cont");
    r.l_erase_cont = number_list(ji, "l_erase_cont");
    if (ji.contains("images")) {
      for (const auto& [k, v] : ji.at("images").items()) {
        if (!v.is_string()) throw ValidationError("manifest instance: image ids must be strings");
        r.images[k] = v.get<std::string>();
      }
    }
    m.instances.push_back(std::move(r));
    ++idx;
  }
  m.validate();
  return m;
}

DistanceManifest load_distance_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_distance_manifest(j);
}

nlohmann::json to_json(const DlpipsReport& report) {
  nlohmann::json j;
  j["source"] = report.source;
  j["l_gene"] = report.l_gene;
  j["c_style"] = report.c_style;
  j["c_content"] = report.c_content;
  j["h_o"] = report.h_o;
  j["n_references"] = report.n_references;
  j["instances"] = nlohmann::json::array();
  for (const auto& r : report.instances) {
    j["instances"].push_back({{"id", r.id},
                              {"l_gene", r.l_gene},
                              {"c_style", r.c_style},
                              {"c_content", r.c_content},
                              {"mean_base_style", r.mean_base_style},
                              {"mean_erase_style", r.mean_erase_style},
                              {"mean_base_cont", r.mean_base_cont},
                              {"mean_erase_cont", r.mean_erase_cont},
                              {"style_deltas", r.style_deltas},
                              {"content_deltas", r.content_deltas},
                              {"n_references", r.n_references}});
  }
  return j;
}

std::string format_table(const DlpipsReport& report) {
  std::size_t width = 8;
  for (const auto& r : report.instances) width = std::max(width, r.id.size());
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  auto row = [&](const std::string& label, double g, double s, double c) {
    os << std::left << std::setw(static_cast<int>(width)) << label << std::right << "  "
       << std::setw(8) << g << "  " << std::setw(8) << s << "  " << std::setw(9) << c << '\n';
  };
  os << std::left << std::setw(static_cast<int>(width)) << "instance" << std::right << "  "
     << std::setw(8) << "L_gene" << "  " << std::setw(8) << "C_style" << "  " << std::setw(9)
     << "C_content" << '\n';
  for (const auto& r : report.instances) row(r.id, r.l_gene, r.c_style, r.c_content);
  row("mean", report.l_gene, report.c_style, report.c_content);
  os << "H_o = " << report.h_o << "  (references per instance: " << report.n_references << ")\n";
  return os.str();
}

PromptSet build_prompt_set(const std::string& style_name, const std::string& content_name,
                           const std::string& alt_content, const std::string& alt_style,
                           const std::string& style_full_name) {
  if (style_name.empty() || content_name.empty()) {
    throw ValidationError("build_prompt_set: style and content names must be nonempty");
  }
  const std::string& s = style_name;
  const std::string& c = content_name;
  const std::string full = style_full_name.empty() ? known_full_name(s) : style_full_name;
  const std::string a = article(c, false);

  PromptSet p;
  const std::vector<std::string> style_texts = {
      "A work in the style of " + s,
      "A creation in the style of " + s,
      "Artwork in the style of " + full,
      "Painting in the style of " + s,
      "An image with the artistic style of " + s,
  };
  const std::vector<std::string> content_texts = {
      article(c, true) + " " + c,
      "A picture of " + a + " " + c,
      "An image showing " + a + " " + c,
      "A photograph of " + a + " " + c,
      "A scene with " + a + " " + c,
  };
  for (std::size_t i = 0; i < style_texts.size(); ++i) {
    p.style_prompts.push_back({"style_" + std::to_string(i + 1), style_texts[i]});
  }
  for (std::size_t i = 0; i < content_texts.size(); ++i) {
    p.content_prompts.push_back({"content_" + std::to_string(i + 1), content_texts[i]});
  }
  const std::string pos_content = alt_content.empty() ? c : alt_content;
  const std::string neg_style = alt_style.empty() ? s : alt_style;
  p.anchor = {"anchor", "A " + c + " in the style of " + s};
  p.positive = {"positive", "A " + pos_content + " in the style of " + s};
  p.negative = {"negative", "A " + c + " in the style of " + neg_style};

  if (contains_word(s, c) || contains_word(full, c)) {
    p.warnings.push_back("style name '" + s + "' contains the content word '" + c +
                         "'; style-only prompts are not content-free");
  }
  if (contains_word(c, s)) {
    p.warnings.push_back("content name '" + c + "' contains the style name '" + s +
                         "'; content-only prompts are not style-free");
  }
  if (alt_content.empty() || alt_style.empty()) {
    p.warnings.push_back("triplet needs a distinct alternative content and style");
  } else {
    if (lower(alt_content) == lower(c)) p.warnings.push_back("alt_content equals content");
    if (lower(alt_style) == lower(s)) p.warnings.push_back("alt_style equals style");
  }
  return p;
}

nlohmann::json to_json(const PromptSet& prompts) {
  auto list = [](const std::vector<Prompt>& ps) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : ps) a.push_back({{"id", p.id}, {"text", p.text}});
    return a;
  };
  return {{"style_prompts", list(prompts.style_prompts)},
          {"content_prompts", list(prompts.content_prompts)},
          {"triplet",
           {{"anchor", prompts.anchor.text},
            {"positive", prompts.positive.text},
            {"negative", prompts.negative.text}}},
          {"warnings", prompts.warnings}};
}

ClipSummary clip_score_summary(const PromptSet& prompts,
                               std::span<const std::pair<std::string, double>> scores) {
  std::set<std::string> style_ids, content_ids;
  for (const auto& p : prompts.style_prompts) style_ids.insert(p.id);
  for (const auto& p : prompts.content_prompts) content_ids.insert(p.id);
  const std::set<std::string> triplet_ids = {prompts.anchor.id, prompts.positive.id,
                                             prompts.negative.id};
  ClipSummary out;
  double style_sum = 0, content_sum = 0;
  for (const auto& [id, score] : scores) {
    if (!std::isfinite(score)) throw ValidationError("clip_score_summary: non-finite score for " + id);
    if (style_ids.contains(id)) {
      style_sum += score;
      ++out.n_style;
    } else if (content_ids.contains(id)) {
      content_sum += score;
      ++out.n_content;
    } else if (!triplet_ids.contains(id)) {
      throw ValidationError("clip_score_summary: unknown prompt id '" + id + "'");
    }
  }
  if (out.n_style == 0) throw ValidationError("clip_score_summary: no style-prompt scores");
  if (out.n_content == 0) throw ValidationError("clip_score_summary: no content-prompt scores");
  out.cs_style = style_sum / double(out.n_style);
  out.cs_content = content_sum / double(out.n_content);
  return out;
}

}  // namespace dice

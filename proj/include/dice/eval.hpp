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
#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dice {

// ---------------------------------------------------------------------------
// Differential LPIPS. Distances come from an external perceptual model; this
// layer only combines them.

struct DistanceRecord {
  std::string id;
  double l_gene = 0;
  std::vector<double> l_base_style;   // d(I_ref_style, I_ori) per reference
  std::vector<double> l_erase_style;  // d(I_ref_style, I_erase)
  std::vector<double> l_base_cont;    // d(I_ref_cont, I_ori)
  std::vector<double> l_erase_cont;   // d(I_ref_cont, I_erase)
  std::map<std::string, std::string> images;

  void validate() const;
};

struct DistanceManifest {
  std::string source;
  std::vector<DistanceRecord> instances;

  void validate() const;
};

struct InstanceReport {
  std::string id;
  double l_gene = 0;
  double c_style = 0;
  double c_content = 0;
  double mean_base_style = 0;
  double mean_erase_style = 0;
  double mean_base_cont = 0;
  double mean_erase_cont = 0;
  std::vector<double> style_deltas;    // per reference, for audit
  std::vector<double> content_deltas;
  std::size_t n_references = 0;
};

struct DlpipsReport {
  std::string source;
  std::vector<InstanceReport> instances;
  double l_gene = 0;     // mean over instances
  double c_style = 0;    // mean over instances
  double c_content = 0;  // mean over instances
  double h_o = 0;
  std::size_t n_references = 0;
};

InstanceReport compute_dlpips(const DistanceRecord& record);
DlpipsReport compute_dlpips(const DistanceManifest& manifest);

/// mean(c_style) - mean(c_content) over instances.
double holistic_index(std::span<const double> c_style, std::span<const double> c_content);

DistanceManifest parse_distance_manifest(const nlohmann::json& j);
DistanceManifest load_distance_manifest(const std::filesystem::path& path);
nlohmann::json to_json(const DlpipsReport& report);
std::string format_table(const DlpipsReport& report);

// ---------------------------------------------------------------------------
// Prompt templates for the CLIP-score harness.

struct Prompt {
  std::string id;
  std::string text;
};

struct PromptSet {
  std::vector<Prompt> style_prompts;    // reference only the target style
  std::vector<Prompt> content_prompts;  // reference only the content
  Prompt anchor;
  Prompt positive;
  Prompt negative;
  std::vector<std::string> warnings;
};

/// `style_full_name` fills the third style template; when empty, a known
/// long form is used if there is one, otherwise `style_name`.
PromptSet build_prompt_set(const std::string& style_name, const std::string& content_name,
                           const std::string& alt_content, const std::string& alt_style,
                           const std::string& style_full_name = {});

nlohmann::json to_json(const PromptSet& prompts);

struct ClipSummary {
  double cs_style = 0;
  double cs_content = 0;
  std::size_t n_style = 0;
  std::size_t n_content = 0;
};

ClipSummary clip_score_summary(const PromptSet& prompts,
                               std::span<const std::pair<std::string, double>> scores);

}  // namespace dice

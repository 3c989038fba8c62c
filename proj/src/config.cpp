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
#include "dice/config.hpp"

#include <set>

#include "dice/errors.hpp"
#include "dice/subspace_io.hpp"

namespace dice {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) throw ValidationError("config: unknown key '" + where + k + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config: bad type for '") + key + "'");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  erase.validate();
  if (extraction_interval[0] < 0 || extraction_interval[0] > extraction_interval[1]) {
    throw ValidationError("config: extraction_interval must satisfy 0 <= lo <= hi");
  }
  const auto& s = synthetic;
  if (!(s.max_angle > 0) || !(s.min_alignment_recovery >= 0 && s.min_alignment_recovery <= 1)) {
    throw ValidationError("config: synthetic thresholds out of range");
  }
}

std::vector<std::string> PipelineConfig::advisories() const {
  std::vector<std::string> out;
  if (erase.r_style < 12 || erase.r_style > 21) {
    out.push_back("r_style outside the well-behaved range [12, 21]");
  }
  if (erase.gamma_q < 0.3 || erase.gamma_q > 0.9) {
    out.push_back("gamma_q outside the stable range [0.3, 0.9]");
  }
  if (extraction_interval[0] < 100 && extraction_interval[1] > 400) {
    out.push_back("extraction_interval wider than the 100-400 step window");
  }
  return out;
}

PipelineConfig parse_config(const nlohmann::json& j) {
  PipelineConfig c;
  reject_unknown(j,
                 {"lambda", "epsilon", "epsilon_rel", "r_style", "r_content", "gamma_q", "centered",
                  "aec", "extraction_interval", "style_layer_tag", "content_layer_tag",
                  "pooling_mode", "synthetic"},
                 "");
  auto& e = c.erase;
  read(j, "lambda", e.lambda);
  if (j.contains("epsilon")) {
    double eps = 0;
    read(j, "epsilon", eps);
    e.epsilon = eps;
  }
  read(j, "epsilon_rel", e.epsilon_rel);
  read(j, "r_style", e.r_style);
  read(j, "r_content", e.r_content);
  read(j, "gamma_q", e.gamma_q);
  read(j, "centered", e.centered);
  if (j.contains("aec")) {
    const auto& a = j.at("aec");
    reject_unknown(a, {"w_q", "w_k", "w_v", "k", "tau", "alpha_min", "alpha_max",
                       "enforce_weight_order"},
                   "aec.");
    read(a, "w_q", e.aec.w_q);
    read(a, "w_k", e.aec.w_k);
    read(a, "w_v", e.aec.w_v);
    read(a, "k", e.aec.k_steepness);
    read(a, "tau", e.aec.tau);
    read(a, "alpha_min", e.aec.alpha_min);
    read(a, "alpha_max", e.aec.alpha_max);
    read(a, "enforce_weight_order", e.aec.enforce_weight_order);
  }
  if (j.contains("extraction_interval")) {
    std::vector<long> iv;
    read(j, "extraction_interval", iv);
    if (iv.size() != 2) throw ValidationError("config: extraction_interval must be [lo, hi]");
    c.extraction_interval = {iv[0], iv[1]};
  }
  read(j, "style_layer_tag", c.style_layer_tag);
  read(j, "content_layer_tag", c.content_layer_tag);
  if (j.contains("pooling_mode")) {
    std::string mode;
    read(j, "pooling_mode", mode);
    if (mode == "pool") {
      c.pooling_mode = PoolingMode::kPool;
    } else if (mode == "per-step") {
      c.pooling_mode = PoolingMode::kPerStep;
    } else {
      throw ValidationError("config: pooling_mode must be 'pool' or 'per-step'");
    }
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    reject_unknown(s, {"n_tokens", "dim", "r_style", "r_content", "layout_rank", "layout_scale",
                       "noise_sigma", "max_angle", "min_alignment_recovery"},
                   "synthetic.");
    auto& d = c.synthetic;
    read(s, "n_tokens", d.n_tokens);
    read(s, "dim", d.dim);
    read(s, "r_style", d.r_style);
    read(s, "r_content", d.r_content);
    read(s, "layout_rank", d.layout_rank);
    read(s, "layout_scale", d.layout_scale);
    read(s, "noise_sigma", d.noise_sigma);
    read(s, "max_angle", d.max_angle);
    read(s, "min_alignment_recovery", d.min_alignment_recovery);
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) {
    PipelineConfig c;
    c.validate();
    return c;
  }
  return parse_config(read_json_file(*path));
}

nlohmann::json to_json(const PipelineConfig& c) {
  const auto& e = c.erase;
  nlohmann::json j = {
      {"lambda", e.lambda},
      {"epsilon_rel", e.epsilon_rel},
      {"r_style", e.r_style},
      {"r_content", e.r_content},
      {"gamma_q", e.gamma_q},
      {"centered", e.centered},
      {"aec",
       {{"w_q", e.aec.w_q},
        {"w_k", e.aec.w_k},
        {"w_v", e.aec.w_v},
        {"k", e.aec.k_steepness},
        {"tau", e.aec.tau},
        {"alpha_min", e.aec.alpha_min},
        {"alpha_max", e.aec.alpha_max},
        {"enforce_weight_order", e.aec.enforce_weight_order}}},
      {"extraction_interval", {c.extraction_interval[0], c.extraction_interval[1]}},
      {"style_layer_tag", c.style_layer_tag},
      {"content_layer_tag", c.content_layer_tag},
      {"pooling_mode", c.pooling_mode == PoolingMode::kPool ? "pool" : "per-step"},
  };
  if (e.epsilon) j["epsilon"] = *e.epsilon;
  return j;
}

}  // namespace dice

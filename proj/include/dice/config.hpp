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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dice/params.hpp"

namespace dice {

enum class PoolingMode { kPool, kPerStep };

/// Settings for the `demo-synthetic` self-test.
struct SyntheticConfig {
  long n_tokens = 256;
  long dim = 32;
  long r_style = 4;
  long r_content = 4;
  long layout_rank = 24;
  double layout_scale = 2.0;
  double noise_sigma = 0.02;
  double max_angle = 0.15;             // radians, style and content recovery
  double min_alignment_recovery = 0.9;  // fraction of shuffled rows matched back
};

struct PipelineConfig {
  EraseParams erase;
  std::array<long, 2> extraction_interval = {100, 400};
  std::string style_layer_tag = "down0";
  std::string content_layer_tag = "up3";
  PoolingMode pooling_mode = PoolingMode::kPool;
  SyntheticConfig synthetic;

  void validate() const;
  // Values outside the ranges where the method was observed to behave well.
  std::vector<std::string> advisories() const;
};

/// Unknown keys are rejected.
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::optional<std::filesystem::path>& path);
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace dice

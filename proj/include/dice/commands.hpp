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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dice/config.hpp"

namespace dice::cli {

using Path = std::filesystem::path;

struct Console {
  std::ostream& out;
  std::ostream& err;
  bool verbose = false;
};

// Subcommands. Each returns a process exit code:
// 0 ok, 1 failed self-check, 2 validation, 3 I/O or format, 4 numerical.

int cmd_align(const Path& anchor, const Path& positive, const Path& negative, const Path& out,
              Console& con);
/// Aligns every unit of a capture manifest
/// {"units": [{layer, timestep, anchor, positive, negative}]}.
int cmd_align_manifest(const Path& capture_manifest, const Path& out, Console& con);
int cmd_fit(const Path& aligned_dir, const std::optional<Path>& config, const Path& out,
            Console& con);
int cmd_edit(const Path& qkv_manifest, const Path& subspace_dir, const std::optional<Path>& config,
             const Path& out, Console& con);
int cmd_dlpips(const Path& manifest, const Path& out, Console& con);
int cmd_demo_synthetic(const std::optional<Path>& config, std::uint64_t seed,
                       const std::optional<Path>& out, Console& con);
int cmd_prompts(const std::string& style, const std::string& content,
                const std::string& alt_content, const std::string& alt_style,
                const std::string& style_full_name, const std::optional<Path>& out, Console& con);
/// Scores file: {"scores": [{"prompt_id": "style_1", "score": 30.1}, ...]}.
int cmd_clip_summary(const Path& scores, const std::string& style, const std::string& content,
                     const std::string& style_full_name, const std::optional<Path>& out,
                     Console& con);

// Throwing cores of the subcommands above, used to compose pipelines.
void run_align(const Path& anchor, const Path& positive, const Path& negative, const Path& out,
               Console& con);
void run_fit(const Path& aligned_dir, const PipelineConfig& cfg, const Path& out, Console& con);
void run_edit(const Path& qkv_manifest, const Path& subspace_dir, const PipelineConfig& cfg,
              const Path& out, Console& con);
void run_demo_synthetic(const PipelineConfig& cfg, std::uint64_t seed, const Path& workdir,
                        Console& con);

}  // namespace dice::cli

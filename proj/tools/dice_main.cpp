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
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dice/commands.hpp"

int main(int argc, char** argv) {
  using dice::cli::Path;

  CLI::App app{"dice: contrastive style/content subspaces and attention editing"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("--verbose", verbose, "Print extra diagnostics");

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  auto add_config = [&](CLI::App* c) {
    c->add_option("--config", config_path, "Pipeline JSON config")->check(CLI::ExistingFile);
  };
  auto config = [&]() -> std::optional<Path> {
    if (config_path.empty()) return std::nullopt;
    return Path(config_path);
  };

  std::string anchor, positive, negative, manifest;
  auto* align = app.add_subcommand("align", "Align positive/negative patches to the anchor");
  align->add_option("anchor", anchor, "Anchor DTF1 tensor");
  align->add_option("positive", positive, "Positive DTF1 tensor");
  align->add_option("negative", negative, "Negative DTF1 tensor");
  align->add_option("--manifest", manifest, "Capture manifest with several units");
  align->add_option("--out", out, "Output directory")->required();

  std::string aligned_dir;
  auto* fit = app.add_subcommand("fit", "Fit style and content subspaces");
  fit->add_option("aligned_dir", aligned_dir, "Output directory of `align`")->required();
  add_config(fit);
  fit->add_option("--out", out, "Output directory")->required();

  std::string qkv_manifest, subspace_dir;
  auto* edit = app.add_subcommand("edit", "Edit Q/K/V tensors with fitted subspaces");
  edit->add_option("qkv_manifest", qkv_manifest, "JSON manifest of q/k/v DTF1 files")->required();
  edit->add_option("subspace_dir", subspace_dir, "Output directory of `fit`")->required();
  add_config(edit);
  edit->add_option("--out", out, "Output directory")->required();

  std::string distances;
  auto* dlpips = app.add_subcommand("dlpips", "Differential LPIPS report from a distance manifest");
  dlpips->add_option("manifest", distances, "Distance manifest JSON")->required();
  dlpips->add_option("--out", out, "Report JSON path (a .txt table is written alongside)")
      ->required();

  auto* demo = app.add_subcommand("demo-synthetic", "End-to-end self-test on planted data");
  add_config(demo);
  demo->add_option("--seed", seed, "RNG seed");
  demo->add_option("--out", out, "Keep intermediate files in this directory");

  std::string style, content, alt_content, alt_style, full_name;
  auto* prompts = app.add_subcommand("prompts", "Emit evaluation and triplet prompt templates");
  prompts->add_option("--style", style, "Target style name")->required();
  prompts->add_option("--content", content, "Content word")->required();
  prompts->add_option("--alt-content", alt_content, "Different content for the positive prompt");
  prompts->add_option("--alt-style", alt_style, "Different style for the negative prompt");
  prompts->add_option("--style-full-name", full_name, "Long form of the style name");
  prompts->add_option("--out", out, "Write JSON here instead of stdout");

  std::string scores;
  auto* clip = app.add_subcommand("clip-summary", "Average CLIP scores per prompt group");
  clip->add_option("scores", scores, "Scores JSON")->required();
  clip->add_option("--style", style, "Target style name")->required();
  clip->add_option("--content", content, "Content word")->required();
  clip->add_option("--style-full-name", full_name, "Long form of the style name");
  clip->add_option("--out", out, "Write JSON summary here");

  CLI11_PARSE(app, argc, argv);

  dice::cli::Console con{std::cout, std::cerr, verbose};
  auto optional_out = [&]() -> std::optional<Path> {
    if (out.empty()) return std::nullopt;
    return Path(out);
  };

  if (*align) {
    if (!manifest.empty()) return dice::cli::cmd_align_manifest(manifest, out, con);
    if (anchor.empty() || positive.empty() || negative.empty()) {
      std::cerr << "error: align needs <anchor> <positive> <negative> or --manifest\n";
      return 2;
    }
    return dice::cli::cmd_align(anchor, positive, negative, out, con);
  }
  if (*fit) return dice::cli::cmd_fit(aligned_dir, config(), out, con);
  if (*edit) return dice::cli::cmd_edit(qkv_manifest, subspace_dir, config(), out, con);
  if (*dlpips) return dice::cli::cmd_dlpips(distances, out, con);
  if (*demo) return dice::cli::cmd_demo_synthetic(config(), seed, optional_out(), con);
  if (*prompts) {
    return dice::cli::cmd_prompts(style, content, alt_content, alt_style, full_name, optional_out(),
                                  con);
  }
  if (*clip) return dice::cli::cmd_clip_summary(scores, style, content, full_name, optional_out(), con);
  return 2;
}

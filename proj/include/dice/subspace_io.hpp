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
#include <string>

#include <json.hpp>

#include "dice/subspace.hpp"

namespace dice {

// A subspace on disk is `<name>.dtf` (D x r basis) plus `<name>.json`
// {kind, r, dim, lambda, epsilon, eigenvalues, tag}.
void save_subspace(const Subspaced& sub, const std::filesystem::path& dir, const std::string& name);

/// The float32 basis is re-orthonormalized on load; the span is unchanged.
Subspaced load_subspace(const std::filesystem::path& dir, const std::string& name);

nlohmann::json subspace_sidecar(const Subspaced& sub);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dice

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
#include "dice/subspace_io.hpp"

#include <fstream>

#include "dice/tensor_exchange.hpp"

namespace dice {

nlohmann::json subspace_sidecar(const Subspaced& sub) {
  std::vector<double> eig(sub.eigenvalues.data(), sub.eigenvalues.data() + sub.eigenvalues.size());
  return {{"kind", to_string(sub.kind)}, {"r", sub.rank()},         {"dim", sub.dim()},
          {"lambda", sub.lambda},        {"epsilon", sub.epsilon}, {"eigenvalues", eig},
          {"tag", sub.tag}};
}

void save_subspace(const Subspaced& sub, const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  write_tensor(to_tensor(sub.basis), dir / (name + ".dtf"));
  write_json_file(dir / (name + ".json"), subspace_sidecar(sub));
}

Subspaced load_subspace(const std::filesystem::path& dir, const std::string& name) {
  const auto meta = read_json_file(dir / (name + ".json"));
  const auto basis = to_feature_matrix<double>(read_tensor(dir / (name + ".dtf")));
  Subspaced s;
  try {
    const auto kind = meta.at("kind").get<std::string>();
    if (kind != "style" && kind != "content") {
      throw FormatError(name + ".json: unknown kind '" + kind + "'");
    }
    s.kind = kind == "style" ? SubspaceKind::kStyle : SubspaceKind::kContent;
    const auto eig = meta.at("eigenvalues").get<std::vector<double>>();
    s.eigenvalues = Eigen::Map<const Vector<double>>(eig.data(), static_cast<Index>(eig.size()));
    s.lambda = meta.at("lambda").get<double>();
    s.epsilon = meta.at("epsilon").get<double>();
    s.tag = meta.value("tag", std::string{});
    if (meta.at("r").get<Index>() != basis.dim() || s.eigenvalues.size() != basis.dim()) {
      throw FormatError(name + ": sidecar rank does not match basis tensor");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name + ".json: " + e.what());
  }
  if (basis.n_tokens() < basis.dim()) throw FormatError(name + ".dtf: basis has more columns than rows");
  s.basis = orthonormalize<double>(basis.data);
  normalize_signs(s.basis);
  s.raw_eigvecs = s.basis;
  return s;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace dice

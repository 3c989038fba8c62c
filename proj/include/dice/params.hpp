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

#include <optional>
#include <string>

#include "dice/errors.hpp"

namespace dice {

/// Adaptive erasure controller knobs. Fusion weights are unit-sum so the
/// fused score stays in [0, 1] and `tau` reads on that scale.
struct AecParams {
  double w_q = 0.2;
  double w_k = 0.3;
  double w_v = 0.5;
  double k_steepness = 10.0;
  double tau = 0.5;
  double alpha_min = 0.2;
  double alpha_max = 1.0;
  // Ablation configurations (single-component scoring) break w_q < w_k < w_v.
  bool enforce_weight_order = true;

  void validate() const;
};

struct EraseParams {
  double lambda = 1.0;
  // Absolute ridge. When unset, epsilon_rel * trace(Sigma_AA) / D is used.
  std::optional<double> epsilon;
  double epsilon_rel = 1e-4;
  int r_style = 18;
  int r_content = 18;
  double gamma_q = 0.25;
  bool centered = true;
  AecParams aec;

  void validate() const;
  // Rank checks need the feature dimension, known only once tensors are loaded.
  void validate_ranks(long dim) const;
};

}  // namespace dice

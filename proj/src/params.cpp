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
#include "dice/params.hpp"

#include <cmath>

namespace dice {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

void AecParams::validate() const {
  require(std::isfinite(w_q) && std::isfinite(w_k) && std::isfinite(w_v),
          "aec: weights must be finite");
  require(w_q >= 0 && w_k >= 0 && w_v >= 0, "aec: weights must be non-negative");
  require(std::abs(w_q + w_k + w_v - 1.0) <= 1e-9, "aec: weights must sum to 1");
  if (enforce_weight_order) {
    require(w_q < w_k && w_k < w_v, "aec: weights must satisfy w_q < w_k < w_v");
  }
  require(std::isfinite(k_steepness) && k_steepness > 0, "aec: k must be > 0");
  require(tau >= 0 && tau <= 1, "aec: tau must lie in [0, 1]");
  require(alpha_min >= 0 && alpha_min <= alpha_max && alpha_max <= 1,
          "aec: need 0 <= alpha_min <= alpha_max <= 1");
}

void EraseParams::validate() const {
  require(std::isfinite(lambda) && lambda >= 0, "lambda must be >= 0");
  if (epsilon) require(std::isfinite(*epsilon) && *epsilon > 0, "epsilon must be > 0");
  require(std::isfinite(epsilon_rel) && epsilon_rel > 0, "epsilon_rel must be > 0");
  require(std::isfinite(gamma_q) && gamma_q >= 0, "gamma_q must be >= 0");
  require(r_style >= 1 && r_content >= 1, "subspace ranks must be >= 1");
  aec.validate();
}

void EraseParams::validate_ranks(long dim) const {
  require(r_style <= dim, "r_style (" + std::to_string(r_style) + ") exceeds feature dim " +
                              std::to_string(dim));
  require(r_content <= dim, "r_content (" + std::to_string(r_content) +
                                ") exceeds feature dim " + std::to_string(dim));
}

}  // namespace dice

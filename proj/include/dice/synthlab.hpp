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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "dice/align.hpp"
#include "dice/subspace.hpp"

namespace dice {

/// Synthetic triplet with planted, mutually orthogonal style and content
/// subspaces. An optional layout subspace is shared by all three members,
/// standing in for spatial structure common to the three generations.
struct PlantedSpec {
  Index n_tokens = 256;
  Index dim = 32;
  Index r_style = 4;
  Index r_content = 4;
  Index layout_rank = 0;
  double layout_scale = 1.0;
  double noise_sigma = 0.0;  // relative to the anchor signal RMS
  std::uint64_t seed = 0;
  // Whiten the coefficient blocks so their sample cross-covariances vanish
  // exactly; without it, finite-N correlations leak between subspaces.
  bool decorrelate = true;

  Matrix<double> ground_truth_style;
  Matrix<double> ground_truth_content;
  Matrix<double> ground_truth_layout;

  void validate() const;
};

struct PlantedTriplet {
  AlignedTriplet<double> triplet;
  PlantedSpec spec;
};

PlantedTriplet generate_triplet(PlantedSpec spec);

FeatureMatrix<double> permute_rows(const FeatureMatrix<double>& f, const std::vector<Index>& perm);
std::vector<Index> random_permutation(Index n, std::uint64_t seed);

/// Ascending principal angles (radians) between the spans of two
/// orthonormal bases.
template <typename Scalar>
Vector<Scalar> principal_angles(const Matrix<Scalar>& u, const Matrix<Scalar>& v) {
  if (u.rows() != v.rows()) throw ValidationError("principal_angles: ambient dims differ");
  auto check = [](const Matrix<Scalar>& m, const char* which) {
    const Matrix<Scalar> gram = m.transpose() * m;
    const Matrix<Scalar> eye = Matrix<Scalar>::Identity(m.cols(), m.cols());
    if ((gram - eye).cwiseAbs().maxCoeff() > Scalar(1e-6)) {
      throw ValidationError(std::string("principal_angles: ") + which + " is not orthonormal");
    }
  };
  check(u, "u");
  check(v, "v");
  Eigen::JacobiSVD<Matrix<Scalar>> svd(u.transpose() * v);
  const Vector<Scalar> sv = svd.singularValues();  // descending
  return sv.unaryExpr([](Scalar s) {
    return std::acos(std::clamp(s, Scalar(0), Scalar(1)));
  });
}

template <typename Scalar>
Scalar max_principal_angle(const Matrix<Scalar>& u, const Matrix<Scalar>& v) {
  const auto a = principal_angles(u, v);
  return a.size() == 0 ? Scalar(0) : a.maxCoeff();
}

}  // namespace dice

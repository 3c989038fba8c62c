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

#include <cstddef>
#include <vector>

#include "dice/tensor_exchange.hpp"

namespace dice {

/// Anchor plus positive/negative matrices re-indexed so that row i of each
/// is the patch most similar in direction to anchor row i.
template <typename Scalar = double>
struct AlignedTriplet {
  FeatureMatrix<Scalar> anchor;
  FeatureMatrix<Scalar> positive;
  FeatureMatrix<Scalar> negative;
  std::vector<Index> positive_indices;
  std::vector<Index> negative_indices;

  Index n_tokens() const { return anchor.n_tokens(); }
  Index dim() const { return anchor.dim(); }
};

using AlignedTripletd = AlignedTriplet<double>;

// Rows with norm below this are treated as empty and score 0 against everything.
inline constexpr double kZeroRowNorm = 1e-12;

/// S(i, j) = <a_i, b_j> / (|a_i| |b_j|).
template <typename Scalar>
Matrix<Scalar> cosine_similarity_matrix(const FeatureMatrix<Scalar>& a,
                                        const FeatureMatrix<Scalar>& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("cosine_similarity_matrix: feature dims differ");
  }
  auto unit_rows = [](const Matrix<Scalar>& m) {
    Matrix<Scalar> u = m;
    for (Index i = 0; i < m.rows(); ++i) {
      const Scalar n = m.row(i).norm();
      if (n < Scalar(kZeroRowNorm)) {
        u.row(i).setZero();
      } else {
        u.row(i) /= n;
      }
    }
    return u;
  };
  return unit_rows(a.data) * unit_rows(b.data).transpose();
}

template <typename Scalar = double>
struct Alignment {
  FeatureMatrix<Scalar> aligned;
  std::vector<Index> indices;
};

/// Row-wise argmax matching with repetition; ties go to the lowest index.
template <typename Scalar>
Alignment<Scalar> align_to_anchor(const FeatureMatrix<Scalar>& anchor,
                                  const FeatureMatrix<Scalar>& other) {
  if (anchor.n_tokens() != other.n_tokens()) {
    throw ValidationError("align_to_anchor: token counts differ");
  }
  const Matrix<Scalar> sim = cosine_similarity_matrix(anchor, other);
  Alignment<Scalar> out;
  out.indices.resize(static_cast<std::size_t>(anchor.n_tokens()));
  out.aligned.data.resize(other.n_tokens(), other.dim());
  out.aligned.tag = other.tag;
  for (Index i = 0; i < sim.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < sim.cols(); ++j) {
      if (sim(i, j) > sim(i, best)) best = j;
    }
    out.indices[static_cast<std::size_t>(i)] = best;
    out.aligned.data.row(i) = other.data.row(best);
  }
  return out;
}

template <typename Scalar>
AlignedTriplet<Scalar> align_triplet(const FeatureMatrix<Scalar>& anchor,
                                     const FeatureMatrix<Scalar>& positive,
                                     const FeatureMatrix<Scalar>& negative) {
  if (positive.dim() != anchor.dim() || negative.dim() != anchor.dim()) {
    throw ValidationError("align_triplet: feature dims differ");
  }
  auto pos = align_to_anchor(anchor, positive);
  auto neg = align_to_anchor(anchor, negative);
  AlignedTriplet<Scalar> t;
  t.anchor = anchor;
  t.positive = std::move(pos.aligned);
  t.negative = std::move(neg.aligned);
  t.positive_indices = std::move(pos.indices);
  t.negative_indices = std::move(neg.indices);
  return t;
}

}  // namespace dice

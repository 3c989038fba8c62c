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

#include <cmath>

#include "dice/params.hpp"
#include "dice/subspace.hpp"

namespace dice {

/// Single-head attention inputs; multi-head layouts present one triple per head.
template <typename Scalar = double>
struct AttentionTriple {
  FeatureMatrix<Scalar> q;
  FeatureMatrix<Scalar> k;
  FeatureMatrix<Scalar> v;
  Index d_model = 0;  // softmax scale is 1 / sqrt(d_model); 0 means v.dim()

  Index n_tokens() const { return q.n_tokens(); }
  Index dim() const { return q.dim(); }
  Index scale_dim() const { return d_model > 0 ? d_model : q.dim(); }

  void validate() const {
    if (k.data.rows() != q.data.rows() || v.data.rows() != q.data.rows() ||
        k.data.cols() != q.data.cols() || v.data.cols() != q.data.cols()) {
      throw ValidationError("attention triple: q, k, v shapes differ");
    }
    require_finite(q.data, "q");
    require_finite(k.data, "k");
    require_finite(v.data, "v");
  }
};

using AttentionTripled = AttentionTriple<double>;

namespace detail {
template <typename Scalar, typename Derived>
void check_basis_dim(const Eigen::MatrixBase<Derived>& m, const Subspace<Scalar>& sub,
                     const char* op) {
  if (m.cols() != sub.dim()) {
    throw ValidationError(std::string(op) + ": feature dim " + std::to_string(m.cols()) +
                          " != subspace dim " + std::to_string(sub.dim()));
  }
}
}  // namespace detail

/// s_i = |x_i U|_2, the norm of each row's coordinates in the style basis.
template <typename Scalar>
Vector<Scalar> style_scores(const Matrix<Scalar>& m, const Subspace<Scalar>& sub) {
  detail::check_basis_dim(m, sub, "style_scores");
  return (m * sub.basis).rowwise().norm();
}

/// Divides by the max over tokens; an all-zero vector stays zero.
template <typename Scalar>
Vector<Scalar> normalize_scores(const Vector<Scalar>& s) {
  if (s.size() == 0) return s;
  if ((s.array() < Scalar(0)).any()) throw ValidationError("normalize_scores: negative score");
  const Scalar peak = s.maxCoeff();
  if (peak <= Scalar(0)) return Vector<Scalar>::Zero(s.size());
  Vector<Scalar> out = s / peak;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) == peak) out(i) = Scalar(1);
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> combine_scores(const Vector<Scalar>& nq, const Vector<Scalar>& nk,
                              const Vector<Scalar>& nv, const AecParams& p) {
  if (nq.size() != nk.size() || nq.size() != nv.size()) {
    throw ValidationError("combine_scores: length mismatch");
  }
  if (p.w_q < 0 || p.w_k < 0 || p.w_v < 0 || std::abs(p.w_q + p.w_k + p.w_v - 1.0) > 1e-9) {
    throw ValidationError("combine_scores: weights must be non-negative and sum to 1");
  }
  return Scalar(p.w_q) * nq + Scalar(p.w_k) * nk + Scalar(p.w_v) * nv;
}

/// m_i = sigmoid(k (S_i - tau)).
template <typename Scalar>
Vector<Scalar> modulation(const Vector<Scalar>& fused, const AecParams& p) {
  if (!(p.k_steepness > 0)) throw ValidationError("modulation: k must be > 0");
  const Scalar k(p.k_steepness);
  const Scalar tau(p.tau);
  return fused.unaryExpr([&](Scalar s) {
    const Scalar z = k * (s - tau);
    // Split on sign to avoid exp overflow.
    return z >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-z))
                          : std::exp(z) / (Scalar(1) + std::exp(z));
  });
}

template <typename Scalar>
Vector<Scalar> erasure_strength(const Vector<Scalar>& m, const AecParams& p) {
  const Scalar lo(p.alpha_min);
  const Scalar hi(p.alpha_max);
  return (lo + (hi - lo) * m.array()).matrix();
}

/// Per-token erasure strength from the unedited Q, K, V of one unit.
template <typename Scalar>
Vector<Scalar> compute_gamma(const AttentionTriple<Scalar>& t, const Subspace<Scalar>& style,
                             const AecParams& p) {
  t.validate();
  const auto nq = normalize_scores(style_scores(t.q.data, style));
  const auto nk = normalize_scores(style_scores(t.k.data, style));
  const auto nv = normalize_scores(style_scores(t.v.data, style));
  return erasure_strength(modulation(combine_scores(nq, nk, nv, p), p), p);
}

}  // namespace dice

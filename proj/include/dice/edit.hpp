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

#include "dice/aec.hpp"
#include "dice/params.hpp"
#include "dice/subspace.hpp"

namespace dice {

/// (x U) U^T, assuming U has orthonormal columns.
template <typename Scalar>
Matrix<Scalar> project_onto(const Matrix<Scalar>& x, const Subspace<Scalar>& sub) {
  detail::check_basis_dim(x, sub, "project_onto");
  return (x * sub.basis) * sub.basis.transpose();
}

/// Row i becomes m_i - gamma_i * proj(m_i). Rows with gamma_i == 0 are copied
/// untouched.
template <typename Scalar>
Matrix<Scalar> suppress_style(const Matrix<Scalar>& m, const Subspace<Scalar>& sub,
                              const Vector<Scalar>& gamma) {
  if (gamma.size() != m.rows()) {
    throw ValidationError("suppress_style: gamma length " + std::to_string(gamma.size()) +
                          " != token count " + std::to_string(m.rows()));
  }
  if ((gamma.array() < Scalar(0)).any() || (gamma.array() > Scalar(1)).any()) {
    throw ValidationError("suppress_style: gamma entries must lie in [0, 1]");
  }
  const Matrix<Scalar> proj = project_onto(m, sub);
  Matrix<Scalar> out = m;
  for (Index i = 0; i < m.rows(); ++i) {
    if (gamma(i) != Scalar(0)) out.row(i) -= gamma(i) * proj.row(i);
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> suppress_style(const Matrix<Scalar>& m, const Subspace<Scalar>& sub, Scalar gamma) {
  return suppress_style(m, sub, Vector<Scalar>::Constant(m.rows(), gamma).eval());
}

/// Q' = Q + gamma_q (Q U) U^T.
template <typename Scalar>
Matrix<Scalar> enhance_content(const Matrix<Scalar>& q, const Subspace<Scalar>& sub,
                               Scalar gamma_q) {
  if (!(gamma_q >= Scalar(0))) throw ValidationError("enhance_content: gamma_q must be >= 0");
  if (sub.kind != SubspaceKind::kContent) {
    throw ValidationError("enhance_content: expected a content subspace");
  }
  if (gamma_q == Scalar(0)) {
    detail::check_basis_dim(q, sub, "enhance_content");
    return q;
  }
  return q + gamma_q * project_onto(q, sub);
}

/// Row-wise softmax of Q K^T / sqrt(D).
template <typename Scalar>
Matrix<Scalar> attention_weights(const AttentionTriple<Scalar>& t) {
  t.validate();
  Matrix<Scalar> logits =
      (t.q.data * t.k.data.transpose()) / std::sqrt(static_cast<Scalar>(t.scale_dim()));
  for (Index i = 0; i < logits.rows(); ++i) {
    const Scalar peak = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - peak).exp().matrix();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

template <typename Scalar>
Matrix<Scalar> edited_attention(const AttentionTriple<Scalar>& t) {
  return attention_weights(t) * t.v.data;
}

template <typename Scalar = double>
struct EditResult {
  AttentionTriple<Scalar> edited;
  Vector<Scalar> gamma;
};

/// Q gets content enhancement, K and V lose their style component with a
/// per-token strength computed once from the original triple.
template <typename Scalar>
EditResult<Scalar> apply_dice_edit(const AttentionTriple<Scalar>& t, const Subspace<Scalar>& style,
                                   const Subspace<Scalar>& content, const EraseParams& p) {
  t.validate();
  if (style.dim() != t.dim() || content.dim() != t.dim()) {
    throw ValidationError("apply_dice_edit: subspace dim does not match attention dim");
  }
  EditResult<Scalar> out;
  out.gamma = compute_gamma(t, style, p.aec);
  out.edited.d_model = t.d_model;
  out.edited.q = FeatureMatrix<Scalar>(enhance_content(t.q.data, content, Scalar(p.gamma_q)),
                                       t.q.tag);
  out.edited.k = FeatureMatrix<Scalar>(suppress_style(t.k.data, style, out.gamma), t.k.tag);
  out.edited.v = FeatureMatrix<Scalar>(suppress_style(t.v.data, style, out.gamma), t.v.tag);
  return out;
}

}  // namespace dice

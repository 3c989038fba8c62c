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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dice/align.hpp"
#include "dice/params.hpp"
#include "dice/tensor_exchange.hpp"

namespace dice {

enum class SubspaceKind { kStyle, kContent };

inline const char* to_string(SubspaceKind k) {
  return k == SubspaceKind::kStyle ? "style" : "content";
}

/// Covariance blocks of an aligned triplet. The transposed blocks
/// (Sigma_P'A, Sigma_N'A) are never stored.
template <typename Scalar = double>
struct CovarianceSet {
  Matrix<Scalar> sigma_aa;
  Matrix<Scalar> sigma_ap;
  Matrix<Scalar> sigma_an;
  Index n_samples = 0;
  bool centered = true;
};

using CovarianceSetd = CovarianceSet<double>;

/// Numerator / denominator of the contrastive Rayleigh quotient.
template <typename Scalar = double>
struct ContrastiveOperators {
  Matrix<Scalar> a_mat;
  Matrix<Scalar> b_mat;
  Scalar lambda = 1;
  Scalar epsilon = 0;
};

using ContrastiveOperatorsd = ContrastiveOperators<double>;

template <typename Scalar = double>
struct GeneralizedEigen {
  Vector<Scalar> values;   // descending
  Matrix<Scalar> vectors;  // B-orthonormal columns, matching `values`
};

template <typename Scalar = double>
struct Subspace {
  Matrix<Scalar> basis;        // D x r, orthonormal columns
  Vector<Scalar> eigenvalues;  // r values, descending
  SubspaceKind kind = SubspaceKind::kStyle;
  Matrix<Scalar> raw_eigvecs;  // generalized eigenvectors before QR
  Scalar lambda = 1;
  Scalar epsilon = 0;
  std::string tag;

  Index dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
  Matrix<Scalar> projector() const { return basis * basis.transpose(); }
};

using Subspaced = Subspace<double>;

template <typename Scalar>
struct Centered {
  FeatureMatrix<Scalar> centered;
  Vector<Scalar> mean;
};

template <typename Scalar>
Centered<Scalar> center_columns(const FeatureMatrix<Scalar>& f) {
  Centered<Scalar> out;
  out.mean = f.data.colwise().mean().transpose();
  out.centered.data = f.data.rowwise() - out.mean.transpose();
  out.centered.tag = f.tag;
  return out;
}

/// X^T Y / (N - 1). Inputs are expected to be centered already.
template <typename Scalar>
Matrix<Scalar> covariance(const FeatureMatrix<Scalar>& x, const FeatureMatrix<Scalar>& y) {
  if (x.n_tokens() != y.n_tokens() || x.dim() != y.dim()) {
    throw ValidationError("covariance: shape mismatch");
  }
  if (x.n_tokens() < 2) throw ValidationError("covariance: need at least 2 tokens");
  return x.data.transpose() * y.data / Scalar(x.n_tokens() - 1);
}

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> s = (m + m.transpose()) * Scalar(0.5);
  return s;
}

template <typename Scalar>
CovarianceSet<Scalar> compute_covariances(const AlignedTriplet<Scalar>& t, bool centered = true) {
  if (t.positive.n_tokens() != t.n_tokens() || t.negative.n_tokens() != t.n_tokens() ||
      t.positive.dim() != t.dim() || t.negative.dim() != t.dim()) {
    throw ValidationError("compute_covariances: triplet shapes differ");
  }
  if (t.n_tokens() < 2) throw ValidationError("compute_covariances: need at least 2 tokens");
  auto prep = [&](const FeatureMatrix<Scalar>& f) {
    return centered ? center_columns(f).centered : f;
  };
  const auto a = prep(t.anchor);
  const auto p = prep(t.positive);
  const auto n = prep(t.negative);
  CovarianceSet<Scalar> cov;
  cov.sigma_aa = symmetrized(covariance(a, a));
  cov.sigma_ap = covariance(a, p);
  cov.sigma_an = covariance(a, n);
  cov.n_samples = t.n_tokens();
  cov.centered = centered;
  return cov;
}

/// Relative ridge epsilon_rel * trace(Sigma_AA) / D; falls back to
/// epsilon_rel itself when the features carry no variance at all.
template <typename Scalar>
Scalar resolve_epsilon(const CovarianceSet<Scalar>& cov, const EraseParams& p) {
  if (p.epsilon) return Scalar(*p.epsilon);
  const Scalar scale = cov.sigma_aa.trace() / Scalar(cov.sigma_aa.rows());
  const Scalar eps = Scalar(p.epsilon_rel) * scale;
  return eps > Scalar(0) ? eps : Scalar(p.epsilon_rel);
}

/// Style orientation: reward Sigma_AP' Sigma_P'A, penalize Sigma_AN' Sigma_N'A.
/// Content orientation swaps the two.
template <typename Scalar>
ContrastiveOperators<Scalar> build_operators(const CovarianceSet<Scalar>& cov, SubspaceKind kind,
                                             Scalar lambda, Scalar epsilon) {
  if (!(lambda >= 0)) throw ValidationError("build_operators: lambda must be >= 0");
  if (!(epsilon > 0)) throw ValidationError("build_operators: epsilon must be > 0");
  const Matrix<Scalar> shared_style = cov.sigma_ap * cov.sigma_ap.transpose();
  const Matrix<Scalar> shared_content = cov.sigma_an * cov.sigma_an.transpose();
  const auto& reward = kind == SubspaceKind::kStyle ? shared_style : shared_content;
  const auto& penalty = kind == SubspaceKind::kStyle ? shared_content : shared_style;
  const Index d = cov.sigma_aa.rows();

  ContrastiveOperators<Scalar> ops;
  ops.a_mat = symmetrized(reward);
  ops.b_mat = symmetrized(cov.sigma_aa + lambda * penalty +
                          epsilon * Matrix<Scalar>::Identity(d, d));
  ops.lambda = lambda;
  ops.epsilon = epsilon;
  return ops;
}

template <typename Scalar>
ContrastiveOperators<Scalar> build_operators(const AlignedTriplet<Scalar>& t, Scalar lambda,
                                             Scalar epsilon, bool centered = true) {
  return build_operators(compute_covariances(t, centered), SubspaceKind::kStyle, lambda, epsilon);
}

template <typename Derived, typename Scalar>
Scalar rayleigh_quotient(const Eigen::MatrixBase<Derived>& u,
                         const ContrastiveOperators<Scalar>& ops) {
  if (u.size() != ops.a_mat.rows()) throw ValidationError("rayleigh_quotient: dim mismatch");
  const Scalar den = u.dot(ops.b_mat * u);
  if (u.squaredNorm() == Scalar(0) || den == Scalar(0)) {
    throw ValidationError("rayleigh_quotient: zero vector");
  }
  return u.dot(ops.a_mat * u) / den;
}

/// A u = rho B u via Cholesky whitening: B = L L^T, C = L^-1 A L^-T,
/// C y = rho y, u = L^-T y. Throws NumericalError if B is not PD.
template <typename Scalar>
GeneralizedEigen<Scalar> solve_generalized_eig(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw ValidationError("solve_generalized_eig: operators must be square and equal-sized");
  }
  const Index d = a.rows();
  Eigen::LLT<Matrix<Scalar>> llt(symmetrized(b));
  if (llt.info() != Eigen::Success || !llt.matrixLLT().diagonal().allFinite() ||
      (llt.matrixLLT().diagonal().array() <= Scalar(0)).any()) {
    throw NumericalError(
        "Cholesky factorization of the denominator failed (not positive definite); "
        "increase epsilon");
  }
  const auto lower = llt.matrixL();
  const Matrix<Scalar> linv_a = lower.solve(symmetrized(a));
  const Matrix<Scalar> whitened = symmetrized(lower.solve(linv_a.transpose()).eval());

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(whitened);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

  // Ascending -> descending. A is PSD, so negative values are rounding.
  GeneralizedEigen<Scalar> out;
  out.values.resize(d);
  Matrix<Scalar> y(d, d);
  for (Index i = 0; i < d; ++i) {
    out.values(i) = std::max(es.eigenvalues()(d - 1 - i), Scalar(0));
    y.col(i) = es.eigenvectors().col(d - 1 - i);
  }
  out.vectors = llt.matrixU().solve(y);
  return out;
}

template <typename Scalar>
GeneralizedEigen<Scalar> solve_generalized_eig(const ContrastiveOperators<Scalar>& ops) {
  return solve_generalized_eig(ops.a_mat, ops.b_mat);
}

/// Flips each column so that its largest-magnitude entry (first one on ties)
/// is positive.
template <typename Scalar>
void normalize_signs(Matrix<Scalar>& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    Index arg = 0;
    m.col(c).cwiseAbs().maxCoeff(&arg);
    if (m(arg, c) < Scalar(0)) m.col(c) = -m.col(c);
  }
}

template <typename Scalar>
Matrix<Scalar> orthonormalize(const Matrix<Scalar>& cols) {
  Eigen::HouseholderQR<Matrix<Scalar>> qr(cols);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(cols.rows(), cols.cols());
  return q;
}

template <typename Scalar>
Subspace<Scalar> subspace_from_eig(const GeneralizedEigen<Scalar>& eig, Index r,
                                   SubspaceKind kind) {
  if (r < 1 || r > eig.vectors.cols()) throw ValidationError("subspace rank out of range");
  Subspace<Scalar> s;
  s.kind = kind;
  s.eigenvalues = eig.values.head(r);
  s.raw_eigvecs = eig.vectors.leftCols(r);
  normalize_signs(s.raw_eigvecs);
  s.basis = orthonormalize<Scalar>(s.raw_eigvecs);
  normalize_signs(s.basis);
  return s;
}

template <typename Scalar>
Subspace<Scalar> fit_subspace(const AlignedTriplet<Scalar>& t, const EraseParams& p,
                              SubspaceKind kind) {
  const Index r = kind == SubspaceKind::kStyle ? p.r_style : p.r_content;
  if (r < 1 || r > t.dim()) {
    throw ValidationError(std::string("fit: ") + to_string(kind) + " rank " + std::to_string(r) +
                          " outside [1, " + std::to_string(t.dim()) + "]");
  }
  const auto cov = compute_covariances(t, p.centered);
  const Scalar eps = resolve_epsilon(cov, p);
  const auto ops = build_operators(cov, kind, Scalar(p.lambda), eps);
  auto s = subspace_from_eig(solve_generalized_eig(ops), r, kind);
  s.lambda = ops.lambda;
  s.epsilon = ops.epsilon;
  s.tag = t.anchor.tag;
  return s;
}

template <typename Scalar>
Subspace<Scalar> fit_style_subspace(const AlignedTriplet<Scalar>& t, const EraseParams& p) {
  return fit_subspace(t, p, SubspaceKind::kStyle);
}

template <typename Scalar>
Subspace<Scalar> fit_content_subspace(const AlignedTriplet<Scalar>& t, const EraseParams& p) {
  return fit_subspace(t, p, SubspaceKind::kContent);
}

/// Stacks several aligned units (e.g. timesteps) into one triplet.
template <typename Scalar>
AlignedTriplet<Scalar> pool_triplets(const std::vector<AlignedTriplet<Scalar>>& units) {
  if (units.empty()) throw ValidationError("pool_triplets: no units");
  const Index d = units.front().dim();
  Index rows = 0;
  for (const auto& u : units) {
    if (u.dim() != d) throw ValidationError("pool_triplets: feature dims differ across units");
    rows += u.n_tokens();
  }
  AlignedTriplet<Scalar> out;
  out.anchor.data.resize(rows, d);
  out.positive.data.resize(rows, d);
  out.negative.data.resize(rows, d);
  out.anchor.tag = units.front().anchor.tag;
  Index offset = 0;
  for (const auto& u : units) {
    const Index n = u.n_tokens();
    out.anchor.data.middleRows(offset, n) = u.anchor.data;
    out.positive.data.middleRows(offset, n) = u.positive.data;
    out.negative.data.middleRows(offset, n) = u.negative.data;
    for (Index i : u.positive_indices) out.positive_indices.push_back(i + offset);
    for (Index i : u.negative_indices) out.negative_indices.push_back(i + offset);
    offset += n;
  }
  return out;
}

/// Combines per-unit fits by taking the top-r eigenvectors of the mean
/// projector; eigenvalues are averaged position-wise.
template <typename Scalar>
Subspace<Scalar> aggregate_subspaces(const std::vector<Subspace<Scalar>>& parts) {
  if (parts.empty()) throw ValidationError("aggregate_subspaces: no parts");
  const Index d = parts.front().dim();
  const Index r = parts.front().rank();
  Matrix<Scalar> mean_proj = Matrix<Scalar>::Zero(d, d);
  Vector<Scalar> mean_eig = Vector<Scalar>::Zero(r);
  for (const auto& s : parts) {
    if (s.dim() != d || s.rank() != r || s.kind != parts.front().kind) {
      throw ValidationError("aggregate_subspaces: incompatible parts");
    }
    mean_proj += s.projector();
    mean_eig += s.eigenvalues;
  }
  mean_proj /= Scalar(parts.size());
  mean_eig /= Scalar(parts.size());

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(symmetrized(mean_proj));
  Subspace<Scalar> out;
  out.kind = parts.front().kind;
  out.basis = es.eigenvectors().rightCols(r).rowwise().reverse();
  normalize_signs(out.basis);
  out.raw_eigvecs = out.basis;
  out.eigenvalues = mean_eig;
  out.lambda = parts.front().lambda;
  out.epsilon = parts.front().epsilon;
  out.tag = parts.front().tag;
  return out;
}

}  // namespace dice

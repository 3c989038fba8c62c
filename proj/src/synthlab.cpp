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
#include "dice/synthlab.hpp"

namespace dice {
namespace {

Matrix<double> gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<double> m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

void PlantedSpec::validate() const {
  if (n_tokens < 2 || dim < 2) throw ValidationError("planted: need N >= 2 and D >= 2");
  if (r_style < 1 || r_content < 0 || layout_rank < 0) {
    throw ValidationError("planted: ranks must be non-negative (style >= 1)");
  }
  if (r_style + r_content + layout_rank > dim) {
    throw ValidationError("planted: r_style + r_content + layout_rank exceeds D");
  }
  if (decorrelate && 2 * (r_style + r_content) + layout_rank > n_tokens - 1) {
    throw ValidationError("planted: too few tokens to decorrelate coefficient blocks");
  }
  if (!(noise_sigma >= 0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("planted: noise_sigma must be finite and >= 0");
  }
}

PlantedTriplet generate_triplet(PlantedSpec spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const Index n = spec.n_tokens;
  const Index d = spec.dim;
  const Index rs = spec.r_style;
  const Index rc = spec.r_content;
  const Index rl = spec.layout_rank;

  const Matrix<double> frame = orthonormalize<double>(gaussian(d, d, rng));
  spec.ground_truth_style = frame.leftCols(rs);
  spec.ground_truth_content = frame.middleCols(rs, rc);
  spec.ground_truth_layout = frame.middleCols(rs + rc, rl);

  // Column blocks: anchor style | anchor content | positive content |
  // negative style | shared layout.
  const Index total = 2 * rs + 2 * rc + rl;
  Matrix<double> coeffs = gaussian(n, total, rng);
  if (spec.decorrelate) {
    coeffs = coeffs.rowwise() - coeffs.colwise().mean();
    coeffs = orthonormalize<double>(coeffs) * std::sqrt(double(n - 1));
  }
  const auto style_a = coeffs.leftCols(rs);
  const auto content_a = coeffs.middleCols(rs, rc);
  const auto content_p = coeffs.middleCols(rs + rc, rc);
  const auto style_n = coeffs.middleCols(rs + 2 * rc, rs);
  const Matrix<double> layout =
      spec.layout_scale * coeffs.middleCols(2 * rs + 2 * rc, rl) * spec.ground_truth_layout.transpose();

  const auto& us = spec.ground_truth_style;
  const auto& uc = spec.ground_truth_content;
  Matrix<double> anchor = style_a * us.transpose() + content_a * uc.transpose() + layout;
  Matrix<double> positive = style_a * us.transpose() + content_p * uc.transpose() + layout;
  Matrix<double> negative = style_n * us.transpose() + content_a * uc.transpose() + layout;

  if (spec.noise_sigma > 0) {
    const double rms = std::sqrt(anchor.squaredNorm() / double(anchor.size()));
    const double scale = spec.noise_sigma * rms;
    anchor += scale * gaussian(n, d, rng);
    positive += scale * gaussian(n, d, rng);
    negative += scale * gaussian(n, d, rng);
  }

  PlantedTriplet out;
  out.triplet.anchor = FeatureMatrix<double>(std::move(anchor), "synthetic_anchor");
  out.triplet.positive = FeatureMatrix<double>(std::move(positive), "synthetic_positive");
  out.triplet.negative = FeatureMatrix<double>(std::move(negative), "synthetic_negative");
  out.triplet.positive_indices.resize(static_cast<std::size_t>(n));
  std::iota(out.triplet.positive_indices.begin(), out.triplet.positive_indices.end(), Index(0));
  out.triplet.negative_indices = out.triplet.positive_indices;
  out.spec = std::move(spec);
  return out;
}

FeatureMatrix<double> permute_rows(const FeatureMatrix<double>& f, const std::vector<Index>& perm) {
  if (static_cast<Index>(perm.size()) != f.n_tokens()) {
    throw ValidationError("permute_rows: permutation length mismatch");
  }
  FeatureMatrix<double> out(Matrix<double>(f.n_tokens(), f.dim()), f.tag);
  for (Index i = 0; i < f.n_tokens(); ++i) out.data.row(i) = f.data.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<Index> random_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index(0));
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle implementation.
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace dice

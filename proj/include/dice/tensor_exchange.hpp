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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dice/errors.hpp"

namespace dice {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// DTF1 layout: "DTF1" | dtype u8 | ndim u8 | ndim x u64 LE dims | f32 LE payload.
inline constexpr std::string_view kDtfMagic = "DTF1";
inline constexpr std::uint8_t kDtypeFloat32 = 0;
inline constexpr std::size_t kDtfFixedHeader = 6;

/// A 2- or 3-axis float32 tensor with row-major payload, as stored on disk.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<float> values;

  std::size_t rank() const { return dims.size(); }
  std::uint64_t element_count() const;
};

/// N x D token features; rows are tokens (patches), columns are channels.
template <typename Scalar = double>
struct FeatureMatrix {
  Matrix<Scalar> data;
  std::string tag;

  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix<Scalar> m, std::string t = {})
      : data(std::move(m)), tag(std::move(t)) {}

  Index n_tokens() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

using FeatureMatrixd = FeatureMatrix<double>;

// Throws ValidationError naming `what` if any entry is NaN or Inf.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entry");
  }
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::string_view context = "<memory>");

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

// Writes `bytes` next to `path` and renames over it.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

template <typename Derived>
Tensor to_tensor(const Eigen::MatrixBase<Derived>& m) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.values.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      t.values.push_back(static_cast<float>(m(i, j)));
    }
  }
  return t;
}

/// C x H x W feature map -> (H*W) x C patch matrix. Row i is spatial
/// location (i / W, i % W); column c is channel c.
template <typename Scalar = double>
FeatureMatrix<Scalar> reshape_to_patches(const Tensor& fmap) {
  if (fmap.rank() != 3) {
    throw ValidationError("reshape_to_patches: expected a C x H x W tensor");
  }
  const auto channels = static_cast<Index>(fmap.dims[0]);
  const auto plane = static_cast<Index>(fmap.dims[1] * fmap.dims[2]);
  if (channels < 1 || plane < 1 ||
      fmap.values.size() != static_cast<std::size_t>(channels * plane)) {
    throw ValidationError("reshape_to_patches: dims do not match payload");
  }
  Matrix<Scalar> out(plane, channels);
  for (Index c = 0; c < channels; ++c) {
    for (Index i = 0; i < plane; ++i) {
      out(i, c) = static_cast<Scalar>(fmap.values[static_cast<std::size_t>(c * plane + i)]);
    }
  }
  return FeatureMatrix<Scalar>(std::move(out));
}

/// Inverse of reshape_to_patches.
template <typename Scalar>
Tensor patches_to_feature_map(const FeatureMatrix<Scalar>& patches, std::uint64_t height,
                              std::uint64_t width) {
  if (height * width != static_cast<std::uint64_t>(patches.n_tokens())) {
    throw ValidationError("patches_to_feature_map: H*W != number of patches");
  }
  const Index plane = patches.n_tokens();
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(patches.dim()), height, width};
  t.values.resize(static_cast<std::size_t>(plane * patches.dim()));
  for (Index c = 0; c < patches.dim(); ++c) {
    for (Index i = 0; i < plane; ++i) {
      t.values[static_cast<std::size_t>(c * plane + i)] = static_cast<float>(patches.data(i, c));
    }
  }
  return t;
}

/// Interprets a 2-axis tensor as an N x D matrix and a 3-axis tensor as a
/// feature map to be reshaped into patches.
template <typename Scalar = double>
FeatureMatrix<Scalar> to_feature_matrix(const Tensor& t, std::string tag = {}) {
  if (t.rank() == 3) {
    auto fm = reshape_to_patches<Scalar>(t);
    fm.tag = std::move(tag);
    return fm;
  }
  if (t.rank() != 2) {
    throw ValidationError("to_feature_matrix: expected 2 or 3 axes");
  }
  const auto rows = static_cast<Index>(t.dims[0]);
  const auto cols = static_cast<Index>(t.dims[1]);
  Matrix<Scalar> m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = static_cast<Scalar>(t.values[static_cast<std::size_t>(i * cols + j)]);
    }
  }
  return FeatureMatrix<Scalar>(std::move(m), std::move(tag));
}

template <typename Scalar = double>
FeatureMatrix<Scalar> read_feature_matrix(const std::filesystem::path& path) {
  return to_feature_matrix<Scalar>(read_tensor(path), path.stem().string());
}

}  // namespace dice

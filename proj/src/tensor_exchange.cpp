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
#include "dice/tensor_exchange.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>
#include <system_error>

namespace dice {
namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int b = 3; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<float>(bits);
}

std::string ctx(std::string_view context, std::string_view msg) {
  return std::string(context) + ": " + std::string(msg);
}

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.rank() != 2 && t.rank() != 3) throw ValidationError("write_tensor: ndim must be 2 or 3");
  for (auto d : t.dims) {
    if (d == 0) throw ValidationError("write_tensor: every dim must be >= 1");
  }
  if (t.element_count() != t.values.size()) {
    throw ValidationError("write_tensor: dims do not match number of values");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kDtfFixedHeader + 8 * t.rank() + 4 * t.values.size());
  out.insert(out.end(), kDtfMagic.begin(), kDtfMagic.end());
  out.push_back(kDtypeFloat32);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.dims) put_u64(out, d);
  for (float f : t.values) {
    if (!std::isfinite(f)) throw ValidationError("write_tensor: non-finite entry");
    put_f32(out, f);
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes, std::string_view context) {
  if (bytes.size() < kDtfFixedHeader) throw LengthError(ctx(context, "truncated header"));
  if (std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kDtfMagic) {
    throw FormatError(ctx(context, "bad magic (expected DTF1)"));
  }
  if (bytes[4] != kDtypeFloat32) throw FormatError(ctx(context, "unsupported dtype code"));
  const std::size_t ndim = bytes[5];
  if (ndim != 2 && ndim != 3) throw FormatError(ctx(context, "ndim must be 2 or 3"));
  const std::size_t header = kDtfFixedHeader + 8 * ndim;
  if (bytes.size() < header) throw LengthError(ctx(context, "truncated dims"));

  Tensor t;
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const auto d = get_u64(bytes.data() + kDtfFixedHeader + 8 * i);
    if (d == 0) throw FormatError(ctx(context, "zero-length dim"));
    if (count > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
      throw FormatError(ctx(context, "dims overflow"));
    }
    count *= d;
    t.dims.push_back(d);
  }
  if (bytes.size() - header != 4 * count) {
    throw LengthError(ctx(context, "payload length does not match dims"));
  }
  t.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const float f = get_f32(bytes.data() + header + 4 * i);
    if (!std::isfinite(f)) throw ValidationError(ctx(context, "non-finite entry"));
    t.values[i] = f;
  }
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes, path.string());
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  write_file_atomic(path, encode_tensor(t));
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(path.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError(path.string() + ": rename failed: " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace dice

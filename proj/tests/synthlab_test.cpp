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
#include <doctest.h>

#include <algorithm>

#include "dice/synthlab.hpp"
#include "test_util.hpp"

using namespace dice;
using namespace dice::testing;

namespace {
double style_recovery(PlantedSpec spec) {
  const auto pt = generate_triplet(spec);
  EraseParams p;
  p.r_style = static_cast<int>(spec.r_style);
  p.r_content = static_cast<int>(spec.r_content);
  return max_principal_angle<double>(fit_style_subspace(pt.triplet, p).basis,
                                     pt.spec.ground_truth_style);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

TEST_CASE("principal angles") {
  const Md e0 = Md::Identity(3, 3).col(0), e1 = Md::Identity(3, 3).col(1);
  CHECK(principal_angles<double>(Md::Identity(3, 2), Md::Identity(3, 2)).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(principal_angles<double>(e0, e1)(0) == doctest::Approx(M_PI / 2));
  const Md diag = (e0 + e1) / std::sqrt(2.0);
  CHECK(principal_angles<double>(e0, diag)(0) == doctest::Approx(M_PI / 4));
  CHECK_THROWS_AS(principal_angles<double>(Md::Ones(3, 1), e0), ValidationError);
  CHECK_THROWS_AS(principal_angles<double>(Md::Identity(3, 1), Md::Identity(4, 1)), ValidationError);

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const Md u = random_orthonormal(7, 1 + trial % 4, rng);
    const Md v = random_orthonormal(7, 1 + trial % 3, rng);
    const Vd a = principal_angles(u, v), b = principal_angles(v, u);
    REQUIRE(a.size() == std::min(u.cols(), v.cols()));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    for (Index i = 0; i + 1 < a.size(); ++i) CHECK(a(i) <= a(i + 1));
    CHECK(a.minCoeff() >= 0);
    CHECK(a.maxCoeff() <= M_PI / 2 + 1e-12);
  }
}

TEST_CASE("generate_triplet: construction") {
  PlantedSpec spec;
  spec.seed = 3;
  const auto pt = generate_triplet(spec);
  const auto& t = pt.triplet;
  CHECK(t.n_tokens() == 256);
  CHECK(t.dim() == 32);
  const Md& us = pt.spec.ground_truth_style;
  const Md& uc = pt.spec.ground_truth_content;
  CHECK((us.transpose() * uc).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((us.transpose() * us - Md::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(((t.anchor.data - t.positive.data) * us).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(((t.anchor.data - t.negative.data) * uc).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((t.anchor.data * us).norm() > 1.0);
  for (Index i = 0; i < t.n_tokens(); ++i) CHECK(t.positive_indices[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("generate_triplet: determinism") {
  PlantedSpec spec;
  spec.seed = 11;
  spec.noise_sigma = 0.1;
  spec.layout_rank = 6;
  const auto a = generate_triplet(spec), b = generate_triplet(spec);
  CHECK(a.triplet.anchor.data == b.triplet.anchor.data);
  CHECK(a.triplet.positive.data == b.triplet.positive.data);
  CHECK(a.triplet.negative.data == b.triplet.negative.data);
  spec.seed = 12;
  CHECK(generate_triplet(spec).triplet.anchor.data != a.triplet.anchor.data);
}

TEST_CASE("generate_triplet: validation") {
  PlantedSpec spec;
  spec.r_style = 20;
  spec.r_content = 20;
  CHECK_THROWS_AS(generate_triplet(spec), ValidationError);
  spec = PlantedSpec{};
  spec.noise_sigma = -1;
  CHECK_THROWS_AS(generate_triplet(spec), ValidationError);
  spec = PlantedSpec{};
  spec.r_style = 0;
  CHECK_THROWS_AS(generate_triplet(spec), ValidationError);
}

TEST_CASE("noiseless recovery of the planted style span") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    PlantedSpec spec;
    spec.seed = seed;
    CHECK(style_recovery(spec) < 1e-3);
  }
}

TEST_CASE("recovery error grows with noise") {
  // Content fills the rest of the space. Directions carrying noise alone get
  // inflated by the whitening step and would dominate the error.
  std::vector<double> medians;
  for (double sigma : {0.0, 0.01, 0.05, 0.1}) {
    std::vector<double> angles;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      PlantedSpec spec;
      spec.seed = seed;
      spec.noise_sigma = sigma;
      spec.r_content = spec.dim - spec.r_style;
      angles.push_back(style_recovery(spec));
    }
    medians.push_back(median(angles));
  }
  for (std::size_t i = 0; i + 1 < medians.size(); ++i) CHECK(medians[i] <= medians[i + 1]);
  CHECK(medians[2] < 0.15);
}

TEST_CASE("permutations") {
  const auto perm = random_permutation(50, 9);
  std::vector<Index> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
  CHECK(random_permutation(50, 9) == perm);
  CHECK(random_permutation(50, 10) != perm);

  std::mt19937_64 rng(62);
  const Md x = random_matrix(50, 3, rng);
  const auto y = permute_rows(fm(x), perm);
  for (Index i = 0; i < 50; ++i) CHECK(y.data.row(i) == x.row(perm[static_cast<std::size_t>(i)]));
  CHECK_THROWS_AS(permute_rows(fm(x), random_permutation(49, 1)), ValidationError);
}

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

#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "dice/commands.hpp"
#include "dice/subspace_io.hpp"
#include "dice/synthlab.hpp"
#include "dice/tensor_exchange.hpp"
#include "test_util.hpp"

using namespace dice;
using namespace dice::cli;
using namespace dice::testing;
using nlohmann::json;

namespace {

struct Captured {
  std::ostringstream out, err;
  Console con{out, err, false};
};

std::string slurp(const Path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_json(const Path& p, const json& j) { std::ofstream(p) << j.dump(); }

PlantedTriplet write_planted(const Path& dir, PlantedSpec spec) {
  std::filesystem::create_directories(dir);
  auto pt = generate_triplet(spec);
  write_tensor(to_tensor(pt.triplet.anchor.data), dir / "anchor.dtf");
  write_tensor(to_tensor(pt.triplet.positive.data), dir / "positive.dtf");
  write_tensor(to_tensor(pt.triplet.negative.data), dir / "negative.dtf");
  return pt;
}

PlantedSpec small_spec(std::uint64_t seed = 1) {
  PlantedSpec s;
  s.n_tokens = 96;
  s.dim = 12;
  s.r_style = 3;
  s.r_content = 3;
  s.layout_rank = 6;
  s.layout_scale = 2.0;
  s.seed = seed;
  return s;
}

// Writes an aligned directory that keeps the planted row correspondence,
// bypassing cosine matching.
PlantedTriplet write_aligned(const Path& dir, PlantedSpec spec) {
  auto pt = write_planted(dir, spec);
  std::vector<long> ids(static_cast<std::size_t>(spec.n_tokens));
  std::iota(ids.begin(), ids.end(), 0L);
  write_json(dir / "alignment.json",
             {{"units",
               {{{"layer", ""}, {"timestep", nullptr}, {"anchor", "anchor.dtf"},
                 {"positive", "positive.dtf"}, {"negative", "negative.dtf"},
                 {"positive_indices", ids}, {"negative_indices", ids}}}}});
  return pt;
}

Path write_config(const Path& dir, const json& j) {
  const Path p = dir / "config.json";
  write_json(p, j);
  return p;
}

}  // namespace

TEST_CASE("align: exit codes and outputs") {
  TempDir dir("align");
  write_planted(dir.path / "in", small_spec());
  Captured c;
  const Path in = dir.path / "in";
  CHECK(cmd_align(in / "anchor.dtf", in / "positive.dtf", in / "negative.dtf", dir.path / "out",
                  c.con) == 0);
  CHECK(std::filesystem::exists(dir.path / "out" / "positive.dtf"));
  CHECK(std::filesystem::exists(dir.path / "out" / "negative.dtf"));
  const auto doc = read_json_file(dir.path / "out" / "alignment.json");
  const auto idx = doc.at("units").at(0).at("positive_indices").get<std::vector<long>>();
  CHECK(idx.size() == 96);
  for (long i : idx) CHECK((i >= 0 && i < 96));

  std::mt19937_64 rng(1);
  write_tensor(to_tensor(random_matrix(96, 11, rng)), dir.path / "narrow.dtf");
  Captured bad;
  CHECK(cmd_align(in / "anchor.dtf", dir.path / "narrow.dtf", in / "negative.dtf",
                  dir.path / "out2", bad.con) == 2);
  CHECK(bad.err.str().find("narrow.dtf") != std::string::npos);

  Captured missing;
  CHECK(cmd_align(in / "anchor.dtf", in / "nope.dtf", in / "negative.dtf", dir.path / "out3",
                  missing.con) == 3);
  CHECK(missing.err.str().find("nope.dtf") != std::string::npos);

  std::ofstream(dir.path / "junk.dtf") << "DTF2 garbage";
  Captured junk;
  CHECK(cmd_align(in / "anchor.dtf", dir.path / "junk.dtf", in / "negative.dtf", dir.path / "out4",
                  junk.con) == 3);
}

TEST_CASE("align: identical inputs give identity indices") {
  TempDir dir("align-same");
  write_planted(dir.path, small_spec());
  Captured c;
  const Path a = dir.path / "anchor.dtf";
  REQUIRE(cmd_align(a, a, a, dir.path / "out", c.con) == 0);
  const auto u = read_json_file(dir.path / "out" / "alignment.json").at("units").at(0);
  const auto neg = u.at("negative_indices").get<std::vector<long>>();
  for (std::size_t i = 0; i < neg.size(); ++i) CHECK(neg[i] == long(i));
}

TEST_CASE("fit: planted recovery through files") {
  TempDir dir("fit");
  PlantedSpec spec = small_spec(4);
  spec.layout_rank = 0;
  const auto pt = write_aligned(dir.path / "aligned", spec);
  Captured c;
  const auto cfg = write_config(dir.path, {{"r_style", 3}, {"r_content", 3}});
  REQUIRE(cmd_fit(dir.path / "aligned", cfg, dir.path / "sub", c.con) == 0);
  CHECK(c.out.str().find("fit wall-clock:") != std::string::npos);
  CHECK(c.out.str().find("eigenvalues:") != std::string::npos);

  const auto style = load_subspace(dir.path / "sub", "style");
  const auto content = load_subspace(dir.path / "sub", "content");
  CHECK(style.kind == SubspaceKind::kStyle);
  CHECK(content.kind == SubspaceKind::kContent);
  // f32 storage bounds the achievable angle well below the threshold.
  CHECK(max_principal_angle<double>(style.basis, pt.spec.ground_truth_style) < 1e-3);
  CHECK(max_principal_angle<double>(content.basis, pt.spec.ground_truth_content) < 1e-3);
  const auto sidecar = read_json_file(dir.path / "sub" / "style.json");
  CHECK(sidecar.at("r") == 3);
  CHECK(sidecar.at("kind") == "style");
  CHECK(sidecar.at("eigenvalues").size() == 3);
}

TEST_CASE("fit: rank above D is rejected before solving") {
  TempDir dir("fit-rank");
  write_planted(dir.path / "in", small_spec());
  Captured c;
  const Path in = dir.path / "in";
  REQUIRE(cmd_align(in / "anchor.dtf", in / "positive.dtf", in / "negative.dtf",
                    dir.path / "aligned", c.con) == 0);
  const auto cfg = write_config(dir.path, {{"r_style", 13}});
  Captured bad;
  CHECK(cmd_fit(dir.path / "aligned", cfg, dir.path / "sub", bad.con) == 2);
  CHECK(bad.err.str().find("r_style") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir.path / "sub" / "style.dtf"));

  Captured missing;
  CHECK(cmd_fit(dir.path / "nowhere", std::nullopt, dir.path / "sub", missing.con) == 3);
}

TEST_CASE("fit: a singular denominator maps to the numerical exit code") {
  // Rank-one anchor at a large scale and a vanishing ridge: rounding in the
  // rotated null space leaves Cholesky without a positive pivot.
  TempDir dir("fit-singular");
  std::mt19937_64 rng(3);
  const Index n = 40, d = 8;
  const Md dir_row = random_matrix(1, d, rng).rowwise().normalized();
  const Md a = 1e6 * random_matrix(n, 1, rng) * dir_row;
  write_tensor(to_tensor(a), dir.path / "a.dtf");
  Captured c;
  REQUIRE(cmd_align(dir.path / "a.dtf", dir.path / "a.dtf", dir.path / "a.dtf",
                    dir.path / "aligned", c.con) == 0);
  const auto cfg = write_config(dir.path, {{"r_style", 1}, {"r_content", 1}, {"epsilon", 1e-300},
                                           {"lambda", 0}});
  Captured bad;
  CHECK(cmd_fit(dir.path / "aligned", cfg, dir.path / "sub", bad.con) == 4);
  CHECK(bad.err.str().find("epsilon") != std::string::npos);
}

TEST_CASE("fit: manifest units, interval filtering and per-step mode") {
  TempDir dir("fit-steps");
  json units = json::array();
  for (long t : {50L, 150L, 250L}) {
    const Path sub = dir.path / ("t" + std::to_string(t));
    write_planted(sub, small_spec(static_cast<std::uint64_t>(t)));
    for (const char* layer : {"down0", "up3"}) {
      units.push_back({{"layer", layer},
                       {"timestep", t},
                       {"anchor", (sub / "anchor.dtf").string()},
                       {"positive", (sub / "positive.dtf").string()},
                       {"negative", (sub / "negative.dtf").string()}});
    }
  }
  write_json(dir.path / "capture.json", {{"units", units}});
  Captured c;
  REQUIRE(cmd_align_manifest(dir.path / "capture.json", dir.path / "aligned", c.con) == 0);
  CHECK(std::filesystem::exists(dir.path / "aligned" / "u5_negative.dtf"));

  const auto pooled = write_config(dir.path, {{"r_style", 3}, {"r_content", 3}});
  Captured p;
  REQUIRE(cmd_fit(dir.path / "aligned", pooled, dir.path / "pooled", p.con) == 0);
  CHECK(p.out.str().find("from 2 unit(s)") != std::string::npos);  // t=50 is outside [100, 400]

  const auto per_step =
      write_config(dir.path, {{"r_style", 3}, {"r_content", 3}, {"pooling_mode", "per-step"}});
  Captured s;
  REQUIRE(cmd_fit(dir.path / "aligned", per_step, dir.path / "per_step", s.con) == 0);
  const auto a = load_subspace(dir.path / "pooled", "style");
  const auto b = load_subspace(dir.path / "per_step", "style");
  CHECK(a.rank() == 3);
  CHECK(b.rank() == 3);

  const auto empty = write_config(dir.path, {{"r_style", 3}, {"r_content", 3},
                                             {"extraction_interval", {500, 600}}});
  Captured e;
  CHECK(cmd_fit(dir.path / "aligned", empty, dir.path / "empty", e.con) == 2);
}

namespace {
// Fits a small planted triplet and writes a Q/K/V manifest whose K and V rows
// lie in the planted style span.
struct EditFixture {
  TempDir dir{"edit"};
  PlantedTriplet pt;
  Path manifest;

  EditFixture() {
    pt = write_aligned(dir.path / "aligned", small_spec(9));
    Captured c;
    const auto cfg = write_config(dir.path, {{"r_style", 3}, {"r_content", 3}});
    REQUIRE(cmd_fit(dir.path / "aligned", cfg, dir.path / "sub", c.con) == 0);

    std::mt19937_64 rng(5);
    const Md coeff = random_matrix(10, 3, rng).rowwise().normalized();
    const Md kv = coeff * pt.spec.ground_truth_style.transpose();
    write_tensor(to_tensor(random_matrix(10, 12, rng)), dir.path / "q.dtf");
    write_tensor(to_tensor(kv), dir.path / "k.dtf");
    write_tensor(to_tensor(kv), dir.path / "v.dtf");
    json tensors = json::array();
    for (const char* r : {"q", "k", "v"}) {
      tensors.push_back({{"layer", "down0"}, {"timestep", 200}, {"head", 1}, {"role", r},
                         {"path", std::string(r) + ".dtf"}});
    }
    manifest = dir.path / "qkv.json";
    write_json(manifest, {{"tensors", tensors}});
  }
};
}  // namespace

TEST_CASE("edit: outputs, gamma diagnostics and the no-op configuration") {
  EditFixture f;
  Captured c;
  const auto steep = write_config(f.dir.path, {{"aec", {{"k", 40}}}});
  REQUIRE(cmd_edit(f.manifest, f.dir.path / "sub", steep, f.dir.path / "out", c.con) == 0);
  const auto out_manifest = read_json_file(f.dir.path / "out" / "manifest.json");
  CHECK(out_manifest.at("tensors").size() == 4);
  const auto gamma = read_feature_matrix<double>(f.dir.path / "out" / "down0_t200_h1_gamma.dtf");
  CHECK(gamma.dim() == 1);
  CHECK(gamma.n_tokens() == 10);
  // Every K/V row sits in the style span with unit norm, so each token is at
  // the component maxima and the fused score is far above tau.
  CHECK(gamma.data.minCoeff() > 0.999);
  const auto k = read_feature_matrix<double>(f.dir.path / "out" / "down0_t200_h1_k.dtf");
  CHECK(k.data.rowwise().norm().maxCoeff() < 2e-3);

  const auto noop = write_config(f.dir.path, {{"gamma_q", 0}, {"aec", {{"alpha_min", 0}, {"alpha_max", 0}}}});
  Captured n;
  REQUIRE(cmd_edit(f.manifest, f.dir.path / "sub", noop, f.dir.path / "noop", n.con) == 0);
  for (const char* r : {"q", "k", "v"}) {
    CAPTURE(r);
    CHECK(slurp(f.dir.path / "noop" / ("down0_t200_h1_" + std::string(r) + ".dtf")) ==
          slurp(f.dir.path / (std::string(r) + ".dtf")));
  }
}

TEST_CASE("edit: error classes") {
  EditFixture f;
  std::mt19937_64 rng(6);
  write_tensor(to_tensor(random_matrix(10, 7, rng)), f.dir.path / "k.dtf");
  write_tensor(to_tensor(random_matrix(10, 7, rng)), f.dir.path / "v.dtf");
  write_tensor(to_tensor(random_matrix(10, 7, rng)), f.dir.path / "q.dtf");
  Captured c;
  CHECK(cmd_edit(f.manifest, f.dir.path / "sub", std::nullopt, f.dir.path / "out", c.con) == 2);
  write_tensor(to_tensor(random_matrix(9, 7, rng)), f.dir.path / "q.dtf");
  Captured s;
  CHECK(cmd_edit(f.manifest, f.dir.path / "sub", std::nullopt, f.dir.path / "out", s.con) == 2);
  Captured m;
  CHECK(cmd_edit(f.dir.path / "absent.json", f.dir.path / "sub", std::nullopt, f.dir.path / "out",
                 m.con) == 3);
  write_json(f.dir.path / "roles.json", {{"tensors", {{{"role", "x"}, {"path", "q.dtf"}}}}});
  Captured r;
  CHECK(cmd_edit(f.dir.path / "roles.json", f.dir.path / "sub", std::nullopt, f.dir.path / "out",
                 r.con) == 3);
}

TEST_CASE("dlpips command") {
  TempDir dir("dlpips");
  write_json(dir.path / "m.json", json::parse(R"({"source": "lpips", "instances": [
    {"id": "row1", "l_gene": 0.673, "l_base_style": [0.561], "l_erase_style": [0.782],
     "l_base_cont": [0.772], "l_erase_cont": [0.716]},
    {"id": "row2", "l_gene": 0.664, "l_base_style": [0.486], "l_erase_style": [0.737],
     "l_base_cont": [0.831], "l_erase_cont": [0.788]}]})"));
  Captured c;
  REQUIRE(cmd_dlpips(dir.path / "m.json", dir.path / "r" / "report.json", c.con) == 0);
  const std::string table = slurp(dir.path / "r" / "report.txt");
  CHECK(table == c.out.str());
  CHECK(table.find("0.221") != std::string::npos);
  CHECK(table.find("-0.043") != std::string::npos);
  const auto rep = read_json_file(dir.path / "r" / "report.json");
  CHECK(rep.at("instances").at(1).at("c_content").get<double>() == doctest::Approx(-0.043));

  write_json(dir.path / "empty.json", {{"instances", json::array()}});
  Captured e;
  CHECK(cmd_dlpips(dir.path / "empty.json", dir.path / "e.json", e.con) == 2);

  write_json(dir.path / "same.json", json::parse(R"({"instances": [{"l_gene": 0.5,
    "l_base_style": [0.4, 0.6], "l_erase_style": [0.4, 0.6], "l_base_cont": [0.3], "l_erase_cont": [0.3]}]})"));
  Captured z;
  REQUIRE(cmd_dlpips(dir.path / "same.json", dir.path / "z.json", z.con) == 0);
  const auto zr = read_json_file(dir.path / "z.json");
  CHECK(zr.at("c_style").get<double>() == 0.0);
  CHECK(zr.at("c_content").get<double>() == 0.0);
  CHECK(zr.at("h_o").get<double>() == 0.0);

  Captured m;
  CHECK(cmd_dlpips(dir.path / "missing.json", dir.path / "x.json", m.con) == 3);
}

TEST_CASE("prompts and clip-summary commands") {
  TempDir dir("prompts");
  Captured c;
  REQUIRE(cmd_prompts("Van Gogh", "road", "flower", "Monet", "", dir.path / "p.json", c.con) == 0);
  const auto p = read_json_file(dir.path / "p.json");
  CHECK(p.at("content_prompts").at(2).at("text") == "An image showing a road");
  CHECK(c.err.str().empty());

  write_json(dir.path / "s.json", json::parse(R"({"scores": [
    {"prompt_id": "style_1", "score": 30}, {"prompt_id": "style_2", "score": 32},
    {"prompt_id": "content_1", "score": 26}, {"prompt_id": "content_2", "score": 28}]})"));
  Captured s;
  REQUIRE(cmd_clip_summary(dir.path / "s.json", "Van Gogh", "road", "", dir.path / "o.json", s.con) == 0);
  const auto o = read_json_file(dir.path / "o.json");
  CHECK(o.at("cs_style").get<double>() == doctest::Approx(31));
  CHECK(o.at("cs_content").get<double>() == doctest::Approx(27));

  write_json(dir.path / "u.json", json::parse(R"({"scores": [{"prompt_id": "style_7", "score": 1}]})"));
  Captured u;
  CHECK(cmd_clip_summary(dir.path / "u.json", "Van Gogh", "road", "", std::nullopt, u.con) == 2);
}

TEST_CASE("demo-synthetic") {
  SUBCASE("default configuration passes") {
    Captured c;
    CHECK(cmd_demo_synthetic(std::nullopt, 0, std::nullopt, c.con) == 0);
    CHECK(c.out.str().find("all checks passed") != std::string::npos);
  }
  SUBCASE("extreme noise fails a named recovery check") {
    TempDir dir("demo-noise");
    const auto cfg = write_config(dir.path, {{"synthetic", {{"noise_sigma", 0.5}}}});
    Captured c;
    CHECK(cmd_demo_synthetic(cfg, 0, std::nullopt, c.con) == 1);
    CHECK(c.err.str().find("recovery") != std::string::npos);
  }
  SUBCASE("fixed seed prints identical angles") {
    Captured a, b;
    REQUIRE(cmd_demo_synthetic(std::nullopt, 7, std::nullopt, a.con) == 0);
    REQUIRE(cmd_demo_synthetic(std::nullopt, 7, std::nullopt, b.con) == 0);
    CHECK(a.out.str() == b.out.str());
  }
}

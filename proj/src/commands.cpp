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
#include "dice/commands.hpp"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dice/align.hpp"
#include "dice/edit.hpp"
#include "dice/eval.hpp"
#include "dice/parallel.hpp"
#include "dice/subspace.hpp"
#include "dice/subspace_io.hpp"
#include "dice/synthlab.hpp"
#include "dice/tensor_exchange.hpp"

namespace dice::cli {
namespace {

using nlohmann::json;

class CheckFailed : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kAssertion; }
};

template <typename Fn>
int guarded(Console& con, Fn&& fn) {
  try {
    fn();
    return static_cast<int>(ExitCode::kOk);
  } catch (const Error& e) {
    con.err << "error: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    con.err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kFormat);
  } catch (const json::exception& e) {
    con.err << "error: malformed JSON: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kFormat);
  } catch (const std::exception& e) {
    con.err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kAssertion);
  }
}

Path resolve(const Path& base_dir, const std::string& p) {
  const Path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

FeatureMatrixd load_features(const Path& p) {
  auto fm = read_feature_matrix<double>(p);
  if (fm.n_tokens() < 1 || fm.dim() < 1) throw ValidationError(p.string() + ": empty tensor");
  return fm;
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw FormatError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(where + ": bad type for '" + key + "'");
  }
}

std::optional<long> optional_timestep(const json& j) {
  if (!j.contains("timestep") || j.at("timestep").is_null()) return std::nullopt;
  return j.at("timestep").get<long>();
}

json timestep_json(const std::optional<long>& t) { return t ? json(*t) : json(nullptr); }

std::string describe_shape(const FeatureMatrixd& f) {
  return std::to_string(f.n_tokens()) + "x" + std::to_string(f.dim());
}

struct CaptureUnit {
  std::string layer;
  std::optional<long> timestep;
  Path anchor, positive, negative;
};

json align_unit(const CaptureUnit& unit, const std::string& prefix, const Path& out) {
  const auto anchor = load_features(unit.anchor);
  const auto positive = load_features(unit.positive);
  const auto negative = load_features(unit.negative);
  for (const auto* other : {&positive, &negative}) {
    const Path& which = other == &positive ? unit.positive : unit.negative;
    if (other->dim() != anchor.dim() || other->n_tokens() != anchor.n_tokens()) {
      throw ValidationError(which.string() + ": shape " + describe_shape(*other) +
                            " does not match anchor " + describe_shape(anchor));
    }
  }
  const auto t = align_triplet(anchor, positive, negative);
  const auto pos_name = prefix + "positive.dtf";
  const auto neg_name = prefix + "negative.dtf";
  write_tensor(to_tensor(t.positive.data), out / pos_name);
  write_tensor(to_tensor(t.negative.data), out / neg_name);
  return {{"layer", unit.layer},
          {"timestep", timestep_json(unit.timestep)},
          {"anchor", std::filesystem::absolute(unit.anchor).lexically_normal().string()},
          {"positive", pos_name},
          {"negative", neg_name},
          {"n_tokens", anchor.n_tokens()},
          {"dim", anchor.dim()},
          {"positive_indices", t.positive_indices},
          {"negative_indices", t.negative_indices}};
}

void align_units(const std::vector<CaptureUnit>& units, const Path& out, Console& con) {
  std::filesystem::create_directories(out);
  std::vector<json> rows(units.size());
  const bool single = units.size() == 1 && units.front().layer.empty();
  parallel_for(units.size(), [&](std::size_t i) {
    rows[i] = align_unit(units[i], single ? "" : "u" + std::to_string(i) + "_", out);
  });
  json doc = {{"units", rows}};
  write_json_file(out / "alignment.json", doc);
  for (const auto& r : rows) {
    std::size_t moved = 0;
    const auto idx = r.at("positive_indices").get<std::vector<long>>();
    for (std::size_t i = 0; i < idx.size(); ++i) moved += idx[i] != static_cast<long>(i);
    con.out << "aligned " << (r.at("layer").get<std::string>().empty() ? "triplet" : r.at("layer").get<std::string>())
            << ": " << r.at("n_tokens") << " tokens, " << moved << " positive rows re-indexed\n";
  }
}

struct LoadedUnit {
  std::string layer;
  std::optional<long> timestep;
  AlignedTripletd triplet;
};

std::vector<LoadedUnit> load_aligned(const Path& dir) {
  const auto doc = read_json_file(dir / "alignment.json");
  if (!doc.contains("units") || !doc.at("units").is_array() || doc.at("units").empty()) {
    throw FormatError((dir / "alignment.json").string() + ": no units");
  }
  const auto& units = doc.at("units");
  std::vector<LoadedUnit> out(units.size());
  parallel_for(units.size(), [&](std::size_t i) {
    const auto& u = units[i];
    const std::string where = "alignment.json unit " + std::to_string(i);
    auto& lu = out[i];
    lu.layer = u.value("layer", std::string{});
    lu.timestep = optional_timestep(u);
    lu.triplet.anchor = load_features(resolve(dir, field<std::string>(u, "anchor", where)));
    lu.triplet.positive = load_features(resolve(dir, field<std::string>(u, "positive", where)));
    lu.triplet.negative = load_features(resolve(dir, field<std::string>(u, "negative", where)));
    for (auto* m : {&lu.triplet.positive, &lu.triplet.negative}) {
      if (m->n_tokens() != lu.triplet.anchor.n_tokens() || m->dim() != lu.triplet.anchor.dim()) {
        throw ValidationError(where + ": aligned matrices do not match the anchor shape");
      }
    }
    auto to_index = [](const std::vector<long>& v) { return std::vector<Index>(v.begin(), v.end()); };
    lu.triplet.positive_indices = to_index(field<std::vector<long>>(u, "positive_indices", where));
    lu.triplet.negative_indices = to_index(field<std::vector<long>>(u, "negative_indices", where));
  });
  return out;
}

bool in_interval(const std::optional<long>& t, const std::array<long, 2>& iv) {
  return !t || (*t >= iv[0] && *t <= iv[1]);
}

Subspaced fit_units(const std::vector<const LoadedUnit*>& units, const PipelineConfig& cfg,
                    SubspaceKind kind) {
  if (cfg.pooling_mode == PoolingMode::kPool || units.size() == 1) {
    std::vector<AlignedTripletd> ts;
    for (const auto* u : units) ts.push_back(u->triplet);
    auto s = fit_subspace(ts.size() == 1 ? ts.front() : pool_triplets(ts), cfg.erase, kind);
    s.tag = units.front()->layer;
    return s;
  }
  std::vector<Subspaced> parts(units.size());
  parallel_for(units.size(),
               [&](std::size_t i) { parts[i] = fit_subspace(units[i]->triplet, cfg.erase, kind); });
  auto s = aggregate_subspaces(parts);
  s.tag = units.front()->layer;
  return s;
}

std::string format_values(const Vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
  return os.str();
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

void check(bool ok, const std::string& name, const std::string& detail, Console& con) {
  if (!ok) throw CheckFailed("check '" + name + "' failed: " + detail);
  con.out << "check " << name << ": ok (" << detail << ")\n";
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

void run_align(const Path& anchor, const Path& positive, const Path& negative, const Path& out,
               Console& con) {
  align_units({CaptureUnit{"", std::nullopt, anchor, positive, negative}}, out, con);
}

int cmd_align(const Path& anchor, const Path& positive, const Path& negative, const Path& out,
              Console& con) {
  return guarded(con, [&] { run_align(anchor, positive, negative, out, con); });
}

int cmd_align_manifest(const Path& capture_manifest, const Path& out, Console& con) {
  return guarded(con, [&] {
    const auto doc = read_json_file(capture_manifest);
    const Path base = capture_manifest.parent_path();
    if (!doc.contains("units") || !doc.at("units").is_array() || doc.at("units").empty()) {
      throw FormatError(capture_manifest.string() + ": 'units' must be a nonempty list");
    }
    std::vector<CaptureUnit> units;
    for (const auto& u : doc.at("units")) {
      const std::string where = capture_manifest.string() + " unit " + std::to_string(units.size());
      units.push_back({u.value("layer", std::string{}), optional_timestep(u),
                       resolve(base, field<std::string>(u, "anchor", where)),
                       resolve(base, field<std::string>(u, "positive", where)),
                       resolve(base, field<std::string>(u, "negative", where))});
    }
    align_units(units, out, con);
  });
}

void run_fit(const Path& aligned_dir, const PipelineConfig& cfg, const Path& out, Console& con) {
  const auto start = std::chrono::steady_clock::now();
  const auto units = load_aligned(aligned_dir);

  const Index dim = units.front().triplet.dim();
  for (const auto& u : units) {
    if (u.triplet.dim() != dim) throw ValidationError("fit: feature dims differ across units");
  }
  cfg.erase.validate_ranks(static_cast<long>(dim));

  auto select = [&](const std::string& layer) {
    std::vector<const LoadedUnit*> picked;
    for (const auto& u : units) {
      if ((u.layer.empty() || u.layer == layer) && in_interval(u.timestep, cfg.extraction_interval)) {
        picked.push_back(&u);
      }
    }
    if (picked.empty()) {
      throw ValidationError("fit: no aligned units for layer '" + layer +
                            "' inside the extraction interval");
    }
    return picked;
  };
  const auto style_units = select(cfg.style_layer_tag);
  const auto content_units = select(cfg.content_layer_tag);

  const auto style = fit_units(style_units, cfg, SubspaceKind::kStyle);
  const auto content = fit_units(content_units, cfg, SubspaceKind::kContent);
  save_subspace(style, out, "style");
  save_subspace(content, out, "content");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  con.out << "style subspace: r=" << style.rank() << " D=" << style.dim() << " from "
          << style_units.size() << " unit(s), epsilon=" << style.epsilon << '\n';
  con.out << "  eigenvalues: " << format_values(style.eigenvalues) << '\n';
  con.out << "content subspace: r=" << content.rank() << " D=" << content.dim() << " from "
          << content_units.size() << " unit(s), epsilon=" << content.epsilon << '\n';
  con.out << "  eigenvalues: " << format_values(content.eigenvalues) << '\n';
  con.out << "fit wall-clock: " << std::fixed << std::setprecision(3) << secs << " s"
          << (secs > 3.0 ? " (above the 3 s budget)" : "") << '\n'
          << std::defaultfloat;
}

int cmd_fit(const Path& aligned_dir, const std::optional<Path>& config, const Path& out,
            Console& con) {
  return guarded(con, [&] { run_fit(aligned_dir, load_config(config), out, con); });
}

void run_edit(const Path& qkv_manifest, const Path& subspace_dir, const PipelineConfig& cfg,
              const Path& out, Console& con) {
  const auto doc = read_json_file(qkv_manifest);
  const Path base = qkv_manifest.parent_path();
  if (!doc.contains("tensors") || !doc.at("tensors").is_array() || doc.at("tensors").empty()) {
    throw FormatError(qkv_manifest.string() + ": 'tensors' must be a nonempty list");
  }

  struct Group {
    json key;
    std::string prefix;
    std::map<std::string, Path> roles;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> by_prefix;
  for (const auto& e : doc.at("tensors")) {
    const std::string where = qkv_manifest.string() + " entry";
    const auto role = field<std::string>(e, "role", where);
    if (role != "q" && role != "k" && role != "v") {
      throw FormatError(where + ": role must be q, k or v (got '" + role + "')");
    }
    const auto layer = e.value("layer", std::string{});
    const auto timestep = optional_timestep(e);
    const std::optional<long> head =
        e.contains("head") && !e.at("head").is_null() ? std::optional<long>(e.at("head").get<long>())
                                                       : std::nullopt;
    std::string prefix = layer.empty() ? "unit" : sanitize(layer);
    if (timestep) prefix += "_t" + std::to_string(*timestep);
    if (head) prefix += "_h" + std::to_string(*head);
    auto [it, fresh] = by_prefix.emplace(prefix, groups.size());
    if (fresh) {
      groups.push_back({{{"layer", layer},
                         {"timestep", timestep_json(timestep)},
                         {"head", head ? json(*head) : json(nullptr)}},
                        prefix,
                        {}});
    }
    auto& g = groups[it->second];
    if (!g.roles.emplace(role, resolve(base, field<std::string>(e, "path", where))).second) {
      throw FormatError(where + ": duplicate role '" + role + "' for " + prefix);
    }
  }
  for (const auto& g : groups) {
    for (const char* r : {"q", "k", "v"}) {
      if (!g.roles.contains(r)) throw FormatError(qkv_manifest.string() + ": " + g.prefix + " lacks role " + r);
    }
  }

  const auto style = load_subspace(subspace_dir, "style");
  const auto content = load_subspace(subspace_dir, "content");
  std::filesystem::create_directories(out);

  std::vector<json> entries(groups.size());
  std::vector<std::string> notes(groups.size());
  parallel_for(groups.size(), [&](std::size_t i) {
    const auto& g = groups[i];
    AttentionTripled t;
    t.q = load_features(g.roles.at("q"));
    t.k = load_features(g.roles.at("k"));
    t.v = load_features(g.roles.at("v"));
    if (t.k.n_tokens() != t.q.n_tokens() || t.v.n_tokens() != t.q.n_tokens() ||
        t.k.dim() != t.q.dim() || t.v.dim() != t.q.dim()) {
      throw ValidationError(g.prefix + ": q, k, v shapes differ (" + describe_shape(t.q) + ", " +
                            describe_shape(t.k) + ", " + describe_shape(t.v) + ")");
    }
    if (t.q.dim() != style.dim()) {
      throw ValidationError(g.prefix + ": feature dim " + std::to_string(t.q.dim()) +
                            " does not match subspace dim " + std::to_string(style.dim()));
    }
    const auto res = apply_dice_edit(t, style, content, cfg.erase);
    json list = json::array();
    auto emit = [&](const char* role, const Matrix<double>& m) {
      const std::string name = g.prefix + "_" + role + ".dtf";
      write_tensor(to_tensor(m), out / name);
      json e = g.key;
      e["role"] = role;
      e["path"] = name;
      list.push_back(e);
    };
    emit("q", res.edited.q.data);
    emit("k", res.edited.k.data);
    emit("v", res.edited.v.data);
    emit("gamma", Matrix<double>(res.gamma));
    entries[i] = list;
    std::ostringstream os;
    os << g.prefix << ": " << t.n_tokens() << " tokens, gamma min/mean/max = " << res.gamma.minCoeff()
       << " / " << res.gamma.mean() << " / " << res.gamma.maxCoeff();
    notes[i] = os.str();
  });

  json tensors = json::array();
  for (const auto& list : entries) {
    for (const auto& e : list) tensors.push_back(e);
  }
  write_json_file(out / "manifest.json", {{"tensors", tensors}});
  for (const auto& n : notes) con.out << n << '\n';
}

int cmd_edit(const Path& qkv_manifest, const Path& subspace_dir, const std::optional<Path>& config,
             const Path& out, Console& con) {
  return guarded(con, [&] { run_edit(qkv_manifest, subspace_dir, load_config(config), out, con); });
}

int cmd_dlpips(const Path& manifest, const Path& out, Console& con) {
  return guarded(con, [&] {
    const auto report = compute_dlpips(load_distance_manifest(manifest));
    const auto table = format_table(report);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_json_file(out, to_json(report));
    auto table_path = out;
    table_path.replace_extension(".txt");
    write_text_atomic(table_path, table);
    con.out << table;
  });
}

int cmd_prompts(const std::string& style, const std::string& content,
                const std::string& alt_content, const std::string& alt_style,
                const std::string& style_full_name, const std::optional<Path>& out, Console& con) {
  return guarded(con, [&] {
    const auto p = build_prompt_set(style, content, alt_content, alt_style, style_full_name);
    for (const auto& w : p.warnings) con.err << "warning: " << w << '\n';
    const auto j = to_json(p);
    if (out) {
      write_json_file(*out, j);
    } else {
      con.out << j.dump(2) << '\n';
    }
  });
}

int cmd_clip_summary(const Path& scores, const std::string& style, const std::string& content,
                     const std::string& style_full_name, const std::optional<Path>& out,
                     Console& con) {
  return guarded(con, [&] {
    const auto doc = read_json_file(scores);
    if (!doc.contains("scores") || !doc.at("scores").is_array()) {
      throw FormatError(scores.string() + ": 'scores' must be a list");
    }
    std::vector<std::pair<std::string, double>> items;
    for (const auto& s : doc.at("scores")) {
      items.emplace_back(field<std::string>(s, "prompt_id", scores.string()),
                         field<double>(s, "score", scores.string()));
    }
    const auto prompts = build_prompt_set(style, content, "", "", style_full_name);
    const auto sum = clip_score_summary(prompts, items);
    const json j = {{"cs_style", sum.cs_style},
                    {"cs_content", sum.cs_content},
                    {"n_style", sum.n_style},
                    {"n_content", sum.n_content}};
    if (out) write_json_file(*out, j);
    con.out << "cs_style = " << sum.cs_style << " (" << sum.n_style << " prompts)\n"
            << "cs_content = " << sum.cs_content << " (" << sum.n_content << " prompts)\n";
  });
}

// ---------------------------------------------------------------------------

void run_demo_synthetic(const PipelineConfig& cfg_in, std::uint64_t seed, const Path& workdir,
                        Console& con) {
  PipelineConfig cfg = cfg_in;
  const auto& sc = cfg.synthetic;
  PlantedSpec spec;
  spec.n_tokens = sc.n_tokens;
  spec.dim = sc.dim;
  spec.r_style = sc.r_style;
  spec.r_content = sc.r_content;
  spec.layout_rank = sc.layout_rank;
  spec.layout_scale = sc.layout_scale;
  spec.noise_sigma = sc.noise_sigma;
  spec.seed = seed;
  const auto planted = generate_triplet(spec);
  // The pipeline fits exactly the planted ranks.
  cfg.erase.r_style = static_cast<int>(sc.r_style);
  cfg.erase.r_content = static_cast<int>(sc.r_content);
  cfg.validate();

  con.out << "demo-synthetic: seed=" << seed << " N=" << spec.n_tokens << " D=" << spec.dim
          << " r_style=" << spec.r_style << " r_content=" << spec.r_content
          << " layout_rank=" << spec.layout_rank << " noise_sigma=" << spec.noise_sigma << '\n';

  // Shuffle positive/negative so alignment has something to undo.
  const auto perm_p = random_permutation(spec.n_tokens, seed * 2 + 1);
  const auto perm_n = random_permutation(spec.n_tokens, seed * 2 + 2);
  const Path triplet_dir = workdir / "triplet";
  std::filesystem::create_directories(triplet_dir);
  write_tensor(to_tensor(planted.triplet.anchor.data), triplet_dir / "anchor.dtf");
  write_tensor(to_tensor(permute_rows(planted.triplet.positive, perm_p).data),
               triplet_dir / "positive.dtf");
  write_tensor(to_tensor(permute_rows(planted.triplet.negative, perm_n).data),
               triplet_dir / "negative.dtf");

  std::ostringstream quiet;
  Console sub{quiet, con.err, false};
  const Path aligned_dir = workdir / "aligned";
  run_align(triplet_dir / "anchor.dtf", triplet_dir / "positive.dtf", triplet_dir / "negative.dtf",
            aligned_dir, sub);

  const auto alignment = read_json_file(aligned_dir / "alignment.json").at("units").at(0);
  auto recovered = [&](const char* key, const std::vector<Index>& perm) {
    const auto idx = alignment.at(key).get<std::vector<long>>();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      hits += perm[static_cast<std::size_t>(idx[i])] == static_cast<Index>(i);
    }
    return double(hits) / double(idx.size());
  };
  const double rec_p = recovered("positive_indices", perm_p);
  const double rec_n = recovered("negative_indices", perm_n);
  std::ostringstream detail;
  detail << std::fixed << std::setprecision(4) << "positive " << rec_p << ", negative " << rec_n
         << ", need >= " << sc.min_alignment_recovery;
  check(rec_p >= sc.min_alignment_recovery && rec_n >= sc.min_alignment_recovery,
        "alignment_recovery", detail.str(), con);

  const Path subspace_dir = workdir / "subspaces";
  run_fit(aligned_dir, cfg, subspace_dir, con.verbose ? con : sub);
  const auto style = load_subspace(subspace_dir, "style");
  const auto content = load_subspace(subspace_dir, "content");

  const auto style_angles = principal_angles(style.basis, planted.spec.ground_truth_style);
  const auto content_angles = principal_angles(content.basis, planted.spec.ground_truth_content);
  auto angle_list = [](const Vector<double>& a) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(9);
    for (Index i = 0; i < a.size(); ++i) os << (i ? " " : "") << a(i);
    return os.str();
  };
  con.out << "style principal angles (rad): " << angle_list(style_angles) << '\n';
  con.out << "content principal angles (rad): " << angle_list(content_angles) << '\n';
  check(style_angles.maxCoeff() < sc.max_angle, "style_recovery",
        "max angle " + sci(style_angles.maxCoeff()) + ", limit " + sci(sc.max_angle), con);
  check(content_angles.maxCoeff() < sc.max_angle, "content_recovery",
        "max angle " + sci(content_angles.maxCoeff()) + ", limit " + sci(sc.max_angle), con);

  // Editing invariants on the anchor/positive/negative features as Q/K/V.
  AttentionTripled t;
  t.q = planted.triplet.anchor;
  t.k = planted.triplet.positive;
  t.v = planted.triplet.negative;
  const auto res = apply_dice_edit(t, style, content, cfg.erase);
  const auto& aec = cfg.erase.aec;
  check(res.gamma.minCoeff() >= aec.alpha_min && res.gamma.maxCoeff() <= aec.alpha_max,
        "gamma_bounds",
        "gamma in [" + sci(res.gamma.minCoeff()) + ", " + sci(res.gamma.maxCoeff()) + "]", con);

  const Matrix<double> ps = style.projector();
  const Matrix<double> pc = content.projector();
  const Index d = style.dim();
  const Matrix<double> eye = Matrix<double>::Identity(d, d);
  double shrink_err = 0, kv_complement = 0, q_complement = 0, ortho = 0;
  const Matrix<double> full = suppress_style(t.k.data, style, 1.0);
  for (const auto* pair : {&t.k, &t.v}) {
    const auto& before = pair->data;
    const auto& after = pair == &t.k ? res.edited.k.data : res.edited.v.data;
    for (Index i = 0; i < before.rows(); ++i) {
      const double scale = std::max(before.row(i).norm(), 1e-300);
      const double expect = (1 - res.gamma(i)) * (before.row(i) * style.basis).norm();
      shrink_err = std::max(shrink_err, std::abs((after.row(i) * style.basis).norm() - expect) / scale);
      kv_complement =
          std::max(kv_complement, ((after.row(i) - before.row(i)) * (eye - ps)).norm() / scale);
    }
  }
  for (Index i = 0; i < t.q.data.rows(); ++i) {
    const double scale = std::max(t.q.data.row(i).norm(), 1e-300);
    q_complement = std::max(
        q_complement, ((res.edited.q.data.row(i) - t.q.data.row(i)) * (eye - pc)).norm() / scale);
    ortho = std::max(ortho, (full.row(i) * style.basis).norm() /
                                std::max(t.k.data.row(i).norm(), 1e-300));
  }
  check(shrink_err <= 1e-8, "kv_style_shrink", "max rel err " + sci(shrink_err), con);
  check(kv_complement <= 1e-8, "kv_complement_preserved", "max rel change " + sci(kv_complement), con);
  check(q_complement <= 1e-8, "q_complement_preserved", "max rel change " + sci(q_complement), con);
  check(ortho <= 1e-6, "full_suppression_orthogonal", "max rel residual " + sci(ortho), con);

  // Same edit through the file interface.
  const Path qkv_dir = workdir / "qkv";
  std::filesystem::create_directories(qkv_dir);
  json tensors = json::array();
  for (const auto& [role, m] : {std::pair<const char*, const FeatureMatrixd*>{"q", &t.q},
                                {"k", &t.k}, {"v", &t.v}}) {
    const std::string name = std::string(role) + ".dtf";
    write_tensor(to_tensor(m->data), qkv_dir / name);
    tensors.push_back({{"layer", "synthetic"}, {"timestep", nullptr}, {"head", 0},
                       {"role", role}, {"path", name}});
  }
  write_json_file(qkv_dir / "manifest.json", {{"tensors", tensors}});
  const Path edited_dir = workdir / "edited";
  run_edit(qkv_dir / "manifest.json", subspace_dir, cfg, edited_dir, sub);
  const auto k_file = read_feature_matrix<double>(edited_dir / "synthetic_h0_k.dtf");
  const double scale = std::max(1.0, res.edited.k.data.cwiseAbs().maxCoeff());
  const double gap = (k_file.data - res.edited.k.data).cwiseAbs().maxCoeff() / scale;
  check(gap <= 1e-5, "file_path_agreement", "max rel diff " + sci(gap), con);
  con.out << "demo-synthetic: all checks passed\n";
}

int cmd_demo_synthetic(const std::optional<Path>& config, std::uint64_t seed,
                       const std::optional<Path>& out, Console& con) {
  return guarded(con, [&] {
    const auto cfg = load_config(config);
    if (out) {
      run_demo_synthetic(cfg, seed, *out, con);
      return;
    }
    std::random_device rd;
    const Path tmp = std::filesystem::temp_directory_path() /
                     ("dice-demo-" + std::to_string(seed) + "-" + std::to_string(rd()));
    struct Cleanup {
      Path p;
      ~Cleanup() {
        std::error_code ec;
        std::filesystem::remove_all(p, ec);
      }
    } cleanup{tmp};
    run_demo_synthetic(cfg, seed, tmp, con);
  });
}

}  // namespace dice::cli

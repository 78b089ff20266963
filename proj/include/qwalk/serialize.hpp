// Copyright 2026 The qwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Structured-text (JSON) documents and flat CSV tables.
//
// Floating-point values are written in shortest round-trip form, so reading
// a document back reproduces every double bit for bit.

#include <qwalk/ensemble.hpp>
#include <qwalk/errors.hpp>
#include <qwalk/mesh.hpp>
#include <qwalk/walk_programs.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

using Json = nlohmann::json;

inline constexpr const char* kResultFormat = "qwalk.ensemble/1";
inline constexpr const char* kFlatTableHeader = "c_tid,c_td,layer,mode,mean,std_error";

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, end);
}

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- mesh ----

inline Json to_json(const MeshSpec& spec) {
  return Json{{"num_modes", spec.num_modes()},
              {"depth", spec.depth()},
              {"injection_mode", spec.injection_mode()},
              {"shape", spec.shape() == MeshShape::LightCone ? "light_cone" : "rectangular"}};
}

inline MeshSpec mesh_spec_from_json(const Json& j) {
  const std::string shape = j.value("shape", std::string("light_cone"));
  const int modes = j.at("num_modes").get<int>();
  const int depth = j.at("depth").get<int>();
  const int inject = j.at("injection_mode").get<int>();
  if (shape == "light_cone") return MeshSpec::light_cone(modes, depth, inject);
  if (shape == "rectangular") return MeshSpec::rectangular(modes, depth, inject);
  throw std::invalid_argument("unknown mesh shape '" + shape + "'");
}

inline Json screens_to_json(const PhaseScreens& s) {
  Json layers = Json::array();
  for (int t = 1; t <= s.depth(); ++t) {
    auto row = s.layer(t);
    layers.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return layers;
}

inline PhaseScreens screens_from_json(const Json& j, int num_modes, int depth) {
  if (!j.is_array() || static_cast<int>(j.size()) != depth)
    throw std::invalid_argument("phase screen table must have one row per layer");
  PhaseScreens s(num_modes, depth);
  for (int t = 1; t <= depth; ++t) {
    const auto& row = j[static_cast<std::size_t>(t - 1)];
    if (static_cast<int>(row.size()) != num_modes)
      throw std::invalid_argument("phase screen row " + std::to_string(t) + " has wrong length");
    for (int x = 1; x <= num_modes; ++x) s(x, t) = row[static_cast<std::size_t>(x - 1)].get<double>();
  }
  return s;
}

inline Json to_json(const MeshSpec& spec, const MeshProgram& program) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < spec.cells().size(); ++i) {
    const auto& setting = program.cell_settings.at(i);
    if (!setting) continue;
    const CellCoord& c = spec.cells()[i];
    cells.push_back(Json{{"layer", c.layer},
                         {"top_mode", c.top_mode},
                         {"theta", setting->theta()},
                         {"phi", setting->phi()}});
  }
  return Json{{"mesh", to_json(spec)},
              {"cells", std::move(cells)},
              {"phase_screens", screens_to_json(program.phase_screens)}};
}

inline MeshProgram program_from_json(const Json& j, const MeshSpec& spec) {
  MeshProgram program = MeshProgram::blank(spec);
  for (const auto& c : j.at("cells")) {
    const int layer = c.at("layer").get<int>();
    const int top = c.at("top_mode").get<int>();
    auto index = spec.cell_index(layer, top);
    if (!index)
      throw std::invalid_argument("program names cell (layer " + std::to_string(layer) +
                                  ", top mode " + std::to_string(top) + ") not in the mesh");
    program.cell_settings[*index] = RbsSetting(c.at("theta").get<double>(), c.at("phi").get<double>());
  }
  program.phase_screens = screens_from_json(j.at("phase_screens"), spec.num_modes(), spec.depth());
  return program;
}

// ---- disorder ----

inline Json to_json(const SeedProvenance& p) {
  return Json{{"master_seed", p.master_seed},
              {"level_index", p.level_index},
              {"realization_index", p.realization_index}};
}

inline SeedProvenance provenance_from_json(const Json& j) {
  return SeedProvenance{j.at("master_seed").get<std::uint64_t>(),
                        j.at("level_index").get<std::uint64_t>(),
                        j.at("realization_index").get<std::uint64_t>()};
}

inline Json to_json(const DisorderRealization& r) {
  return Json{{"seed", to_json(r.seed_provenance)},
              {"static_phases", r.static_phases},
              {"dynamic_phases", screens_to_json(r.dynamic_phases)}};
}

inline DisorderRealization realization_from_json(const Json& j) {
  DisorderRealization r;
  r.seed_provenance = provenance_from_json(j.at("seed"));
  r.static_phases = j.at("static_phases").get<std::vector<double>>();
  const Json& dyn = j.at("dynamic_phases");
  r.dynamic_phases = screens_from_json(dyn, static_cast<int>(r.static_phases.size()),
                                       static_cast<int>(dyn.size()));
  return r;
}

inline const char* to_string(SymmetryPolicy p) {
  return p == SymmetryPolicy::MirroredSign ? "mirrored_sign" : "same_sign";
}

inline SymmetryPolicy policy_from_string(const std::string& s) {
  if (s == "mirrored_sign") return SymmetryPolicy::MirroredSign;
  if (s == "same_sign") return SymmetryPolicy::SameSign;
  throw std::invalid_argument("unknown symmetry policy '" + s + "'");
}

// ---- sweeps ----

inline Json to_json(const SweepPlan& plan) {
  Json grid = Json::array();
  for (const auto& level : plan.grid) grid.push_back(Json::array({level.c_tid(), level.c_td()}));
  return Json{{"mesh", to_json(plan.spec)},
              {"grid", std::move(grid)},
              {"realizations_per_level", plan.realizations_per_level},
              {"master_seed", plan.master_seed},
              {"read_layers", plan.effective_read_layers()},
              {"policy", to_string(plan.policy)}};
}

inline SweepPlan plan_from_json(const Json& j) {
  SweepPlan plan;
  plan.spec = mesh_spec_from_json(j.at("mesh"));
  for (const auto& g : j.at("grid")) plan.grid.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
  plan.realizations_per_level = j.at("realizations_per_level").get<std::size_t>();
  plan.master_seed = j.at("master_seed").get<std::uint64_t>();
  plan.read_layers = j.at("read_layers").get<std::vector<int>>();
  plan.policy = policy_from_string(j.value("policy", std::string("same_sign")));
  plan.validate();
  return plan;
}

inline std::string plan_hash(const SweepPlan& plan) {
  return fnv1a_hex(to_json(plan).dump());
}

inline Json to_json(const LevelRecord& r) {
  return Json{{"level_index", r.level_index}, {"c_tid", r.c_tid}, {"c_td", r.c_td},
              {"read_layer", r.read_layer},   {"n", r.n},         {"mean", r.mean},
              {"std_error", r.std_error},     {"covariance", r.covariance}};
}

inline LevelRecord record_from_json(const Json& j) {
  LevelRecord r;
  r.level_index = j.at("level_index").get<std::uint64_t>();
  r.c_tid = j.at("c_tid").get<double>();
  r.c_td = j.at("c_td").get<double>();
  r.read_layer = j.at("read_layer").get<int>();
  r.n = j.at("n").get<std::size_t>();
  r.mean = j.at("mean").get<std::vector<double>>();
  r.std_error = j.at("std_error").get<std::vector<double>>();
  r.covariance = j.value("covariance", std::vector<double>{});
  return r;
}

inline Json to_json(const EnsembleResult& result) {
  Json meta{{"plan_hash", result.metadata.plan_hash},
            {"generator", result.metadata.generator},
            {"n", result.metadata.n}};
  if (result.metadata.timestamp) meta["timestamp"] = *result.metadata.timestamp;
  Json records = Json::array();
  for (const auto& r : result.records) records.push_back(to_json(r));
  return Json{{"format", kResultFormat},
              {"plan", to_json(result.plan)},
              {"metadata", std::move(meta)},
              {"records", std::move(records)},
              {"errors", result.errors}};
}

inline EnsembleResult result_from_json(const Json& j) {
  if (j.value("format", std::string()) != kResultFormat)
    throw std::invalid_argument("not a qwalk ensemble result document");
  EnsembleResult result;
  result.plan = plan_from_json(j.at("plan"));
  const Json& meta = j.at("metadata");
  result.metadata.plan_hash = meta.at("plan_hash").get<std::string>();
  result.metadata.generator = meta.at("generator").get<std::string>();
  result.metadata.n = meta.at("n").get<std::size_t>();
  if (meta.contains("timestamp")) result.metadata.timestamp = meta["timestamp"].get<std::string>();
  for (const auto& r : j.at("records")) result.records.push_back(record_from_json(r));
  result.errors = j.value("errors", std::vector<std::string>{});
  return result;
}

// ---- files ----

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw PersistenceError("write to '" + path + "' failed");
}

inline std::string result_document(const EnsembleResult& result) {
  return to_json(result).dump(1) + "\n";
}

inline EnsembleResult load_result(const std::string& path) {
  try {
    return result_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw PersistenceError("malformed result document '" + path + "': " + e.what());
  }
}

/// One row per (level, layer, mode); LF line endings.
inline void write_flat_table(std::ostream& out, const EnsembleResult& result) {
  out << kFlatTableHeader << '\n';
  for (const auto& r : result.records)
    for (std::size_t x = 0; x < r.mean.size(); ++x)
      out << format_double(r.c_tid) << ',' << format_double(r.c_td) << ',' << r.read_layer << ','
          << (x + 1) << ',' << format_double(r.mean[x]) << ',' << format_double(r.std_error[x])
          << '\n';
}

inline std::string flat_table(const EnsembleResult& result) {
  std::ostringstream ss;
  write_flat_table(ss, result);
  return ss.str();
}

}  // namespace qwalk

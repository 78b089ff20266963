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

// qwalk: command-line front end for disorder ensembles on the photonic mesh.
//
// Exit codes: 0 success, 1 usage, 2 runtime or I/O failure, 3 degenerate
// input to an analysis.

#include <qwalk/qwalk.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace qwalk;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relative output prefixes land in $QWALK_OUT_DIR when it is set.
std::string output_prefix(const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("QWALK_OUT_DIR"); dir && *dir) p = fs::path(dir) / p;
  }
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p.string();
}

void write_outputs(const std::string& prefix, const EnsembleResult& result) {
  write_file(prefix + ".json", result_document(result));
  write_file(prefix + ".csv", flat_table(result));
  std::cout << "wrote " << prefix << ".json and " << prefix << ".csv\n";
  for (const auto& e : result.errors) std::cerr << "warning: " << e << '\n';
}

std::vector<int> parse_modes(const std::string& text, int num_modes) {
  std::vector<int> modes;
  if (text == "all") {
    for (int x = 1; x <= num_modes; ++x) modes.push_back(x);
    return modes;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int m = 0;
    try {
      m = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("bad mode list '" + text + "'");
    modes.push_back(m);
  }
  if (modes.empty()) throw UsageError("empty mode list");
  try {
    check_mode_set(modes, num_modes);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return modes;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

MeshSpec make_mesh(int modes, int depth, int inject) {
  try {
    return MeshSpec::light_cone(modes, depth, inject > 0 ? std::optional<int>(inject) : std::nullopt);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::vector<DisorderSpec> single_level(double ctid, double ctd) {
  try {
    return {DisorderSpec(ctid, ctd)};
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

// One character per cell, scaled to the largest entry of the grid.
void print_heatmap(std::ostream& out, const std::vector<std::vector<double>>& rows,
                   const std::vector<std::string>& labels, const std::string& caption) {
  static const std::string ramp = " .:-=+*#%@";
  double top = 0.0;
  for (const auto& r : rows)
    for (double v : r) top = std::max(top, v);
  out << caption << " (max " << std::setprecision(4) << top << ")\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << std::setw(8) << labels[i] << " |";
    for (double v : rows[i]) {
      const auto k = top > 0 ? static_cast<std::size_t>(std::min(9.0, std::floor(10.0 * v / top))) : 0;
      out << ramp[k];
    }
    out << "|\n";
  }
}

struct RunFlags {
  int modes = 14;
  int depth = 7;
  int inject = 0;
  std::size_t n = 200;
  std::uint64_t seed = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string policy = "same_sign";
  std::string out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool mesh_size, const std::string& out_default) {
  f.out = out_default;
  if (mesh_size) {
    cmd->add_option("--modes", f.modes, "Number of waveguides")->check(CLI::PositiveNumber);
    cmd->add_option("--inject", f.inject, "Injection mode (default modes/2 + 1)")->check(CLI::NonNegativeNumber);
  }
  cmd->add_option("--depth", f.depth, "Number of layers (time steps)")->check(CLI::PositiveNumber);
  cmd->add_option("--n", f.n, "Realizations per disorder level")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--policy", f.policy, "Disorder sign policy")
      ->check(CLI::IsMember({"same_sign", "mirrored_sign"}));
  cmd->add_option("--out", f.out, "Output path prefix");
}

SweepPlan base_plan(const RunFlags& f, const MeshSpec& spec) {
  SweepPlan plan;
  plan.spec = spec;
  plan.realizations_per_level = f.n;
  plan.master_seed = f.seed;
  plan.policy = policy_from_string(f.policy);
  return plan;
}

SweepOptions options_for(const RunFlags& f) {
  SweepOptions o;
  o.workers = f.threads;
  return o;
}

void print_distribution(const LevelRecord& r) {
  std::cout << "mode  mean          std_error\n";
  for (std::size_t x = 0; x < r.mean.size(); ++x)
    std::cout << std::setw(4) << x + 1 << "  " << std::setw(12) << std::fixed << std::setprecision(8)
              << r.mean[x] << "  " << r.std_error[x] << '\n';
  std::cout.unsetf(std::ios::floatfield);
}

// ---- commands ----

int cmd_walk(const RunFlags& f, double ctid, double ctd) {
  const MeshSpec spec = make_mesh(f.modes, f.depth, f.inject);
  SweepPlan plan = base_plan(f, spec);
  plan.grid = single_level(ctid, ctd);
  const EnsembleResult result = run_sweep(plan, options_for(f));
  const LevelRecord& r = result.records.front();
  print_distribution(r);
  std::cout << "sigma(t_f) = " << std::setprecision(10) << spatial_sigma(r.mean) << '\n';
  write_outputs(output_prefix(f.out), result);
  return 0;
}

int cmd_tomography(const RunFlags& f, double ctid, double ctd) {
  const MeshSpec spec = make_mesh(f.modes, f.depth, f.inject);
  SweepPlan plan = base_plan(f, spec);
  plan.grid = single_level(ctid, ctd);
  for (int t = 1; t <= spec.depth(); ++t) plan.read_layers.push_back(t);
  const EnsembleResult result = run_sweep(plan, options_for(f));

  std::ostringstream matrix;
  matrix << "layer";
  for (int x = 1; x <= spec.num_modes(); ++x) matrix << ",mode_" << x;
  matrix << '\n';
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (const auto& r : result.records) {
    matrix << r.read_layer;
    for (double v : r.mean) matrix << ',' << format_double(v);
    matrix << '\n';
    rows.push_back(r.mean);
    labels.push_back("t=" + std::to_string(r.read_layer));
  }
  print_heatmap(std::cout, rows, labels, "mean intensity, layer x mode");
  std::vector<IntensityDistribution> layers(rows.begin(), rows.end());
  if (layers.size() >= 3) {
    try {
      std::cout << "spread exponent = " << std::setprecision(10) << spread_exponent(layers) << '\n';
    } catch (const DegenerateInput&) {
      std::cout << "spread exponent undefined (no spreading)\n";
    }
  }
  const std::string prefix = output_prefix(f.out);
  write_file(prefix + "_matrix.csv", matrix.str());
  std::cout << "wrote " << prefix << "_matrix.csv\n";
  write_outputs(prefix, result);
  return 0;
}

int cmd_sweep(const RunFlags& f, const std::string& grid_text, bool resume) {
  int rows = 0, cols = 0;
  char x = 0;
  std::istringstream gs(grid_text);
  if (!(gs >> rows >> x >> cols) || x != 'x' || rows < 1 || cols < 1 || gs.peek() != EOF)
    throw UsageError("--grid must look like 20x20");
  const MeshSpec spec = make_mesh(f.modes, f.depth, f.inject);
  SweepPlan plan = base_plan(f, spec);
  const auto static_axis = unit_axis(rows);
  const auto dynamic_axis = unit_axis(cols);
  plan.grid = make_grid(static_axis, dynamic_axis);

  const std::string prefix = output_prefix(f.out);
  SweepOptions options = options_for(f);
  options.checkpoint_path = prefix + ".ckpt.jsonl";
  options.resume = resume;
  std::size_t done = 0;
  options.on_record = [&](const LevelRecord&) {
    if (++done % 50 == 0) std::cerr << done << " levels done\n";
  };
  const EnsembleResult result = run_sweep(plan, options);
  write_outputs(prefix, result);

  for (int mode = 3; mode <= std::min(7, spec.num_modes()); ++mode) {
    std::ostringstream table;
    table << "c_tid";
    for (double d : dynamic_axis) table << ",c_td=" << format_double(d);
    table << '\n';
    std::vector<std::vector<double>> grid_rows;
    std::vector<std::string> labels;
    for (int i = 0; i < rows; ++i) {
      table << format_double(static_axis[static_cast<std::size_t>(i)]);
      std::vector<double> row;
      for (int j = 0; j < cols; ++j) {
        const auto* r = result.find(static_cast<std::uint64_t>(i * cols + j), spec.depth());
        const double v = r->mean[static_cast<std::size_t>(mode - 1)];
        table << ',' << format_double(v);
        row.push_back(v);
      }
      table << '\n';
      grid_rows.push_back(std::move(row));
      std::ostringstream label;
      label << std::fixed << std::setprecision(3) << static_axis[static_cast<std::size_t>(i)];
      labels.push_back(label.str());
    }
    const std::string path = prefix + "_mode" + std::to_string(mode) + ".csv";
    write_file(path, table.str());
    print_heatmap(std::cout, grid_rows, labels,
                  "mode " + std::to_string(mode) + ": rows c_tid 0..1, columns c_td 0..1");
  }
  std::cout << "heatmap tables: " << prefix << "_mode3.csv .. _mode7.csv\n";
  return 0;
}

void print_report(const EnaqtReport& rep) {
  std::cout << "slice c_tid = " << rep.static_level;
  if (rep.static_level != rep.requested_static) std::cout << " (nearest to requested " << rep.requested_static << ")";
  std::cout << "\nenhance modes {" << join(rep.enhance_modes) << "}, deplete modes {" << join(rep.deplete_modes)
            << "}\n";
  std::cout << "c_td        eta_enhance  se          eta_deplete  se\n";
  for (std::size_t k = 0; k < rep.enhance_curve.size(); ++k) {
    const auto& e = rep.enhance_curve[k];
    const auto& d = rep.deplete_curve[k];
    std::cout << std::fixed << std::setprecision(6) << std::setw(10) << e.c_td << "  " << std::setw(11) << e.eta
              << "  " << std::setw(10) << e.std_error << "  " << std::setw(11) << d.eta << "  " << std::setw(10)
              << d.std_error << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
  std::cout << std::setprecision(6) << "optimum c_td = " << rep.optimum_c_td << "\nenhancement significance = "
            << rep.enhance_significance << " SE\ndepletion significance = " << rep.deplete_significance << " SE\n";
  if (rep.interior_optimum_c_td)
    std::cout << "interior optimum c_td = " << *rep.interior_optimum_c_td
              << ", prominence = " << rep.interior_prominence << " SE"
              << (rep.interior_maximum ? " (interior maximum)" : " (no interior maximum)") << '\n';
  std::cout << "verdict: " << (rep.declared ? "ENAQT declared" : "ENAQT not declared") << '\n';
}

void write_eta_table(const std::string& path, const EnaqtReport& rep) {
  std::ostringstream t;
  t << "c_tid,c_td,eta_enhance,se_enhance,eta_deplete,se_deplete\n";
  for (std::size_t k = 0; k < rep.enhance_curve.size(); ++k) {
    const auto& e = rep.enhance_curve[k];
    const auto& d = rep.deplete_curve[k];
    t << format_double(e.c_tid) << ',' << format_double(e.c_td) << ',' << format_double(e.eta) << ','
      << format_double(e.std_error) << ',' << format_double(d.eta) << ',' << format_double(d.std_error) << '\n';
  }
  write_file(path, t.str());
}

int run_slice(const RunFlags& f, const MeshSpec& spec, double ctid, int points, const std::vector<int>& enhance,
              const std::vector<int>& deplete) {
  if (points < 2) throw UsageError("--points must be at least 2");
  SweepPlan plan = base_plan(f, spec);
  try {
    plan.grid = make_grid({ctid}, unit_axis(points));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const EnsembleResult result = run_sweep(plan, options_for(f));
  const EnaqtReport rep = detect_enaqt(result, ctid, enhance, deplete);
  print_report(rep);
  const std::string prefix = output_prefix(f.out);
  write_eta_table(prefix + "_eta.csv", rep);
  std::cout << "wrote " << prefix << "_eta.csv\n";
  write_outputs(prefix, result);
  return 0;
}

int cmd_fit(const std::string& in, const std::string& family, int layer_flag) {
  const EnsembleResult result = load_result(in);
  const int layer = layer_flag > 0 ? layer_flag : result.plan.spec.depth();
  std::vector<FitFamily> families;
  if (family != "gaussian") families.push_back(FitFamily::Laplace);
  if (family != "laplace") families.push_back(FitFamily::Gaussian);
  bool any = false;
  for (const auto& r : result.records) {
    if (r.read_layer != layer) continue;
    any = true;
    std::cout << "level " << r.level_index << " (c_tid " << r.c_tid << ", c_td " << r.c_td << "), layer " << layer
              << '\n';
    std::vector<FitResult> fits;
    for (auto fam : families) {
      fits.push_back(fit_distribution(r.mean, fam));
      const auto& fr = fits.back();
      std::cout << "  " << std::left << std::setw(9) << to_string(fam) << std::right << std::setprecision(8)
                << " location " << fr.location << "  scale " << fr.scale << "  amplitude " << fr.amplitude
                << "  E " << fr.residual << '\n';
    }
    if (fits.size() == 2)
      std::cout << "  better fit: " << (fits[0].residual < fits[1].residual ? "laplace" : "gaussian")
                << " (E_laplace / E_gaussian = " << fits[0].residual / fits[1].residual << ")\n";
  }
  if (!any) throw UsageError("no records at layer " + std::to_string(layer) + " in " + in);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disorder ensembles of discrete-time quantum walks on a programmable photonic mesh"};
  app.require_subcommand(1);

  RunFlags walk_f, tomo_f, sweep_f, slice_f, deep_f;
  double walk_ctid = 0, walk_ctd = 0, tomo_ctid = 0, tomo_ctd = 0;

  auto* walk = app.add_subcommand("walk", "Ensemble at one disorder level");
  add_run_flags(walk, walk_f, true, "walk");
  walk->add_option("--ctid", walk_ctid, "Static disorder coefficient")->check(CLI::Range(0.0, 1.0));
  walk->add_option("--ctd", walk_ctd, "Dynamic disorder coefficient")->check(CLI::Range(0.0, 1.0));

  auto* tomo = app.add_subcommand("tomography", "Every intermediate layer, read out through wires");
  add_run_flags(tomo, tomo_f, true, "tomography");
  tomo->add_option("--ctid", tomo_ctid, "Static disorder coefficient")->check(CLI::Range(0.0, 1.0));
  tomo->add_option("--ctd", tomo_ctd, "Dynamic disorder coefficient")->check(CLI::Range(0.0, 1.0));

  std::string grid = "20x20";
  bool resume = false;
  auto* sweep = app.add_subcommand("sweep", "Grid over static x dynamic disorder, resumable");
  add_run_flags(sweep, sweep_f, true, "sweep");
  sweep->add_option("--grid", grid, "Static levels x dynamic levels, e.g. 20x20");
  sweep->add_flag("--resume", resume, "Continue from the checkpoint next to --out");

  double slice_ctid = 0.842;
  int slice_points = 20;
  std::string slice_modes = "5,10", slice_deplete = "7,8";
  auto* slice = app.add_subcommand("slice", "Transport efficiency along one static-disorder row");
  slice_f.n = 20000;
  add_run_flags(slice, slice_f, false, "slice");
  slice->add_option("--ctid", slice_ctid, "Static disorder of the row")->check(CLI::Range(0.0, 1.0));
  slice->add_option("--modes", slice_modes, "Modes whose efficiency should rise (list or 'all')");
  slice->add_option("--deplete", slice_deplete, "Modes whose efficiency should fall");
  slice->add_option("--points", slice_points, "Dynamic-disorder points over [0, 1]");

  std::string fit_in, fit_family = "both";
  int fit_layer = 0;
  auto* fit = app.add_subcommand("fit", "Laplace / Gaussian fits of stored means");
  fit->add_option("--in", fit_in, "Result document")->required();
  fit->add_option("--family", fit_family, "laplace, gaussian or both")
      ->check(CLI::IsMember({"laplace", "gaussian", "both"}));
  fit->add_option("--layer", fit_layer, "Read layer (default: last)")->check(CLI::NonNegativeNumber);

  double deep_ctid = 0.842;
  int deep_points = 20;
  std::string deep_modes, deep_deplete;
  auto* deep = app.add_subcommand("deep", "Slice pipeline on a deeper mesh (2 x depth modes)");
  deep_f.depth = 15;
  deep_f.n = 20000;
  add_run_flags(deep, deep_f, false, "deep");
  deep->add_option("--ctid", deep_ctid, "Static disorder of the row")->check(CLI::Range(0.0, 1.0));
  deep->add_option("--modes", deep_modes, "Enhance set (default: modes 1-2 steps off the injection pair)");
  deep->add_option("--deplete", deep_deplete, "Deplete set (default: the injection pair)");
  deep->add_option("--points", deep_points, "Dynamic-disorder points over [0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*walk) return cmd_walk(walk_f, walk_ctid, walk_ctd);
    if (*tomo) return cmd_tomography(tomo_f, tomo_ctid, tomo_ctd);
    if (*sweep) return cmd_sweep(sweep_f, grid, resume);
    if (*slice) {
      const MeshSpec spec = make_mesh(2 * slice_f.depth, slice_f.depth, 0);
      return run_slice(slice_f, spec, slice_ctid, slice_points, parse_modes(slice_modes, spec.num_modes()),
                       parse_modes(slice_deplete, spec.num_modes()));
    }
    if (*fit) return cmd_fit(fit_in, fit_family, fit_layer);
    if (*deep) {
      const MeshSpec spec = make_mesh(2 * deep_f.depth, deep_f.depth, 0);
      std::vector<int> enhance = deep_modes.empty() ? ring_modes(spec, 1, 2) : parse_modes(deep_modes, spec.num_modes());
      if (enhance.empty()) enhance = parse_modes("all", spec.num_modes());
      const std::vector<int> deplete =
          deep_deplete.empty() ? ring_modes(spec, 0, 0) : parse_modes(deep_deplete, spec.num_modes());
      std::cout << "depth " << spec.depth() << ", " << spec.num_modes() << " modes, injection mode "
                << spec.injection_mode() << '\n';
      return run_slice(deep_f, spec, deep_ctid, deep_points, enhance, deplete);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DegenerateInput& e) {
    std::cerr << "degenerate input: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

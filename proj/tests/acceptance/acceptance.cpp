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

// Acceptance checks, one per numbered criterion. Usage: acceptance <1..10|all>.
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <qwalk/qwalk.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"

namespace fs = std::filesystem;
using namespace qwalk;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAILED]");
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

const MeshSpec kSpec = MeshSpec::light_cone();

LevelStats final_level(double ctid, double ctd, std::size_t n, std::uint64_t seed) {
  return run_level(kSpec, build_symmetric_qw(kSpec), DisorderSpec(ctid, ctd), n, seed, 0, kSpec.depth(),
                   SymmetryPolicy::SameSign, workers());
}

// 1. Unitarity and oracle equivalence over 1000 random programs.
void unitarity(Verdict& v) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  double worst_unitarity = 0, worst_column = 0, worst_path = 0;
  for (int k = 0; k < 1000; ++k) {
    const MeshProgram p = testing::random_program(kSpec, rng);
    const Eigen::MatrixXcd u = full_unitary(kSpec, p);
    worst_unitarity = std::max(
        worst_unitarity, (u.adjoint() * u - Eigen::MatrixXcd::Identity(14, 14)).cwiseAbs().maxCoeff());
    for (int x = 1; x <= 14; ++x)
      worst_column = std::max(worst_column, (u.col(x - 1) - propagate(kSpec, p, x)).cwiseAbs().maxCoeff());
    if (k < 100) {
      const auto paths = testing::path_sum_amplitudes(kSpec, p, 8, 7);
      const StateVector s = propagate(kSpec, p, 8);
      for (int x = 0; x < 14; ++x) worst_path = std::max(worst_path, std::abs(paths[static_cast<std::size_t>(x)] - s[x]));
    }
  }
  const double dt = seconds_since(t0);
  v.require(worst_unitarity < 1e-12, "max|U^dag U - I| = " + fmt(worst_unitarity));
  v.require(worst_column < 1e-12, "max|propagate - U column| = " + fmt(worst_column));
  v.require(worst_path < 1e-12, "max|propagate - path sum| = " + fmt(worst_path));
  v.require(dt < 10.0, "runtime " + fmt(dt, 3) + " s < 10 s");
}

// 2. The quoted cell settings.
void quoted_settings(Verdict& v) {
  const double r = 1 / std::sqrt(2.0);
  Eigen::Matrix2cd wire, hadamard;
  wire << 1, 0, 0, -1;
  hadamard << r, r, r, -r;
  const double e_wire = (cell_unitary(kWire) - wire).cwiseAbs().maxCoeff();
  const double e_had = (cell_unitary(kHadamard) - hadamard).cwiseAbs().maxCoeff();
  const Eigen::Vector2cd out = cell_unitary(kInputSplitter) * Eigen::Vector2cd(0, 1);
  const Eigen::Vector2cd target(r, Complex(0, r));
  const double overlap = std::abs(target.dot(out));
  v.require(e_wire < 1e-12, "(pi,0) vs bar state: " + fmt(e_wire));
  v.require(e_had < 1e-12, "(pi/2,0) vs Hadamard: " + fmt(e_had));
  v.require(std::abs(overlap - 1) < 1e-12 && std::abs(out.norm() - 1) < 1e-12,
            "(pi/2,pi/2) bottom input vs (|t>+i|b>)/sqrt2: 1-|overlap| = " + fmt(std::abs(1 - overlap)));
}

// 3. Ballistic regime.
void ballistic(Verdict& v) {
  const auto t0 = Clock::now();
  const MeshProgram p = build_symmetric_qw(kSpec);
  std::vector<IntensityDistribution> layers;
  for (int t = 1; t <= 7; ++t) layers.push_back(intensities(propagate(kSpec, p, 8, t)));
  const auto& d = layers.back();
  const double top = *std::max_element(d.begin(), d.end());
  std::vector<int> peaks;
  for (int x = 1; x <= 14; ++x)
    if (d[static_cast<std::size_t>(x - 1)] > top - 1e-12) peaks.push_back(x);
  v.require(peaks == std::vector<int>{3, 12}, "peak modes " + std::to_string(peaks.front()) + "," +
                                                  std::to_string(peaks.back()) + " (I = " + fmt(top) + ")");
  const double e = spread_exponent(layers);
  v.require(e >= 0.85 && e <= 1.05, "spread exponent " + fmt(e, 10) + " in [0.85, 1.05]");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  double worst = 0;
  for (int k = 0; k < 500; ++k) {
    MeshProgram q = p;
    for (int t = 1; t <= 7; ++t)
      for (int x = 1; x <= 14; ++x) q.phase_screens(x, t) = a(rng);
    const auto i = intensities(propagate(kSpec, q, 8));
    worst = std::max({worst, std::abs(i[0] - 0.0078125), std::abs(i[13] - 0.0078125)});
  }
  v.require(worst < 1e-12, "edge modes 2^-7 over 500 random screens, max dev " + fmt(worst));
  const double dt = seconds_since(t0);
  v.require(dt < 1.0, "runtime " + fmt(dt, 3) + " s < 1 s");
}

// 4. Diffusive regime.
void diffusive(Verdict& v) {
  const auto t0 = Clock::now();
  const MeshProgram p = build_symmetric_qw(kSpec);
  const auto markov = testing::markov_distribution(kSpec, p, 8, 7);
  std::vector<LevelTask> tasks;
  for (int t = 1; t <= 7; ++t) tasks.push_back(LevelTask{DisorderSpec(1, 1), 0, t});
  const auto stats = run_levels(kSpec, p, tasks, 20000, 404, SymmetryPolicy::SameSign, workers());
  const LevelStats& fin = stats.back();
  double worst_z = 0;
  for (std::size_t x = 0; x < 14; ++x) {
    const double diff = std::abs(fin.mean[x] - markov[x]);
    // Modes 1 and 14 are exact (2^-7); their spread is rounding noise.
    if (diff < 1e-12) continue;
    worst_z = std::max(worst_z, fin.std_error[x] > 0 ? diff / fin.std_error[x] : 1e9);
  }
  v.require(worst_z <= 5, "max |mean - Markov| = " + fmt(worst_z, 3) + " SE (<= 5)");
  std::vector<IntensityDistribution> layers, oracle_layers;
  for (const auto& s : stats) layers.push_back(s.mean);
  for (int t = 1; t <= 7; ++t) oracle_layers.push_back(testing::markov_distribution(kSpec, p, 8, t));
  const double e = spread_exponent(layers);
  v.require(e >= 0.4 && e <= 0.6, "spread exponent " + fmt(e) + " in [0.4, 0.6] (Markov oracle over layers 1-7: " +
                                      fmt(spread_exponent(oracle_layers)) + ")");
  const double el = fit_distribution(fin.mean, FitFamily::Laplace).residual;
  const double eg = fit_distribution(fin.mean, FitFamily::Gaussian).residual;
  v.require(eg < el, "E_gauss " + fmt(eg) + " < E_laplace " + fmt(el));
  const double dt = seconds_since(t0);
  v.require(dt < 30.0, "runtime " + fmt(dt, 3) + " s < 30 s");
}

// 5. Localized regime.
void localized(Verdict& v) {
  const auto t0 = Clock::now();
  const LevelStats s = final_level(1, 0, 20000, 505);
  const auto top = std::max_element(s.mean.begin(), s.mean.end()) - s.mean.begin() + 1;
  v.require(top == 7 || top == 8, "maximum at mode " + std::to_string(top));
  double worst = -1e9;
  for (std::size_t x = 7; x + 1 < 12; ++x) {
    const std::size_t y = x + 1;
    const double var = s.covariance[x * 14 + x] + s.covariance[y * 14 + y] - 2 * s.covariance[x * 14 + y];
    const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(s.n));
    worst = std::max(worst, (s.mean[y] - s.mean[x]) / se);
  }
  v.require(worst <= 3, "modes 8..12 nonincreasing, largest rise " + fmt(worst, 3) + " SE (<= 3)");
  const double el = fit_distribution(s.mean, FitFamily::Laplace).residual;
  const double eg = fit_distribution(s.mean, FitFamily::Gaussian).residual;
  v.require(el < eg, "E_laplace " + fmt(el) + " < E_gauss " + fmt(eg));
  const double dt = seconds_since(t0);
  v.require(dt < 30.0, "runtime " + fmt(dt, 3) + " s < 30 s");
}

// 6. Tomography through wires equals direct intermediate readout.
void tomography(Verdict& v) {
  const MeshProgram base = build_symmetric_qw(kSpec);
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  double worst = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto z = sample_realization(kSpec, DisorderSpec(c(rng), c(rng)), SeedProvenance{606, 0, r});
    const MeshProgram p = apply_disorder(base, z);
    for (int t = 1; t <= 7; ++t) {
      const auto direct = intensities(propagate(kSpec, p, 8, t));
      const auto routed = intensities(propagate(kSpec, build_tomography_program(kSpec, p, t), 8));
      for (std::size_t x = 0; x < 14; ++x) worst = std::max(worst, std::abs(direct[x] - routed[x]));
    }
  }
  v.require(worst < 1e-12, "700 comparisons, max deviation " + fmt(worst));
}

// 7. Environment-assisted transport along the strong-static row.
void enaqt(Verdict& v) {
  const auto t0 = Clock::now();
  const auto axis = unit_axis(20);
  const double row = *std::min_element(axis.begin(), axis.end(), [](double a, double b) {
    return std::abs(a - 0.842) < std::abs(b - 0.842);
  });
  SweepPlan plan;
  plan.grid = make_grid({row}, axis);
  plan.realizations_per_level = 20000;
  plan.master_seed = 707;
  SweepOptions options;
  options.workers = workers();
  const EnaqtReport rep = detect_enaqt(run_sweep(plan, options), 0.842, {5, 10}, {7, 8});
  v.detail << "row c_tid = " << fmt(rep.static_level);
  v.require(rep.interior_optimum_c_td.has_value() && rep.interior_enhance_significance > 3,
            "eta{5,10} rises by " + fmt(rep.interior_enhance_significance, 4) + " SE at interior c_td = " +
                fmt(rep.interior_optimum_c_td.value_or(-1), 4));
  v.require(rep.interior_deplete_significance > 3,
            "eta{7,8} falls by " + fmt(rep.interior_deplete_significance, 4) + " SE");
  const double dt = seconds_since(t0);
  v.require(dt < 180.0, "runtime " + fmt(dt, 3) + " s < 180 s");
}

// 8. The 20 x 20 x 200 sweep.
void paper_scale(Verdict& v) {
  const auto t0 = Clock::now();
  SweepPlan plan;
  plan.grid = make_grid(unit_axis(20), unit_axis(20));
  plan.realizations_per_level = 200;
  plan.master_seed = 808;
  SweepOptions parallel;
  parallel.workers = std::max(4u, workers());
  const EnsembleResult a = run_sweep(plan, parallel);
  const double dt = seconds_since(t0);
  const EnsembleResult b = run_sweep(plan, SweepOptions{});
  v.require(a.records.size() == 400, std::to_string(a.records.size()) + " levels x 200 = " +
                                         std::to_string(a.records.size() * 200) + " propagations");
  v.require(result_document(a) == result_document(b), "rerun (1 worker vs " + std::to_string(parallel.workers) +
                                                          ") byte-identical");
  auto at = [&](int i, int j, int mode) { return a.find(static_cast<std::uint64_t>(i * 20 + j), 7)->mean[static_cast<std::size_t>(mode - 1)]; };
  auto se = [&](int i, int j, int mode) { return a.find(static_cast<std::uint64_t>(i * 20 + j), 7)->std_error[static_cast<std::size_t>(mode - 1)]; };
  for (int mode : {3, 4}) {
    bool ok = true;
    for (int k = 1; k < 20; ++k) ok = ok && at(0, k, mode) < at(0, 0, mode) && at(k, 0, mode) < at(0, 0, mode);
    ok = ok && at(19, 19, mode) < at(0, 0, mode);
    v.require(ok, "mode " + std::to_string(mode) + " largest at the ordered corner along both axes (" +
                      fmt(at(0, 0, mode), 4) + " -> " + fmt(at(0, 19, mode), 4) + " / " + fmt(at(19, 0, mode), 4) + ")");
  }
  for (int mode : {6, 7}) {
    const double rise = (at(19, 0, mode) - at(0, 0, mode)) / std::hypot(se(19, 0, mode), se(0, 0, mode));
    v.require(rise > 3, "mode " + std::to_string(mode) + " rises toward (c_tid, c_td) = (1, 0): " +
                            fmt(at(0, 0, mode), 4) + " -> " + fmt(at(19, 0, mode), 4) + " (" + fmt(rise, 3) + " SE)");
  }
  v.require(dt < 120.0, "runtime " + fmt(dt, 3) + " s < 120 s");
}

// 9. Interior transport optimum at depth 15.
void deep(Verdict& v) {
  const auto t0 = Clock::now();
  const MeshSpec spec = MeshSpec::light_cone(30, 15);
  SweepPlan plan;
  plan.spec = spec;
  plan.grid = make_grid({0.842}, unit_axis(20));
  plan.realizations_per_level = 20000;
  plan.master_seed = 909;
  SweepOptions options;
  options.workers = workers();
  const auto outer = ring_modes(spec, 1, 2);
  const EnaqtReport rep = detect_enaqt(run_sweep(plan, options), 0.842, outer, ring_modes(spec, 0, 0));
  std::string set;
  for (int m : outer) set += (set.empty() ? "" : ",") + std::to_string(m);
  v.require(rep.interior_maximum && rep.interior_optimum_c_td && *rep.interior_optimum_c_td > 0 &&
                *rep.interior_optimum_c_td < 1,
            "eta{" + set + "} peaks at c_td = " + fmt(rep.interior_optimum_c_td.value_or(-1), 4) +
                " with prominence " + fmt(rep.interior_prominence, 4) + " SE (> 3)");
  v.detail << "; runtime " << fmt(seconds_since(t0), 3) << " s";
}

// 10. Identical flags, different worker counts, identical files.
int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = "QWALK_OUT_DIR='" + dir.string() + "' '" + QWALK_CLI + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "qwalk_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"walk --ctid 0.5 --ctd 0.5 --n 2000", "walk"},
      {"tomography --ctid 1 --ctd 0.3 --n 1000", "tomography"},
      {"sweep --grid 5x5 --n 200", "sweep"},
      {"slice --n 1000 --points 6", "slice"},
      {"deep --depth 9 --n 500 --points 5", "deep"},
  };
  std::size_t files = 0;
  bool same = true;
  for (const auto& [args, name] : commands) {
    for (unsigned threads : {1u, 4u}) {
      const fs::path dir = root / std::to_string(threads);
      const int code = run_cli(args + " --threads " + std::to_string(threads) + " --out " + name, dir);
      if (code != 0) v.require(false, "'" + args + "' exited with " + std::to_string(code));
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "1")) {
    const fs::path other = root / "4" / entry.path().filename();
    ++files;
    if (!fs::exists(other) || read_file(entry.path().string()) != read_file(other.string())) {
      same = false;
      v.detail << "differs: " << entry.path().filename().string() << "; ";
    }
  }
  v.require(same && files > 0, std::to_string(files) + " output files byte-identical for 1 vs 4 threads");
  fs::remove_all(root);
}

const std::map<int, std::pair<std::string, std::function<void(Verdict&)>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<void(Verdict&)>>> all{
      {1, {"unitarity and oracle equivalence", unitarity}},
      {2, {"quoted cell settings", quoted_settings}},
      {3, {"ballistic regime", ballistic}},
      {4, {"diffusive regime", diffusive}},
      {5, {"localized regime", localized}},
      {6, {"tomography equivalence", tomography}},
      {7, {"environment-assisted transport at c_tid = 0.842", enaqt}},
      {8, {"20 x 20 x 200 sweep", paper_scale}},
      {9, {"depth-15 transport optimum", deep}},
      {10, {"determinism across worker counts", determinism}},
  };
  return all;
}

bool run_one(int id) {
  const auto& [title, check] = criteria().at(id);
  Verdict v;
  try {
    check(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  std::cout << "criterion " << id << " [" << (v.pass ? "PASS" : "FAIL") << "] " << title << ": " << v.detail.str()
            << std::endl;
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  bool ok = true;
  if (which == "all") {
    for (const auto& [id, c] : criteria()) ok = run_one(id) && ok;
  } else {
    int id = 0;
    try {
      id = std::stoi(which);
    } catch (const std::exception&) {
    }
    if (!criteria().contains(id)) {
      std::cerr << "usage: acceptance <1..10|all>\n";
      return 2;
    }
    ok = run_one(id);
  }
  return ok ? 0 : 1;
}

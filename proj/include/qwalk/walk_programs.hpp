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

// Walk programs and disorder.
//
// Static disorder is a per-waveguide phase held for every layer; dynamic
// disorder is drawn independently for every (mode, layer). Both scale a
// U[-pi, pi) draw by their coefficient, so c = 1 is full phase disorder over
// one period. The two fields add on each waveguide.

#include <qwalk/mesh.hpp>
#include <qwalk/rng.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace qwalk {

/// Static (c_tid) and dynamic (c_td) disorder coefficients, each in [0, 1].
class DisorderSpec {
 public:
  DisorderSpec() = default;
  DisorderSpec(double c_tid, double c_td) : c_tid_(c_tid), c_td_(c_td) {
    if (!(c_tid >= 0.0 && c_tid <= 1.0))
      throw std::invalid_argument("c_tid " + std::to_string(c_tid) +
                                  " outside [0, 1]");
    if (!(c_td >= 0.0 && c_td <= 1.0))
      throw std::invalid_argument("c_td " + std::to_string(c_td) +
                                  " outside [0, 1]");
  }

  double c_tid() const { return c_tid_; }
  double c_td() const { return c_td_; }

  friend bool operator==(const DisorderSpec&, const DisorderSpec&) = default;

 private:
  double c_tid_ = 0.0;
  double c_td_ = 0.0;
};

struct DisorderRealization {
  std::vector<double> static_phases;  // indexed by mode - 1
  PhaseScreens dynamic_phases;        // (mode, layer)
  SeedProvenance seed_provenance;

  friend bool operator==(const DisorderRealization&,
                         const DisorderRealization&) = default;
};

/// How a realization's phases map onto the two halves of the array.
///
/// SameSign puts each drawn phase on its own waveguide unchanged. Driving
/// phi_1 above the axis and phi_2 below it does exactly this, and it is the
/// choice under which a mirrored realization produces the mirror image of
/// the output, realization by realization. MirroredSign negates the phase on
/// lower-half waveguides (a sign flip of the differential phase); its
/// ensemble means are still mirror symmetric because the disorder law is.
enum class SymmetryPolicy { SameSign, MirroredSign };

/// Draw order: static phases for modes 1..M, then dynamic phases layer by
/// layer, modes 1..M within a layer.
inline DisorderRealization sample_realization(const MeshSpec& spec,
                                              const DisorderSpec& level,
                                              const SeedProvenance& provenance) {
  RealizationStream stream(provenance);
  DisorderRealization r{std::vector<double>(static_cast<std::size_t>(spec.num_modes())),
                        PhaseScreens(spec.num_modes(), spec.depth()), provenance};
  for (auto& s : r.static_phases) s = level.c_tid() * stream.uniform(-kPi, kPi);
  for (int t = 1; t <= spec.depth(); ++t)
    for (int x = 1; x <= spec.num_modes(); ++x)
      r.dynamic_phases(x, t) = level.c_td() * stream.uniform(-kPi, kPi);
  return r;
}

/// Input splitter on the apex cell, Hadamard everywhere else, zero screens.
inline MeshProgram build_symmetric_qw(const MeshSpec& spec) {
  MeshProgram program = MeshProgram::blank(spec);
  const auto cells = spec.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const bool apex = cells[i].layer == 1 && cells[i].top_mode == spec.axis();
    program.cell_settings[i] = apex ? kInputSplitter : kHadamard;
  }
  return program;
}

inline double disorder_sign(int mode, int num_modes, SymmetryPolicy policy) {
  if (policy == SymmetryPolicy::SameSign) return 1.0;
  return mode <= num_modes / 2 ? 1.0 : -1.0;
}

/// Adds the realization's phases to the program's screens; cells are left
/// untouched.
inline MeshProgram apply_disorder(MeshProgram program,
                                  const DisorderRealization& realization,
                                  SymmetryPolicy policy = SymmetryPolicy::SameSign) {
  PhaseScreens& screens = program.phase_screens;
  const int n = screens.num_modes();
  if (realization.static_phases.size() != static_cast<std::size_t>(n) ||
      realization.dynamic_phases.num_modes() != n ||
      realization.dynamic_phases.depth() != screens.depth())
    throw std::invalid_argument("disorder realization does not match program dimensions");
  for (int t = 1; t <= screens.depth(); ++t)
    for (int x = 1; x <= n; ++x) {
      const double field = wrap_phase(realization.static_phases[static_cast<std::size_t>(x - 1)] +
                                      realization.dynamic_phases(x, t));
      screens(x, t) = wrap_phase(screens(x, t) + disorder_sign(x, n, policy) * field);
    }
  return program;
}

/// Routes the state present after `read_layer` straight to the output:
/// later cells become wires and later screens are cleared.
inline MeshProgram build_tomography_program(const MeshSpec& spec,
                                            MeshProgram program, int read_layer) {
  validate_program(spec, program);
  spec.check_layer(read_layer);
  const auto cells = spec.cells();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].layer > read_layer) program.cell_settings[i] = kWire;
  for (int t = read_layer + 1; t <= spec.depth(); ++t)
    for (int x = 1; x <= spec.num_modes(); ++x) program.phase_screens(x, t) = 0.0;
  return program;
}

/// Reflects a program about the mirror axis: cell settings and screen
/// phases move to the mirrored cell and waveguide.
///
/// Reflection maps a real (phi = 0) cell onto the mirrored cell up to
/// bottom-port signs, and those signs cancel between consecutive staggered
/// layers; the apex input splitter's output absorbs the one sign left over.
/// So for programs whose cells have phi = 0 apart from the apex splitter,
/// propagating the mirrored program from the same injection mode yields the
/// mirror image of the original output intensities.
inline MeshProgram mirror_program(const MeshSpec& spec, const MeshProgram& program) {
  validate_program(spec, program);
  MeshProgram out = MeshProgram::blank(spec);
  const auto cells = spec.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const int mirrored_top = spec.num_modes() - cells[i].top_mode;
    auto j = spec.cell_index(cells[i].layer, mirrored_top);
    if (!j) throw std::invalid_argument("mesh is not mirror symmetric at " + describe(cells[i]));
    out.cell_settings[*j] = program.cell_settings[i];
  }
  for (int t = 1; t <= spec.depth(); ++t)
    for (int x = 1; x <= spec.num_modes(); ++x)
      out.phase_screens(x, t) = program.phase_screens(spec.mirror_mode(x), t);
  return out;
}

/// Same draws, reflected onto mirrored waveguides.
inline DisorderRealization mirror_realization(const DisorderRealization& r) {
  DisorderRealization out = r;
  const int n = r.dynamic_phases.num_modes();
  for (int x = 1; x <= n; ++x) {
    out.static_phases[static_cast<std::size_t>(x - 1)] =
        r.static_phases[static_cast<std::size_t>(n - x)];
    for (int t = 1; t <= r.dynamic_phases.depth(); ++t)
      out.dynamic_phases(x, t) = r.dynamic_phases(n + 1 - x, t);
  }
  return out;
}

}  // namespace qwalk

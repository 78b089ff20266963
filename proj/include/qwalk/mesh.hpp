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

// Mesh geometry, the reconfigurable-beamsplitter cell and single-realization
// propagation.
//
// Modes are 1-based throughout the public API. Layer t (1-based) is applied
// as: every cell unitary of the layer, then the layer's per-mode phase
// screen. Cells only ever couple adjacent modes (top_mode, top_mode + 1).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwalk {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using IntensityDistribution = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double radians) {
  double r = std::remainder(radians, kTwoPi);
  return r <= -kPi ? r + kTwoPi : r;
}

/// Position of a cell relative to the cone's mirror axis.
enum class Half { Upper, Lower, Center };

inline const char* to_string(Half h) {
  switch (h) {
    case Half::Upper: return "upper";
    case Half::Lower: return "lower";
    case Half::Center: return "center";
  }
  return "?";
}

struct CellCoord {
  int layer = 0;
  int top_mode = 0;
  Half half = Half::Center;

  int bottom_mode() const { return top_mode + 1; }

  friend bool operator==(const CellCoord& a, const CellCoord& b) {
    return a.layer == b.layer && a.top_mode == b.top_mode;
  }
  friend auto operator<=>(const CellCoord& a, const CellCoord& b) {
    if (auto c = a.layer <=> b.layer; c != 0) return c;
    return a.top_mode <=> b.top_mode;
  }
};

inline std::string describe(const CellCoord& c) {
  return "cell(layer " + std::to_string(c.layer) + ", modes " +
         std::to_string(c.top_mode) + "/" + std::to_string(c.bottom_mode()) +
         ")";
}

/// Internal (theta) and external (phi) differential phases of one cell,
/// both held in (-pi, pi].
class RbsSetting {
 public:
  RbsSetting() = default;
  RbsSetting(double theta, double phi)
      : theta_(wrap_phase(theta)), phi_(wrap_phase(phi)) {}

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  friend bool operator==(const RbsSetting&, const RbsSetting&) = default;

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

/// Bar state: each input stays on its own waveguide.
inline const RbsSetting kWire{kPi, 0.0};
inline const RbsSetting kHadamard{kPi / 2, 0.0};
/// First cell of the symmetric walk; bottom-port input leaves as
/// (|t> + i|b>)/sqrt(2) up to a global phase.
inline const RbsSetting kInputSplitter{kPi / 2, kPi / 2};

/// U(theta, phi) = [[e^{i phi} sin(theta/2), e^{i phi} cos(theta/2)],
///                  [cos(theta/2),           -sin(theta/2)]]
/// Rows are the (top, bottom) outputs, columns the (top, bottom) inputs.
inline Eigen::Matrix2cd cell_unitary(const RbsSetting& setting) {
  const double s = std::sin(setting.theta() / 2);
  const double c = std::cos(setting.theta() / 2);
  const Complex e = std::polar(1.0, setting.phi());
  Eigen::Matrix2cd u;
  u << e * s, e * c, c, -s;
  return u;
}

enum class MeshShape { LightCone, Rectangular };

/// Geometry of the staggered mesh.
///
/// The light cone has t cells in layer t; cell k couples modes
/// (num_modes/2 - t + 2k - 1, num_modes/2 - t + 2k). The rectangular variant
/// keeps the same stagger but fills every layer edge to edge, so it contains
/// the cone as a sub-lattice.
class MeshSpec {
 public:
  static MeshSpec light_cone(int num_modes = 14, int depth = 7,
                             std::optional<int> injection_mode = {}) {
    MeshSpec spec(num_modes, depth, injection_mode, MeshShape::LightCone);
    for (int t = 1; t <= depth; ++t) {
      spec.layer_offsets_.push_back(spec.cells_.size());
      for (int k = 1; k <= t; ++k) spec.add_cell(t, num_modes / 2 - t + 2 * k - 1);
    }
    spec.layer_offsets_.push_back(spec.cells_.size());
    return spec;
  }

  static MeshSpec rectangular(int num_modes = 14, int depth = 7,
                              std::optional<int> injection_mode = {}) {
    MeshSpec spec(num_modes, depth, injection_mode, MeshShape::Rectangular);
    for (int t = 1; t <= depth; ++t) {
      spec.layer_offsets_.push_back(spec.cells_.size());
      // Same parity as the cone's first cell in this layer.
      int first = num_modes / 2 - t + 1;
      while (first - 2 >= 1) first -= 2;
      for (int top = first; top + 1 <= num_modes; top += 2) spec.add_cell(t, top);
    }
    spec.layer_offsets_.push_back(spec.cells_.size());
    return spec;
  }

  int num_modes() const { return num_modes_; }
  int depth() const { return depth_; }
  int injection_mode() const { return injection_mode_; }
  MeshShape shape() const { return shape_; }
  /// Last mode of the upper half; the mirror axis sits between axis() and
  /// axis() + 1.
  int axis() const { return num_modes_ / 2; }
  int mirror_mode(int mode) const { return num_modes_ + 1 - mode; }

  std::span<const CellCoord> cells() const { return cells_; }
  std::span<const CellCoord> layer_cells(int layer) const {
    check_layer(layer);
    return std::span<const CellCoord>(cells_).subspan(
        layer_offsets_[layer - 1],
        layer_offsets_[layer] - layer_offsets_[layer - 1]);
  }
  std::size_t layer_offset(int layer) const {
    check_layer(layer);
    return layer_offsets_[layer - 1];
  }

  std::optional<std::size_t> cell_index(int layer, int top_mode) const {
    if (layer < 1 || layer > depth_) return std::nullopt;
    auto row = layer_cells(layer);
    auto it = std::find_if(row.begin(), row.end(), [&](const CellCoord& c) {
      return c.top_mode == top_mode;
    });
    if (it == row.end()) return std::nullopt;
    return layer_offsets_[layer - 1] + static_cast<std::size_t>(it - row.begin());
  }

  void check_layer(int layer) const {
    if (layer < 1 || layer > depth_)
      throw std::out_of_range("layer " + std::to_string(layer) +
                              " outside [1, " + std::to_string(depth_) + "]");
  }
  void check_mode(int mode) const {
    if (mode < 1 || mode > num_modes_)
      throw std::out_of_range("mode " + std::to_string(mode) + " outside [1, " +
                              std::to_string(num_modes_) + "]");
  }

  friend bool operator==(const MeshSpec& a, const MeshSpec& b) {
    return a.num_modes_ == b.num_modes_ && a.depth_ == b.depth_ &&
           a.injection_mode_ == b.injection_mode_ && a.shape_ == b.shape_;
  }

 private:
  MeshSpec(int num_modes, int depth, std::optional<int> injection_mode,
           MeshShape shape)
      : num_modes_(num_modes), depth_(depth), shape_(shape) {
    if (depth < 1) throw std::invalid_argument("depth must be positive");
    if (num_modes < 2 || num_modes % 2 != 0)
      throw std::invalid_argument("num_modes must be even and at least 2");
    if (num_modes < 2 * depth)
      throw std::invalid_argument(
          "num_modes must be at least 2 * depth for a centered light cone");
    injection_mode_ = injection_mode.value_or(num_modes / 2 + 1);
    if (injection_mode_ != num_modes / 2 && injection_mode_ != num_modes / 2 + 1)
      throw std::invalid_argument(
          "injection mode must be a port of the apex cell (" +
          std::to_string(num_modes / 2) + " or " +
          std::to_string(num_modes / 2 + 1) + ")");
  }

  void add_cell(int layer, int top) {
    Half half = top == axis()       ? Half::Center
                : top + 1 <= axis() ? Half::Upper
                                    : Half::Lower;
    cells_.push_back(CellCoord{layer, top, half});
  }

  int num_modes_ = 0;
  int depth_ = 0;
  int injection_mode_ = 0;
  MeshShape shape_ = MeshShape::LightCone;
  std::vector<CellCoord> cells_;
  std::vector<std::size_t> layer_offsets_;
};

/// Per-(mode, layer) phases applied after each layer's cells.
class PhaseScreens {
 public:
  PhaseScreens() = default;
  PhaseScreens(int num_modes, int depth)
      : num_modes_(num_modes),
        depth_(depth),
        values_(static_cast<std::size_t>(num_modes) * depth, 0.0) {}

  int num_modes() const { return num_modes_; }
  int depth() const { return depth_; }

  double& operator()(int mode, int layer) { return values_[index(mode, layer)]; }
  double operator()(int mode, int layer) const {
    return values_[index(mode, layer)];
  }
  /// Phases of one layer, indexed by mode - 1.
  std::span<const double> layer(int layer) const {
    return std::span<const double>(values_).subspan(index(1, layer),
                                                    static_cast<std::size_t>(num_modes_));
  }

  friend bool operator==(const PhaseScreens&, const PhaseScreens&) = default;

 private:
  std::size_t index(int mode, int layer) const {
    return static_cast<std::size_t>(layer - 1) * num_modes_ +
           static_cast<std::size_t>(mode - 1);
  }

  int num_modes_ = 0;
  int depth_ = 0;
  std::vector<double> values_;
};

/// Cell settings aligned with MeshSpec::cells() plus the phase screens.
/// An empty optional marks a cell that has not been programmed.
struct MeshProgram {
  std::vector<std::optional<RbsSetting>> cell_settings;
  PhaseScreens phase_screens;

  static MeshProgram blank(const MeshSpec& spec) {
    return MeshProgram{
        std::vector<std::optional<RbsSetting>>(spec.cells().size()),
        PhaseScreens(spec.num_modes(), spec.depth())};
  }

  friend bool operator==(const MeshProgram&, const MeshProgram&) = default;
};

/// Throws if the program does not cover `spec`.
inline void validate_program(const MeshSpec& spec, const MeshProgram& program) {
  if (program.cell_settings.size() != spec.cells().size())
    throw std::invalid_argument("program has " +
                                std::to_string(program.cell_settings.size()) +
                                " cell slots, mesh has " +
                                std::to_string(spec.cells().size()));
  if (program.phase_screens.num_modes() != spec.num_modes() ||
      program.phase_screens.depth() != spec.depth())
    throw std::invalid_argument("phase screen dimensions do not match mesh");
  for (std::size_t i = 0; i < spec.cells().size(); ++i)
    if (!program.cell_settings[i])
      throw std::invalid_argument("missing setting for " +
                                  describe(spec.cells()[i]));
}

namespace detail {

inline void apply_cell_in_place(StateVector& state, const CellCoord& cell,
                                const Eigen::Matrix2cd& u) {
  const Eigen::Index top = cell.top_mode - 1;
  const Complex a = state[top];
  const Complex b = state[top + 1];
  state[top] = u(0, 0) * a + u(0, 1) * b;
  state[top + 1] = u(1, 0) * a + u(1, 1) * b;
}

inline void apply_phases_in_place(StateVector& state,
                                  std::span<const double> phases) {
  for (Eigen::Index x = 0; x < state.size(); ++x) {
    const double p = phases[static_cast<std::size_t>(x)];
    if (p != 0.0) state[x] *= std::polar(1.0, p);
  }
}

}  // namespace detail

inline StateVector apply_cell(StateVector state, const CellCoord& cell,
                              const RbsSetting& setting) {
  if (cell.top_mode < 1 || cell.bottom_mode() > state.size())
    throw std::out_of_range("malformed mesh: " + describe(cell) +
                            " outside a state of " +
                            std::to_string(state.size()) + " modes");
  detail::apply_cell_in_place(state, cell, cell_unitary(setting));
  return state;
}

inline StateVector apply_phase_layer(StateVector state,
                                     std::span<const double> phases) {
  if (phases.size() != static_cast<std::size_t>(state.size()))
    throw std::invalid_argument("phase layer has " +
                                std::to_string(phases.size()) +
                                " entries for a state of " +
                                std::to_string(state.size()) + " modes");
  detail::apply_phases_in_place(state, phases);
  return state;
}

inline StateVector basis_state(int num_modes, int mode) {
  StateVector s = StateVector::Zero(num_modes);
  s[mode - 1] = 1.0;
  return s;
}

/// State after layers 1..up_to_layer (default: all) for a photon injected
/// at `input_mode`.
inline StateVector propagate(const MeshSpec& spec, const MeshProgram& program,
                             int input_mode,
                             std::optional<int> up_to_layer = std::nullopt) {
  validate_program(spec, program);
  spec.check_mode(input_mode);
  const int last = up_to_layer.value_or(spec.depth());
  spec.check_layer(last);

  StateVector state = basis_state(spec.num_modes(), input_mode);
  for (int t = 1; t <= last; ++t) {
    const std::size_t offset = spec.layer_offset(t);
    auto row = spec.layer_cells(t);
    for (std::size_t k = 0; k < row.size(); ++k)
      detail::apply_cell_in_place(
          state, row[k], cell_unitary(*program.cell_settings[offset + k]));
    detail::apply_phases_in_place(state, program.phase_screens.layer(t));
  }
  return state;
}

/// Whole-mesh transfer matrix, composed layer by layer from block-diagonal
/// cell matrices and diagonal phase screens.
inline Eigen::MatrixXcd full_unitary(const MeshSpec& spec,
                                     const MeshProgram& program) {
  validate_program(spec, program);
  const int n = spec.num_modes();
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(n, n);
  for (int t = 1; t <= spec.depth(); ++t) {
    Eigen::MatrixXcd layer = Eigen::MatrixXcd::Identity(n, n);
    const std::size_t offset = spec.layer_offset(t);
    auto row = spec.layer_cells(t);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const int top = row[k].top_mode - 1;
      layer.block<2, 2>(top, top) = cell_unitary(*program.cell_settings[offset + k]);
    }
    Eigen::VectorXcd screen(n);
    auto phases = program.phase_screens.layer(t);
    for (int x = 0; x < n; ++x) screen[x] = std::polar(1.0, phases[static_cast<std::size_t>(x)]);
    total = screen.asDiagonal() * layer * total;
  }
  return total;
}

inline IntensityDistribution intensities(const StateVector& state) {
  IntensityDistribution out(static_cast<std::size_t>(state.size()));
  for (Eigen::Index x = 0; x < state.size(); ++x)
    out[static_cast<std::size_t>(x)] = std::norm(state[x]);
  return out;
}

}  // namespace qwalk

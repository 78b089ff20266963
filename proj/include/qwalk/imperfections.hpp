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

// Hardware-realism layer: unbalanced directional couplers, the thermo-optic
// bias-to-phase response, interferometric visibility and uniform insertion
// loss. The ideal model lives in mesh.hpp; nothing here changes it.

#include <qwalk/errors.hpp>
#include <qwalk/mesh.hpp>
#include <qwalk/rng.hpp>
#include <qwalk/serialize.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qwalk {

/// Monotone phase(V^2) table with linear interpolation.
class PhaseResponse {
 public:
  PhaseResponse() = default;
  /// Points are (squared bias [V^2], phase [rad]), strictly increasing in
  /// V^2, nondecreasing in phase, starting at V^2 = 0.
  explicit PhaseResponse(std::vector<std::pair<double, double>> points)
      : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("phase response needs at least two points");
    if (points_.front().first != 0.0) throw std::invalid_argument("phase response must start at zero bias");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i].first > points_[i - 1].first))
        throw std::invalid_argument("phase response squared-bias column must increase");
      if (points_[i].second < points_[i - 1].second)
        throw std::invalid_argument("phase response must be monotone nondecreasing");
    }
  }

  const std::vector<std::pair<double, double>>& points() const { return points_; }
  double max_bias() const { return std::sqrt(points_.back().first); }
  double max_phase() const { return points_.back().second; }

  double phase_at_squared_bias(double v2) const {
    if (v2 < 0.0 || v2 > points_.back().first)
      throw std::out_of_range("squared bias " + std::to_string(v2) + " outside table");
    auto it = std::upper_bound(points_.begin(), points_.end(), v2,
                               [](double v, const auto& p) { return v < p.first; });
    if (it == points_.end()) return points_.back().second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double f = (v2 - lo.first) / (hi.first - lo.first);
    return lo.second + f * (hi.second - lo.second);
  }

  /// Smallest squared bias reaching `phase`.
  double squared_bias_for_phase(double phase) const {
    if (phase < points_.front().second || phase > points_.back().second)
      throw std::out_of_range("phase " + std::to_string(phase) + " outside table range");
    auto it = std::lower_bound(points_.begin(), points_.end(), phase,
                               [](const auto& p, double ph) { return p.second < ph; });
    if (it == points_.begin()) return it->first;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double f = (phase - lo.second) / (hi.second - lo.second);
    return lo.first + f * (hi.first - lo.first);
  }

  /// Synthetic stand-in for a measured curve: linear in V^2 up to 1.5 pi,
  /// then saturating, reaching about 2.45 pi at the 12 V driver limit.
  static PhaseResponse synthetic_default() {
    constexpr double kMaxBias = 12.0;
    constexpr double kKnee = 72.0;  // V^2 where the linear part ends
    const double slope = 1.5 * kPi / kKnee;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= 120; ++i) {
      const double v = kMaxBias * i / 120.0;
      const double u = v * v;
      const double phase = u <= kKnee ? slope * u
                                      : 1.5 * kPi + slope * kKnee * (1.0 - std::exp(-(u - kKnee) / kKnee));
      pts.emplace_back(u, phase);
    }
    return PhaseResponse(std::move(pts));
  }

 private:
  std::vector<std::pair<double, double>> points_;
};

struct HardwareModel {
  /// Standard deviation of the per-coupler power-splitting error delta
  /// (splitting ratio 0.5 + delta), zero-mean Gaussian.
  double coupler_sigma = 0.0;
  PhaseResponse phase_response = PhaseResponse::synthetic_default();
  /// Cells whose visibility falls below this are reported as out of spec.
  double visibility_floor = 0.0;
  /// End-to-end uniform loss.
  double insertion_loss_db = 0.0;

  void validate() const {
    if (!(coupler_sigma >= 0.0)) throw std::invalid_argument("coupler_sigma must be >= 0");
    if (!(visibility_floor >= 0.0 && visibility_floor <= 1.0))
      throw std::invalid_argument("visibility_floor must lie in [0, 1]");
    if (!(insertion_loss_db >= 0.0)) throw std::invalid_argument("insertion loss must be >= 0 dB");
  }
};

struct CouplerErrors {
  double first = 0.0;   // input-side coupler
  double second = 0.0;  // output-side coupler
};

/// 2x2 transfer matrix of a directional coupler with power splitting
/// 0.5 + delta into the bar port.
inline Eigen::Matrix2cd directional_coupler(double delta) {
  const double bar = 0.5 + delta;
  if (!(bar >= 0.0 && bar <= 1.0))
    throw std::invalid_argument("coupler reflectivity " + std::to_string(bar) + " outside [0, 1]");
  const Complex r(std::sqrt(bar), 0.0);
  const Complex t(0.0, std::sqrt(1.0 - bar));
  Eigen::Matrix2cd m;
  m << r, t, t, r;
  return m;
}

/// diag(e^{i phi}, 1) * DC(delta_2) * diag(e^{i theta/2}, e^{-i theta/2}) * DC(delta_1),
/// with the global factor -i removed so that it equals cell_unitary() when
/// both errors vanish.
inline Eigen::Matrix2cd imperfect_cell_unitary(const RbsSetting& setting, const CouplerErrors& errors) {
  Eigen::Matrix2cd internal = Eigen::Matrix2cd::Zero();
  internal(0, 0) = std::polar(1.0, setting.theta() / 2);
  internal(1, 1) = std::polar(1.0, -setting.theta() / 2);
  Eigen::Matrix2cd external = Eigen::Matrix2cd::Identity();
  external(0, 0) = std::polar(1.0, setting.phi());
  return Complex(0.0, -1.0) * external * directional_coupler(errors.second) * internal *
         directional_coupler(errors.first);
}

/// V = (I_max - I_min) / (I_max + I_min) of the top-to-top transmission
/// |U_11|^2 swept over theta in [0, 2 pi).
inline double visibility(const CouplerErrors& errors, int steps = 4096) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < steps; ++k) {
    const double theta = kTwoPi * k / steps;
    const double t = std::norm(imperfect_cell_unitary(RbsSetting(theta, 0.0), errors)(0, 0));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return (hi - lo) / (hi + lo);
}

/// Per-cell coupler errors for `cells` cells, drawn from the model's law
/// (rejecting draws that leave [0, 1] splitting).
inline std::vector<CouplerErrors> sample_coupler_errors(const HardwareModel& model, std::size_t cells,
                                                        std::uint64_t seed) {
  model.validate();
  RealizationStream stream(SeedProvenance{seed, 0xc0u, 0});
  auto gaussian = [&] {
    // Box-Muller on the stream's portable uniforms.
    for (;;) {
      const double u1 = stream.uniform01();
      const double u2 = stream.uniform01();
      if (u1 <= 0.0) continue;
      const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2) * model.coupler_sigma;
      if (std::abs(g) <= 0.5) return g;
    }
  };
  std::vector<CouplerErrors> out(cells);
  for (auto& e : out) {
    e.first = gaussian();
    e.second = gaussian();
  }
  return out;
}

/// Expected visibility of one cell when both coupler errors are
/// N(0, sigma^2), using the closed form V = 2 sqrt(r1 r2 t1 t2) / (r1 r2 + t1 t2).
inline double expected_visibility(double sigma) {
  if (sigma <= 0.0) return 1.0;
  auto v = [](double d1, double d2) {
    const double r1 = 0.5 + d1, r2 = 0.5 + d2, t1 = 0.5 - d1, t2 = 0.5 - d2;
    const double p = r1 * r2, q = t1 * t2;
    return 2.0 * std::sqrt(std::max(0.0, p * q)) / (p + q);
  };
  auto pdf = [sigma](double x) { return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(kTwoPi)); };
  const double span = std::min(0.5, 8.0 * sigma);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  return Quad::integrate(
      [&](double d1) {
        return pdf(d1) * Quad::integrate([&](double d2) { return pdf(d2) * v(d1, d2); }, -span, span, 5, 1e-13);
      },
      -span, span, 5, 1e-13);
}

/// Coupler sigma whose expected cell visibility equals `target`.
inline double calibrate_coupler_sigma(double target_visibility) {
  if (!(target_visibility > 0.0 && target_visibility < 1.0))
    throw std::invalid_argument("target visibility must lie in (0, 1)");
  auto f = [&](double s) { return expected_visibility(s) - target_visibility; };
  double lo = 1e-9, hi = 0.2;
  if (f(hi) > 0.0) throw std::invalid_argument("target visibility below reachable range");
  boost::uintmax_t iterations = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                                  iterations);
  return 0.5 * (a + b);
}

inline double bias_to_phase(const HardwareModel& model, double bias_volts) {
  if (bias_volts < 0.0 || bias_volts > model.phase_response.max_bias())
    throw std::out_of_range("bias " + std::to_string(bias_volts) + " V outside table domain");
  return model.phase_response.phase_at_squared_bias(bias_volts * bias_volts);
}

inline double phase_to_bias(const HardwareModel& model, double phase) {
  return std::sqrt(model.phase_response.squared_bias_for_phase(phase));
}

/// Power transmission factor for the model's end-to-end loss.
inline double transmission_factor(const HardwareModel& model) {
  return std::pow(10.0, -model.insertion_loss_db / 10.0);
}

inline IntensityDistribution apply_insertion_loss(IntensityDistribution d, const HardwareModel& model) {
  const double f = transmission_factor(model);
  for (auto& v : d) v *= f;
  return d;
}

/// Like propagate(), with each cell built from its own coupler errors.
inline StateVector propagate_imperfect(const MeshSpec& spec, const MeshProgram& program,
                                       const std::vector<CouplerErrors>& errors, int input_mode) {
  validate_program(spec, program);
  spec.check_mode(input_mode);
  if (errors.size() != spec.cells().size())
    throw std::invalid_argument("need one coupler-error pair per cell");
  StateVector state = basis_state(spec.num_modes(), input_mode);
  for (int t = 1; t <= spec.depth(); ++t) {
    const std::size_t offset = spec.layer_offset(t);
    auto row = spec.layer_cells(t);
    for (std::size_t k = 0; k < row.size(); ++k)
      detail::apply_cell_in_place(state, row[k],
                                  imperfect_cell_unitary(*program.cell_settings[offset + k], errors[offset + k]));
    detail::apply_phases_in_place(state, program.phase_screens.layer(t));
  }
  return state;
}

/// Indices of cells whose visibility is below the model's floor.
inline std::vector<std::size_t> cells_below_floor(const HardwareModel& model,
                                                  const std::vector<CouplerErrors>& errors) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (visibility(errors[i]) < model.visibility_floor) out.push_back(i);
  return out;
}

// ---- file form ----

inline Json to_json(const HardwareModel& m) {
  Json table = Json::array();
  for (const auto& [v2, phase] : m.phase_response.points()) table.push_back(Json::array({v2, phase}));
  return Json{{"coupler_sigma", m.coupler_sigma},
              {"visibility_floor", m.visibility_floor},
              {"insertion_loss_db", m.insertion_loss_db},
              {"phase_response", std::move(table)}};
}

inline HardwareModel hardware_model_from_json(const Json& j) {
  HardwareModel m;
  m.coupler_sigma = j.value("coupler_sigma", 0.0);
  m.visibility_floor = j.value("visibility_floor", 0.0);
  m.insertion_loss_db = j.value("insertion_loss_db", 0.0);
  if (j.contains("phase_response")) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("phase_response")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    m.phase_response = PhaseResponse(std::move(pts));
  }
  m.validate();
  return m;
}

inline HardwareModel load_hardware_model(const std::string& path) {
  try {
    return hardware_model_from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw PersistenceError("malformed hardware model '" + path + "': " + e.what());
  }
}

}  // namespace qwalk

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

#include <qwalk/mesh.hpp>
#include <qwalk/walk_programs.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"

namespace qwalk {
namespace {

constexpr double kTight = 1e-12;

TEST(DisorderSpec, RejectsOutOfRangeCoefficients) {
  EXPECT_NO_THROW(DisorderSpec(0.0, 1.0));
  EXPECT_THROW(DisorderSpec(-0.01, 0.5), std::invalid_argument);
  EXPECT_THROW(DisorderSpec(0.5, 1.01), std::invalid_argument);
  EXPECT_THROW(DisorderSpec(std::nan(""), 0.5), std::invalid_argument);
}

TEST(SymmetricWalk, ProgramLayout) {
  const MeshSpec spec = MeshSpec::light_cone();
  const MeshProgram p = build_symmetric_qw(spec);
  ASSERT_EQ(p.cell_settings.size(), 28u);
  int splitters = 0, hadamards = 0;
  for (std::size_t i = 0; i < 28; ++i) {
    if (*p.cell_settings[i] == kInputSplitter) {
      ++splitters;
      EXPECT_EQ(spec.cells()[i].layer, 1);
    }
    if (*p.cell_settings[i] == kHadamard) ++hadamards;
  }
  EXPECT_EQ(splitters, 1);
  EXPECT_EQ(hadamards, 27);
  for (int t = 1; t <= 7; ++t)
    for (int x = 1; x <= 14; ++x) EXPECT_EQ(p.phase_screens(x, t), 0.0);
}

TEST(SymmetricWalk, OrderedOutputIsMirrorSymmetric) {
  const MeshSpec spec = MeshSpec::light_cone();
  const auto d = intensities(propagate(spec, build_symmetric_qw(spec), 8));
  for (int x = 1; x <= 7; ++x) EXPECT_NEAR(d[static_cast<std::size_t>(x - 1)], d[static_cast<std::size_t>(14 - x)], kTight);
}

TEST(SymmetricWalk, TwoLayerToyMesh) {
  // Hand multiplication: apex output (i|2> - |3>)/sqrt2, then Hadamards on
  // (1,2) and (3,4) give amplitudes (i/2, -i/2, -1/2, -1/2).
  const MeshSpec spec = MeshSpec::light_cone(4, 2);
  const StateVector s = propagate(spec, build_symmetric_qw(spec), 3);
  EXPECT_NEAR(std::abs(s[0] - Complex(0, 0.5)), 0, kTight);
  EXPECT_NEAR(std::abs(s[1] - Complex(0, -0.5)), 0, kTight);
  EXPECT_NEAR(std::abs(s[2] - Complex(-0.5, 0)), 0, kTight);
  EXPECT_NEAR(std::abs(s[3] - Complex(-0.5, 0)), 0, kTight);
  const Eigen::MatrixXcd u = full_unitary(spec, build_symmetric_qw(spec));
  EXPECT_LT((u.col(2) - s).cwiseAbs().maxCoeff(), kTight);
}

TEST(Realization, DeterministicAndScaled) {
  const MeshSpec spec = MeshSpec::light_cone();
  const SeedProvenance prov{42, 3, 17};
  const auto a = sample_realization(spec, DisorderSpec(1, 1), prov);
  const auto b = sample_realization(spec, DisorderSpec(1, 1), prov);
  EXPECT_EQ(a, b);
  const auto c = sample_realization(spec, DisorderSpec(0.3, 0.6), prov);
  for (int x = 0; x < 14; ++x)
    EXPECT_EQ(c.static_phases[static_cast<std::size_t>(x)], 0.3 * a.static_phases[static_cast<std::size_t>(x)]);
  for (int t = 1; t <= 7; ++t)
    for (int x = 1; x <= 14; ++x) EXPECT_EQ(c.dynamic_phases(x, t), 0.6 * a.dynamic_phases(x, t));
  const auto other = sample_realization(spec, DisorderSpec(1, 1), SeedProvenance{42, 3, 18});
  EXPECT_NE(other.static_phases, a.static_phases);
}

TEST(Realization, StaticMarginalIsUniform) {
  const MeshSpec spec = MeshSpec::light_cone();
  std::vector<double> draws;
  for (std::uint64_t r = 0; draws.size() < 100000; ++r) {
    const auto z = sample_realization(spec, DisorderSpec(1, 0), SeedProvenance{7, 0, r});
    for (double s : z.static_phases) draws.push_back(s);
  }
  draws.resize(100000);
  std::sort(draws.begin(), draws.end());
  double ks = 0;
  const double n = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double cdf = (draws[i] + kPi) / (2 * kPi);
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
  EXPECT_GE(draws.front(), -kPi);
  EXPECT_LT(draws.back(), kPi);
}

TEST(ApplyDisorder, ZeroRealizationIsIdentity) {
  const MeshSpec spec = MeshSpec::light_cone();
  std::mt19937_64 rng(1);
  const MeshProgram p = testing::random_program(spec, rng);
  const auto z = sample_realization(spec, DisorderSpec(0, 0), SeedProvenance{1, 2, 3});
  const MeshProgram q = apply_disorder(p, z);
  for (int t = 1; t <= 7; ++t)
    for (int x = 1; x <= 14; ++x) EXPECT_NEAR(q.phase_screens(x, t), p.phase_screens(x, t), 1e-15);
  EXPECT_EQ(q.cell_settings, p.cell_settings);
}

TEST(ApplyDisorder, StaticOnlyIsConstantInTime) {
  const MeshSpec spec = MeshSpec::light_cone();
  const auto z = sample_realization(spec, DisorderSpec(1, 0), SeedProvenance{9, 0, 0});
  const MeshProgram q = apply_disorder(build_symmetric_qw(spec), z);
  for (int x = 1; x <= 14; ++x) {
    for (int t = 2; t <= 7; ++t) EXPECT_EQ(q.phase_screens(x, t), q.phase_screens(x, 1));
    EXPECT_NEAR(q.phase_screens(x, 1), wrap_phase(z.static_phases[static_cast<std::size_t>(x - 1)]), kTight);
  }
  const MeshProgram flipped = apply_disorder(build_symmetric_qw(spec), z, SymmetryPolicy::MirroredSign);
  EXPECT_NEAR(flipped.phase_screens(12, 3), wrap_phase(-z.static_phases[11]), kTight);
  EXPECT_NEAR(flipped.phase_screens(3, 3), wrap_phase(z.static_phases[2]), kTight);
}

TEST(ApplyDisorder, MirroredRealizationMirrorsOutput) {
  const MeshSpec spec = MeshSpec::light_cone();
  const MeshProgram base = build_symmetric_qw(spec);
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto z = sample_realization(spec, DisorderSpec(0.7, 0.4), SeedProvenance{5, 1, r});
    const auto a = intensities(propagate(spec, apply_disorder(base, z), 8));
    const auto b = intensities(propagate(spec, apply_disorder(base, mirror_realization(z)), 8));
    for (int x = 1; x <= 14; ++x)
      EXPECT_NEAR(a[static_cast<std::size_t>(x - 1)], b[static_cast<std::size_t>(14 - x)], kTight);
  }
}

// Negating lower-half phases breaks the per-realization reflection.
TEST(ApplyDisorder, MirroredSignIsNotCovariantPerRealization) {
  const MeshSpec spec = MeshSpec::light_cone();
  const MeshProgram base = build_symmetric_qw(spec);
  double worst = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto z = sample_realization(spec, DisorderSpec(0.7, 0.4), SeedProvenance{5, 1, r});
    const auto a = intensities(propagate(spec, apply_disorder(base, z, SymmetryPolicy::MirroredSign), 8));
    const auto b = intensities(
        propagate(spec, apply_disorder(base, mirror_realization(z), SymmetryPolicy::MirroredSign), 8));
    for (int x = 1; x <= 14; ++x)
      worst = std::max(worst, std::abs(a[static_cast<std::size_t>(x - 1)] - b[static_cast<std::size_t>(14 - x)]));
  }
  EXPECT_GT(worst, 1e-3);
}

TEST(ApplyDisorder, DimensionMismatch) {
  const MeshSpec spec = MeshSpec::light_cone();
  const auto z = sample_realization(MeshSpec::light_cone(16, 7), DisorderSpec(1, 1), SeedProvenance{});
  EXPECT_THROW(apply_disorder(build_symmetric_qw(spec), z), std::invalid_argument);
}

TEST(Tomography, LastLayerUnchanged) {
  const MeshSpec spec = MeshSpec::light_cone();
  const MeshProgram p = apply_disorder(build_symmetric_qw(spec),
                                       sample_realization(spec, DisorderSpec(0.5, 0.5), SeedProvenance{1, 1, 1}));
  EXPECT_EQ(build_tomography_program(spec, p, 7), p);
}

TEST(Tomography, FirstLayerReadout) {
  const MeshSpec spec = MeshSpec::light_cone();
  const auto d = intensities(propagate(spec, build_tomography_program(spec, build_symmetric_qw(spec), 1), 8));
  for (int x = 1; x <= 14; ++x) EXPECT_NEAR(d[static_cast<std::size_t>(x - 1)], (x == 7 || x == 8) ? 0.5 : 0.0, kTight);
}

TEST(Tomography, WireRoutingEqualsDirectReadout) {
  for (const MeshSpec& spec : {MeshSpec::light_cone(), MeshSpec::rectangular()}) {
    const MeshProgram base = build_symmetric_qw(spec);
    for (std::uint64_t r = 0; r < 20; ++r) {
      const MeshProgram p = apply_disorder(base, sample_realization(spec, DisorderSpec(0.8, 0.3), SeedProvenance{3, 0, r}));
      for (int layer = 1; layer <= 7; ++layer) {
        const auto routed = intensities(propagate(spec, build_tomography_program(spec, p, layer), 8));
        const auto direct = intensities(propagate(spec, p, 8, layer));
        for (int x = 0; x < 14; ++x) EXPECT_NEAR(routed[static_cast<std::size_t>(x)], direct[static_cast<std::size_t>(x)], kTight);
      }
    }
  }
}

TEST(Tomography, ReadLayerOutOfRange) {
  const MeshSpec spec = MeshSpec::light_cone();
  EXPECT_THROW(build_tomography_program(spec, build_symmetric_qw(spec), 0), std::out_of_range);
  EXPECT_THROW(build_tomography_program(spec, build_symmetric_qw(spec), 8), std::out_of_range);
}

}  // namespace
}  // namespace qwalk

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

// Per-realization random streams.
//
// Every realization owns a generator seeded from a hash of
// (master_seed, level_index, realization_index), so any subset of
// realizations can be drawn in any order, on any worker, with the same
// result.

#include <cstdint>
#include <random>

namespace qwalk {

inline constexpr const char* kGeneratorIdentity =
    "mt19937_64; seed = splitmix64 chain over (master_seed, level_index, "
    "realization_index); uniform = (draw >> 11) * 2^-53";

struct SeedProvenance {
  std::uint64_t master_seed = 0;
  std::uint64_t level_index = 0;
  std::uint64_t realization_index = 0;

  friend bool operator==(const SeedProvenance&, const SeedProvenance&) = default;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(const SeedProvenance& p) {
  return mix64(mix64(mix64(p.master_seed) ^ p.level_index) ^ p.realization_index);
}

/// Generator plus a platform-independent uniform draw (the standard
/// distributions are implementation-defined).
class RealizationStream {
 public:
  explicit RealizationStream(const SeedProvenance& p) : engine_(derive_seed(p)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qwalk

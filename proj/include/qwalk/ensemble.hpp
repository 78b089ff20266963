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

// Disorder ensembles.
//
// Realizations are grouped into fixed-size chunks. Each chunk accumulates in
// realization order (Neumaier-compensated sums for the mean, Welford
// co-moments for the spread) and chunks are merged in chunk order, so the
// reduction tree depends only on N, never on how many workers ran it.

#include <qwalk/mesh.hpp>
#include <qwalk/rng.hpp>
#include <qwalk/walk_programs.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace qwalk {

inline constexpr std::size_t kRealizationChunk = 64;

struct LevelStats {
  std::size_t n = 0;
  IntensityDistribution mean;
  std::vector<double> std_error;
  /// Sample covariance of the per-realization intensities, row-major
  /// num_modes x num_modes. Zero when n == 1.
  std::vector<double> covariance;
};

namespace detail {

class IntensityAccumulator {
 public:
  explicit IntensityAccumulator(std::size_t modes)
      : modes_(modes), sum_(modes), carry_(modes), mean_(modes), comoment_(modes * modes) {}

  void add(const IntensityDistribution& x) {
    ++n_;
    for (std::size_t i = 0; i < modes_; ++i) neumaier_add(i, x[i]);
    // Welford: comoment += (x - mean_old)(x - mean_new)^T
    std::vector<double>& d = scratch_;
    d.resize(modes_);
    for (std::size_t i = 0; i < modes_; ++i) {
      d[i] = x[i] - mean_[i];
      mean_[i] += d[i] / static_cast<double>(n_);
    }
    for (std::size_t i = 0; i < modes_; ++i) {
      if (d[i] == 0.0) continue;
      for (std::size_t j = 0; j < modes_; ++j)
        comoment_[i * modes_ + j] += d[i] * (x[j] - mean_[j]);
    }
  }

  /// Chan et al. pairwise merge; `other` covers later realizations.
  void merge(const IntensityAccumulator& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    std::vector<double> delta(modes_);
    for (std::size_t i = 0; i < modes_; ++i) delta[i] = other.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < modes_; ++i)
      for (std::size_t j = 0; j < modes_; ++j)
        comoment_[i * modes_ + j] +=
            other.comoment_[i * modes_ + j] + delta[i] * delta[j] * na * nb / n;
    for (std::size_t i = 0; i < modes_; ++i) {
      mean_[i] += delta[i] * nb / n;
      neumaier_add(i, other.sum_[i]);
      neumaier_add(i, other.carry_[i]);
    }
    n_ += other.n_;
  }

  LevelStats finish() const {
    LevelStats out;
    out.n = n_;
    out.mean.resize(modes_);
    out.std_error.assign(modes_, 0.0);
    out.covariance.assign(modes_ * modes_, 0.0);
    const double n = static_cast<double>(n_);
    for (std::size_t i = 0; i < modes_; ++i) out.mean[i] = (sum_[i] + carry_[i]) / n;
    if (n_ > 1) {
      for (std::size_t k = 0; k < modes_ * modes_; ++k) out.covariance[k] = comoment_[k] / (n - 1);
      for (std::size_t i = 0; i < modes_; ++i)
        out.std_error[i] = std::sqrt(std::max(0.0, out.covariance[i * modes_ + i]) / n);
    }
    return out;
  }

 private:
  void neumaier_add(std::size_t i, double v) {
    const double t = sum_[i] + v;
    if (std::abs(sum_[i]) >= std::abs(v))
      carry_[i] += (sum_[i] - t) + v;
    else
      carry_[i] += (v - t) + sum_[i];
    sum_[i] = t;
  }

  std::size_t modes_ = 0;
  std::size_t n_ = 0;
  std::vector<double> sum_, carry_, mean_, comoment_;
  std::vector<double> scratch_;
};

/// Runs f(0..count-1) on up to `workers` threads; the first exception thrown
/// by any call is rethrown after all workers stop.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& f) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// One realization's output intensities at `read_layer`, read out through
/// wire routing when read_layer < depth.
inline IntensityDistribution realization_intensities(
    const MeshSpec& spec, const MeshProgram& program, const DisorderSpec& level,
    const SeedProvenance& provenance, int read_layer, SymmetryPolicy policy) {
  const DisorderRealization r = sample_realization(spec, level, provenance);
  MeshProgram disordered = apply_disorder(program, r, policy);
  if (read_layer < spec.depth())
    disordered = build_tomography_program(spec, std::move(disordered), read_layer);
  return intensities(propagate(spec, disordered, spec.injection_mode()));
}

struct LevelTask {
  DisorderSpec level;
  std::uint64_t level_index = 0;
  int read_layer = 0;
};

/// Ensemble statistics for several (level, read_layer) tasks sharing one
/// worker pool. Results are independent of `workers`.
inline std::vector<LevelStats> run_levels(const MeshSpec& spec, const MeshProgram& program,
                                          const std::vector<LevelTask>& tasks,
                                          std::size_t realizations,
                                          std::uint64_t master_seed,
                                          SymmetryPolicy policy, unsigned workers) {
  if (realizations < 1) throw std::invalid_argument("need at least one realization");
  validate_program(spec, program);
  for (const auto& task : tasks) spec.check_layer(task.read_layer);

  const std::size_t chunks = (realizations + kRealizationChunk - 1) / kRealizationChunk;
  const std::size_t modes = static_cast<std::size_t>(spec.num_modes());
  std::vector<detail::IntensityAccumulator> partial(tasks.size() * chunks,
                                                    detail::IntensityAccumulator(modes));
  detail::parallel_for(partial.size(), workers, [&](std::size_t item) {
    const LevelTask& task = tasks[item / chunks];
    const std::size_t chunk = item % chunks;
    const std::size_t begin = chunk * kRealizationChunk;
    const std::size_t end = std::min(realizations, begin + kRealizationChunk);
    auto& acc = partial[item];
    for (std::size_t r = begin; r < end; ++r)
      acc.add(realization_intensities(spec, program, task.level,
                                      SeedProvenance{master_seed, task.level_index, r},
                                      task.read_layer, policy));
  });

  std::vector<LevelStats> out;
  out.reserve(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    detail::IntensityAccumulator total(modes);
    for (std::size_t c = 0; c < chunks; ++c) total.merge(partial[t * chunks + c]);
    out.push_back(total.finish());
  }
  return out;
}

inline LevelStats run_level(const MeshSpec& spec, const MeshProgram& program,
                            const DisorderSpec& level, std::size_t realizations,
                            std::uint64_t master_seed, std::uint64_t level_index,
                            int read_layer, SymmetryPolicy policy = SymmetryPolicy::SameSign,
                            unsigned workers = 1) {
  return run_levels(spec, program, {LevelTask{level, level_index, read_layer}}, realizations,
                    master_seed, policy, workers)
      .front();
}

/// `count` evenly spaced points covering [0, 1]; a single point sits at 0.
inline std::vector<double> unit_axis(int count) {
  if (count < 1) throw std::invalid_argument("axis needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(count), 0.0);
  for (int i = 1; i < count; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(i) / (count - 1);
  return v;
}

/// Static-major lattice: level index = static_row * dynamic_count + dynamic_col.
inline std::vector<DisorderSpec> make_grid(const std::vector<double>& static_axis,
                                           const std::vector<double>& dynamic_axis) {
  std::vector<DisorderSpec> grid;
  grid.reserve(static_axis.size() * dynamic_axis.size());
  for (double s : static_axis)
    for (double d : dynamic_axis) grid.emplace_back(s, d);
  return grid;
}

struct SweepPlan {
  MeshSpec spec = MeshSpec::light_cone();
  std::vector<DisorderSpec> grid;
  std::size_t realizations_per_level = 1;
  std::uint64_t master_seed = 0;
  /// Empty means {depth}.
  std::vector<int> read_layers;
  SymmetryPolicy policy = SymmetryPolicy::SameSign;

  std::vector<int> effective_read_layers() const {
    return read_layers.empty() ? std::vector<int>{spec.depth()} : read_layers;
  }

  void validate() const {
    if (realizations_per_level < 1) throw std::invalid_argument("realizations_per_level must be >= 1");
    if (grid.empty()) throw std::invalid_argument("disorder grid is empty");
    for (int t : effective_read_layers()) spec.check_layer(t);
  }
};

struct LevelRecord {
  std::uint64_t level_index = 0;
  double c_tid = 0.0;
  double c_td = 0.0;
  int read_layer = 0;
  std::size_t n = 0;
  IntensityDistribution mean;
  std::vector<double> std_error;
  std::vector<double> covariance;

  friend bool operator==(const LevelRecord&, const LevelRecord&) = default;
};

struct ResultMetadata {
  std::string plan_hash;
  std::string generator = kGeneratorIdentity;
  std::optional<std::string> timestamp;
  std::size_t n = 0;

  friend bool operator==(const ResultMetadata&, const ResultMetadata&) = default;
};

struct EnsembleResult {
  SweepPlan plan;
  ResultMetadata metadata;
  /// Ordered by (level_index, read_layer).
  std::vector<LevelRecord> records;
  /// Per-level persistence failures; the levels themselves were computed.
  std::vector<std::string> errors;

  const LevelRecord* find(std::uint64_t level_index, int read_layer) const {
    for (const auto& r : records)
      if (r.level_index == level_index && r.read_layer == read_layer) return &r;
    return nullptr;
  }
};

inline LevelRecord make_record(const SweepPlan& plan, std::uint64_t level_index,
                               int read_layer, LevelStats stats) {
  const DisorderSpec& level = plan.grid.at(level_index);
  return LevelRecord{level_index, level.c_tid(), level.c_td(), read_layer, stats.n,
                     std::move(stats.mean), std::move(stats.std_error),
                     std::move(stats.covariance)};
}

}  // namespace qwalk

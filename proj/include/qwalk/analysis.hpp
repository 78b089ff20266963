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

// Metrics over ensemble means: similarity, Laplace/Gaussian fits, spread
// exponents, transport efficiency and the environment-assisted transport
// detector.

#include <qwalk/ensemble.hpp>
#include <qwalk/errors.hpp>
#include <qwalk/mesh.hpp>

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace qwalk {

namespace detail {

inline double checked_total(std::span<const double> d, const char* what) {
  double total = 0.0;
  for (double v : d) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + " has a negative or non-finite entry");
    total += v;
  }
  if (total <= 0.0) throw DegenerateInput(std::string(what) + " sums to zero");
  return total;
}

}  // namespace detail

enum class SimilarityForm {
  /// (sum_i sqrt(p_i q_i))^2 over unit-sum p, q.
  SquaredBhattacharyya,
  /// sum_i sqrt(D_i D'_i) / (sum D * sum D') on the raw inputs.
  Literal,
};

inline double similarity(std::span<const double> a, std::span<const double> b,
                         SimilarityForm form = SimilarityForm::SquaredBhattacharyya) {
  if (a.size() != b.size()) throw std::invalid_argument("similarity: length mismatch");
  const double ta = detail::checked_total(a, "first distribution");
  const double tb = detail::checked_total(b, "second distribution");
  double overlap = 0.0;
  if (form == SimilarityForm::Literal) {
    for (std::size_t i = 0; i < a.size(); ++i) overlap += std::sqrt(a[i] * b[i]);
    return overlap / (ta * tb);
  }
  for (std::size_t i = 0; i < a.size(); ++i) overlap += std::sqrt((a[i] / ta) * (b[i] / tb));
  return std::min(1.0, overlap * overlap);
}

// ---- fits ----

enum class FitFamily { Laplace, Gaussian };

inline const char* to_string(FitFamily f) { return f == FitFamily::Laplace ? "laplace" : "gaussian"; }

struct FitOptions {
  /// Fix the amplitude so the model sums to one over the modes.
  bool unit_area = false;
  /// Hold the location at this value (e.g. the mirror axis, 7.5).
  std::optional<double> pinned_location;
};

struct FitResult {
  FitFamily family = FitFamily::Gaussian;
  double location = 0.0;
  double scale = 1.0;
  double amplitude = 1.0;
  double residual = 0.0;
};

/// Unnormalized model shape at abscissa x.
inline double fit_kernel(FitFamily family, double x, double location, double scale) {
  const double z = (x - location) / scale;
  return family == FitFamily::Laplace ? std::exp(-std::abs(z)) : std::exp(-0.5 * z * z);
}

/// E = sum_i (D_i - model(i))^2 over abscissae 1..n.
inline double fit_residual(std::span<const double> d, FitFamily family, double amplitude,
                           double location, double scale) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = d[i] - amplitude * fit_kernel(family, static_cast<double>(i + 1), location, scale);
    e += r * r;
  }
  return e;
}

namespace detail {

struct FitProblem {
  std::span<const double> data;
  FitFamily family;
  FitOptions options;

  // Free coordinates: [log amplitude]? [location]? log scale.
  std::size_t dimension() const {
    return 1 + (options.unit_area ? 0 : 1) + (options.pinned_location ? 0 : 1);
  }

  FitResult decode(const double* p) const {
    FitResult f;
    f.family = family;
    std::size_t k = 0;
    const double log_amp = options.unit_area ? 0.0 : p[k++];
    f.location = options.pinned_location ? *options.pinned_location : p[k++];
    f.scale = std::exp(p[k]);
    if (options.unit_area) {
      double area = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i)
        area += fit_kernel(family, static_cast<double>(i + 1), f.location, f.scale);
      f.amplitude = 1.0 / area;
    } else {
      f.amplitude = std::exp(log_amp);
    }
    f.residual = fit_residual(data, family, f.amplitude, f.location, f.scale);
    return f;
  }

  std::vector<double> encode(double amplitude, double location, double scale) const {
    std::vector<double> p;
    if (!options.unit_area) p.push_back(std::log(amplitude));
    if (!options.pinned_location) p.push_back(location);
    p.push_back(std::log(scale));
    return p;
  }

  static double objective(const gsl_vector* v, void* self) {
    const auto* problem = static_cast<const FitProblem*>(self);
    const double e = problem->decode(v->data).residual;
    return std::isfinite(e) ? e : std::numeric_limits<double>::max();
  }
};

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

/// One Nelder-Mead descent from `start`; returns the best point.
inline std::vector<double> nelder_mead(FitProblem& problem, std::vector<double> start) {
  const std::size_t n = start.size();
  gsl_multimin_function fn{&FitProblem::objective, n, &problem};
  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set(step.get(), i, 0.2);
  }
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
  for (int iter = 0; iter < 20000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-12) == GSL_SUCCESS) break;
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
  return std::vector<double>(best->data, best->data + n);
}

}  // namespace detail

/// Least-squares Laplace or Gaussian fit over integer mode abscissae 1..n.
///
/// Starts from the distribution's moments (and two rescaled variants), then
/// restarts Nelder-Mead from the incumbent until E stops improving by more
/// than 1e-12.
inline FitResult fit_distribution(std::span<const double> d, FitFamily family,
                                  const FitOptions& options = {}) {
  if (d.size() < 4) throw std::invalid_argument("fit needs at least 4 modes");
  const double total = detail::checked_total(d, "fit target");
  if (std::count_if(d.begin(), d.end(), [](double v) { return v > 0.0; }) < 2)
    throw DegenerateInput("fit target is a single-mode delta");

  double mean = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) mean += static_cast<double>(i + 1) * d[i] / total;
  double spread = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - mean;
    spread += (family == FitFamily::Laplace ? std::abs(dx) : dx * dx) * d[i] / total;
  }
  if (family == FitFamily::Gaussian) spread = std::sqrt(spread);
  const double peak = *std::max_element(d.begin(), d.end());
  const double location = options.pinned_location.value_or(mean);

  detail::FitProblem problem{d, family, options};
  std::optional<FitResult> best;
  std::vector<double> best_point;
  for (double factor : {1.0, 0.5, 2.0}) {
    std::vector<double> point = problem.encode(peak, location, spread * factor);
    double previous = problem.decode(point.data()).residual;
    for (int restart = 0; restart < 50; ++restart) {
      point = detail::nelder_mead(problem, point);
      const double e = problem.decode(point.data()).residual;
      const bool settled = previous - e < 1e-12 && restart > 0;
      previous = std::min(previous, e);
      if (settled) break;
    }
    FitResult candidate = problem.decode(point.data());
    if (!best || candidate.residual < best->residual) {
      best = candidate;
      best_point = point;
    }
  }
  return *best;
}

// ---- spreading ----

/// sqrt(sum_x (x - mean)^2 p(x)) of the normalized distribution.
inline double spatial_sigma(std::span<const double> d) {
  const double total = detail::checked_total(d, "distribution");
  double mean = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) mean += static_cast<double>(i + 1) * d[i] / total;
  double var = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double dx = static_cast<double>(i + 1) - mean;
    var += dx * dx * d[i] / total;
  }
  return std::sqrt(var);
}

/// Least-squares slope of log sigma(t) against log t, where entry k of
/// `layer_means` is the distribution after layer t = k + 1. Layers with zero
/// spread are left out of the regression.
inline double spread_exponent(const std::vector<IntensityDistribution>& layer_means) {
  if (layer_means.size() < 3) throw std::invalid_argument("spread exponent needs at least 3 layers");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < layer_means.size(); ++k) {
    const double s = spatial_sigma(layer_means[k]);
    if (s <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(k + 1)));
    ys.push_back(std::log(s));
  }
  if (xs.size() < 2) throw DegenerateInput("distributions have zero spread at (nearly) every layer");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// ---- transport efficiency ----

struct EfficiencyPoint {
  std::uint64_t level_index = 0;
  double c_tid = 0.0;
  double c_td = 0.0;
  double eta = 0.0;
  double std_error = 0.0;
};

inline void check_mode_set(std::span<const int> modes, int num_modes) {
  std::set<int> seen;
  for (int m : modes) {
    if (m < 1 || m > num_modes)
      throw std::out_of_range("mode " + std::to_string(m) + " outside [1, " + std::to_string(num_modes) + "]");
    if (!seen.insert(m).second) throw std::invalid_argument("mode " + std::to_string(m) + " listed twice");
  }
}

/// Summed mean intensity over `modes` for one record. The standard error
/// uses the record's covariance when present and otherwise falls back to the
/// (conservative) sum of per-mode standard errors.
inline EfficiencyPoint efficiency(const LevelRecord& r, std::span<const int> modes) {
  check_mode_set(modes, static_cast<int>(r.mean.size()));
  EfficiencyPoint p{r.level_index, r.c_tid, r.c_td, 0.0, 0.0};
  for (int m : modes) p.eta += r.mean[static_cast<std::size_t>(m - 1)];
  const std::size_t n_modes = r.mean.size();
  if (r.covariance.size() == n_modes * n_modes && r.n > 0) {
    double var = 0.0;
    for (int i : modes)
      for (int j : modes)
        var += r.covariance[static_cast<std::size_t>(i - 1) * n_modes + static_cast<std::size_t>(j - 1)];
    p.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(r.n));
  } else {
    for (int m : modes) p.std_error += r.std_error[static_cast<std::size_t>(m - 1)];
  }
  return p;
}

/// eta for every level of `result` at `read_layer` (default: the final layer).
inline std::vector<EfficiencyPoint> transport_efficiency(const EnsembleResult& result,
                                                         std::span<const int> modes,
                                                         std::optional<int> read_layer = std::nullopt) {
  const int layer = read_layer.value_or(result.plan.spec.depth());
  std::vector<EfficiencyPoint> out;
  for (const auto& r : result.records)
    if (r.read_layer == layer) out.push_back(efficiency(r, modes));
  return out;
}

// ---- environment-assisted transport ----

inline double significance(double difference, double se_a, double se_b) {
  const double se = std::hypot(se_a, se_b);
  if (se > 0.0) return difference / se;
  if (difference == 0.0) return 0.0;
  return difference > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
}

struct EnaqtReport {
  double requested_static = 0.0;
  double static_level = 0.0;  // grid row actually used
  std::vector<int> enhance_modes;
  std::vector<int> deplete_modes;
  std::vector<EfficiencyPoint> enhance_curve;  // sorted by c_td
  std::vector<EfficiencyPoint> deplete_curve;
  double threshold = 3.0;

  // Best c_td above the baseline (lowest c_td of the slice).
  double optimum_c_td = 0.0;
  double enhance_significance = 0.0;
  double deplete_significance = 0.0;
  bool declared = false;

  // Best strictly interior c_td.
  std::optional<double> interior_optimum_c_td;
  double interior_enhance_significance = 0.0;
  double interior_deplete_significance = 0.0;
  /// Rise of the interior optimum above the lower of the two endpoint
  /// values, in combined standard errors.
  double interior_prominence = 0.0;
  bool interior_maximum = false;
};

/// Looks for transport released from localization by dynamic disorder along
/// the c_tid row nearest `static_level`: eta over `enhance_modes` must rise
/// and eta over `deplete_modes` fall, both by more than `threshold` combined
/// standard errors, between the zero-noise baseline and the enhance optimum.
inline EnaqtReport detect_enaqt(const EnsembleResult& result, double static_level,
                                std::vector<int> enhance_modes, std::vector<int> deplete_modes,
                                double threshold = 3.0) {
  const int layer = result.plan.spec.depth();
  std::optional<double> row;
  for (const auto& r : result.records)
    if (r.read_layer == layer && (!row || std::abs(r.c_tid - static_level) < std::abs(*row - static_level)))
      row = r.c_tid;
  if (!row) throw std::invalid_argument("result has no final-layer records to slice");

  EnaqtReport rep;
  rep.requested_static = static_level;
  rep.static_level = *row;
  rep.enhance_modes = std::move(enhance_modes);
  rep.deplete_modes = std::move(deplete_modes);
  rep.threshold = threshold;

  std::vector<const LevelRecord*> slice;
  for (const auto& r : result.records)
    if (r.read_layer == layer && r.c_tid == *row) slice.push_back(&r);
  std::sort(slice.begin(), slice.end(), [](auto* a, auto* b) { return a->c_td < b->c_td; });
  if (slice.size() < 2) throw std::invalid_argument("slice needs at least two dynamic-disorder levels");
  for (const auto* r : slice) {
    rep.enhance_curve.push_back(efficiency(*r, rep.enhance_modes));
    rep.deplete_curve.push_back(efficiency(*r, rep.deplete_modes));
  }

  const auto& e = rep.enhance_curve;
  const auto& d = rep.deplete_curve;
  auto rise = [&](std::size_t k) { return significance(e[k].eta - e[0].eta, e[k].std_error, e[0].std_error); };
  auto fall = [&](std::size_t k) { return significance(d[0].eta - d[k].eta, d[k].std_error, d[0].std_error); };

  std::size_t opt = 1;
  for (std::size_t k = 2; k < e.size(); ++k)
    if (e[k].eta > e[opt].eta) opt = k;
  rep.optimum_c_td = e[opt].c_td;
  rep.enhance_significance = rise(opt);
  rep.deplete_significance = fall(opt);
  rep.declared = rep.enhance_significance > threshold && rep.deplete_significance > threshold;

  if (e.size() >= 3) {
    std::size_t inner = 1;
    for (std::size_t k = 2; k + 1 < e.size(); ++k)
      if (e[k].eta > e[inner].eta) inner = k;
    const std::size_t last = e.size() - 1;
    rep.interior_optimum_c_td = e[inner].c_td;
    rep.interior_enhance_significance = rise(inner);
    rep.interior_deplete_significance = fall(inner);
    rep.interior_prominence =
        std::min(rep.interior_enhance_significance,
                 significance(e[inner].eta - e[last].eta, e[inner].std_error, e[last].std_error));
    rep.interior_maximum = rep.interior_prominence > threshold;
  }
  return rep;
}

/// Modes at distance `inner`..`outer` (inclusive) from the apex pair
/// (axis, axis + 1), on both sides.
inline std::vector<int> ring_modes(const MeshSpec& spec, int inner, int outer) {
  std::vector<int> modes;
  for (int k = outer; k >= inner; --k)
    if (spec.axis() - k >= 1) modes.push_back(spec.axis() - k);
  for (int k = inner; k <= outer; ++k)
    if (spec.axis() + 1 + k <= spec.num_modes()) modes.push_back(spec.axis() + 1 + k);
  return modes;
}

}  // namespace qwalk

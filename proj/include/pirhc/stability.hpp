// Copyright 2026 The pirhc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIRHC_STABILITY_HPP
#define PIRHC_STABILITY_HPP

#include <pirhc/rhc.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pirhc {

inline constexpr std::size_t kBootstrapResamples = 200;

/// Pointwise p-th moment curve E|X_t|^p over a set of realizations.
struct MomentCurve {
  double p = 2.0;
  std::vector<double> times;
  std::vector<double> moments;
  std::vector<double> std_errors;
};

/// Half-open range [begin, end) of grid indices.
struct FitWindow {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

struct DecayFit {
  double rate = 0.0;
  double plateau = 0.0;
};

/// Fit plus percentile bootstrap intervals (over realizations).
struct DecayFitCI {
  DecayFit fit;
  double rate_lo = 0.0;
  double rate_hi = 0.0;
  double plateau_lo = 0.0;
  double plateau_hi = 0.0;
  FitWindow transient;
  FitWindow tail;

  bool rate_ci_excludes_zero() const noexcept { return rate_lo > 0.0; }
};

/// Everything the stability experiments report for one closed-loop batch.
struct StabilityReport {
  MomentCurve curve;
  DecayFitCI decay;
  double hit_fraction = 0.0;
  double residence_fraction = 0.0;
  double m_delta = 0.0;
  double delta = 0.0;
};

/// |X_t|^p for each realization (rows) and grid point (columns).
Matrix moment_samples(std::span<const Trajectory> realizations, double p);

/// Mean of |X_t|^p with bootstrap standard errors.
MomentCurve estimate_moments(std::span<const Trajectory> realizations, double p, std::uint64_t seed = 0,
                             std::size_t resamples = kBootstrapResamples);

/// plateau = mean over `tail`; rate = -slope of the least-squares line through
/// log(max(moment - plateau, floor)) on `transient`.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> moments, FitWindow transient,
                        FitWindow tail);

/// Tail = last quarter of the grid; transient = from t = 0 until the excess
/// over the tail mean first drops below 10% of its initial value.
std::pair<FitWindow, FitWindow> choose_windows(std::span<const double> moments);

/// fit_decay_rate on the mean curve plus bootstrap CIs (2.5/97.5 percentiles)
/// from resampling rows of `samples`. Windows are chosen once on the full
/// curve and reused for every resample.
DecayFitCI fit_decay_rate_bootstrap(std::span<const double> times, const Matrix& samples, std::uint64_t seed,
                                    std::size_t resamples = kBootstrapResamples);

/// Quasi-uniform points on the sphere of radius delta; in one dimension the
/// sphere is {-delta, +delta} whatever n_sphere is.
std::vector<Vector> sphere_points(int dim, std::size_t n_sphere, double delta, std::uint64_t seed);

/// Outer estimate of m_delta: max over sphere points of v_hat + 3 stderr.
double estimate_level_set(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma, double delta,
                          std::size_t n_sphere, std::size_t rollouts, double dt2, std::uint64_t seed);

using ValueFunction = std::function<double(const Vector& x)>;

struct LevelSetStats {
  double hit_fraction = 0.0;
  double residence_fraction = 0.0;
  std::size_t post_hit_steps = 0;
};

/// Hitting: realizations with v(x_t) < level at some t <= t_limit. Residence:
/// pooled fraction of post-hit grid points with v(x_t) < level * slack.
LevelSetStats level_set_statistics(std::span<const Trajectory> realizations, const ValueFunction& v, double level,
                                   double slack, double t_limit);

struct EnvelopeCheck {
  bool holds = true;
  double worst_margin = 0.0;
  std::size_t worst_index = 0;
};

/// E|X_t|^p <= (beta e^{-rate t} |x0|^p + m_delta) / c4 + 3 stderr at every
/// grid point, with beta = c5 (1 + delta^-p).
EnvelopeCheck check_envelope(const MomentCurve& curve, double c4, double c5, double delta, double rate, double x0_norm,
                             double m_delta);

struct SandwichRow {
  Vector x;
  double v_hat = 0.0;
  double std_err = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool holds = false;
};

/// c4 |x|^p <= v_hat(x) <= c5 (1 + |x|^p), each side allowed 3 stderr.
std::vector<SandwichRow> check_value_sandwich(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                              std::span<const Vector> points, double c4, double c5,
                                              std::size_t rollouts, double dt2, std::uint64_t seed);

struct SweepRow {
  double parameter = 0.0;
  DecayFitCI decay;
  MomentCurve curve;
};

/// Closed-loop batches, one per injector, on shared seeds (common random
/// numbers across rows).
std::vector<SweepRow> robustness_sweep(const SdeModel& model, const BaseControllerFactory& make_base,
                                       std::span<const ErrorInjector> family, std::span<const double> parameters,
                                       const RhcConfig& rhc, const Vector& x0, std::size_t realizations,
                                       std::uint64_t seed, double p = 2.0);

/// One batch per hold length dt1 (dt_sim fixed), shared seeds.
std::vector<SweepRow> hold_sweep(const SdeModel& model, const BaseControllerFactory& make_base,
                                 std::span<const double> dt1_values, const RhcConfig& base_rhc, const Vector& x0,
                                 std::size_t realizations, std::uint64_t seed, double p = 2.0);

/// Consecutive rows never increase in rate beyond CI overlap.
bool rates_non_increasing(std::span<const SweepRow> rows);
/// Row 0 rate is the maximum up to CI overlap.
bool first_rate_is_max(std::span<const SweepRow> rows);
/// Consecutive rows never decrease in plateau beyond CI overlap.
bool plateaus_non_decreasing(std::span<const SweepRow> rows);

}  // namespace pirhc

#endif  // PIRHC_STABILITY_HPP

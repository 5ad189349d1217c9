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

#ifndef PIRHC_PATH_INTEGRAL_HPP
#define PIRHC_PATH_INTEGRAL_HPP

#include <pirhc/cost.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pirhc {

/// Monte Carlo settings of the path-integral controller.
struct PiConfig {
  std::size_t rollouts = 1000;
  double dt2 = 0.01;
  /// Window of the limit quotient; defaults to 10 * dt2.
  std::optional<double> r;
  double weight_floor = 0.0;

  double window() const noexcept { return r.value_or(10.0 * dt2); }
  /// Steps K = T / dt2; throws GridMismatch.
  std::size_t horizon_steps(double horizon) const;
  /// Steps in the limit window r / dt2; throws GridMismatch, or
  /// InvalidArgument unless 0 < r <= T.
  std::size_t window_steps(double horizon) const;
};

/// Self-normalized estimate of the optimal control at one state.
struct ControlEstimate {
  Vector u_hat;
  /// (sum w)^2 / sum w^2 over the surviving rollouts.
  double ess = 0.0;
  /// Self-normalized variance of u_hat itself (already divided by N).
  Matrix variance_proxy;
  std::size_t n_failed = 0;
};

/// (h^T h)^-1 h^T, or GainRankFailure when the smallest eigenvalue of h^T h is
/// below max(n, m) * eps * its largest eigenvalue.
Matrix left_inverse(const Matrix& h, const Vector& state);

/// sum_{j=1}^{R} h^-1(z_{j-1}) g(z_{j-1}) dw_j over the stored increments.
Vector noise_functional(const Trajectory& traj, const SdeModel& model, std::size_t window_steps);

/// Per-rollout outputs of a batch: path cost, noise functional (column i) and
/// a failure flag. Column layout keeps the reduction order fixed.
struct RolloutBatch {
  std::vector<double> eta;
  Matrix noise_sums;
  std::vector<std::uint8_t> failed;
};

/// Reduces a batch into u_hat = sum w_i W_i / (r sum w_i) with log-space
/// weights w_i = exp(-eta_i / gamma - max). Order is by rollout index.
ControlEstimate reduce_control(const RolloutBatch& batch, double gamma, double r, double weight_floor);

/// Fills `batch` with N rollouts from x on streams (seed, 0..N-1). Parallel
/// over rollouts with OpenMP; results are independent of the thread count.
/// `window_steps` = 0 skips the noise functional.
void simulate_rollouts(const SdeModel& model, const CostSpec& cost, const Vector& x, double dt2, std::size_t steps,
                       std::size_t window_steps, std::size_t rollouts, std::uint64_t seed, RolloutBatch& batch);

/// Monte Carlo path-integral approximation of the optimal control at x.
ControlEstimate estimate_control(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                 const Vector& x, const PiConfig& cfg, std::uint64_t seed);

namespace reference {
/// Serial estimate_control built from simulate_uncontrolled, noise_functional
/// and path_cost; kept to cross-check the fused kernel.
ControlEstimate estimate_control(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                 const Vector& x, const PiConfig& cfg, std::uint64_t seed);
}  // namespace reference

struct BiasRow {
  double dt2 = 0.0;
  double r = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;
  Vector mean_u_hat;
};

/// Mean |mean(u_hat) - u*| per configuration over `repeats` seeds derived
/// from `seed`.
std::vector<BiasRow> bias_sweep(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                const Vector& x, std::span<const PiConfig> configs, std::size_t repeats,
                                std::uint64_t seed, const Vector& oracle_control);

struct VarianceRow {
  std::size_t rollouts = 0;
  /// Trace of the sample covariance of u_hat over the repeats.
  double variance = 0.0;
  Vector mean_u_hat;
};

/// Spread of u_hat over `repeats` seeds for each rollout count in `rollouts`
/// (other settings from `cfg`).
std::vector<VarianceRow> variance_sweep(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                        const Vector& x, const PiConfig& cfg, std::span<const std::size_t> rollouts,
                                        std::size_t repeats, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace pirhc

#endif  // PIRHC_PATH_INTEGRAL_HPP

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

#include <pirhc/path_integral.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace pirhc {

std::size_t PiConfig::horizon_steps(double horizon) const {
  if (rollouts == 0) throw InvalidArgument("PiConfig: rollouts must be positive");
  const std::size_t k = checked_ratio(horizon, dt2, "PiConfig T/dt2");
  if (k == 0) throw GridMismatch("PiConfig: horizon shorter than dt2");
  return k;
}

std::size_t PiConfig::window_steps(double horizon) const {
  const double w = window();
  if (!(w > 0.0) || w > horizon * (1.0 + 1e-12)) throw InvalidArgument("PiConfig: need 0 < r <= T");
  const std::size_t steps = checked_ratio(w, dt2, "PiConfig r/dt2");
  if (steps == 0) throw GridMismatch("PiConfig: r shorter than dt2");
  return steps;
}

Matrix left_inverse(const Matrix& h, const Vector& state) {
  const Matrix normal = h.transpose() * h;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(normal, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  const double tol = static_cast<double>(std::max(h.rows(), h.cols())) * std::numeric_limits<double>::epsilon();
  if (!(largest > 0.0) || !(smallest > tol * largest)) {
    throw GainRankFailure("gain rank failure: h(x) has no left-inverse at the visited state", state);
  }
  return normal.llt().solve(h.transpose());
}

Vector noise_functional(const Trajectory& traj, const SdeModel& model, std::size_t window_steps) {
  if (window_steps > traj.noise_increments.size()) {
    throw GridMismatch("noise_functional: window longer than the stored increments");
  }
  Vector acc = Vector::Zero(model.control_dim);
  for (std::size_t j = 1; j <= window_steps; ++j) {
    const Vector& z = traj.states[j - 1];
    const Matrix hinv_g = left_inverse(model.eval_gain(z), z) * model.eval_diffusion(z);
    acc.noalias() += hinv_g * traj.noise_increments[j - 1];
  }
  return acc;
}

ControlEstimate reduce_control(const RolloutBatch& batch, double gamma, double r, double weight_floor) {
  const std::size_t n = batch.eta.size();
  const Eigen::Index m = batch.noise_sums.rows();
  ControlEstimate out;
  double max_log_weight = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.failed[i]) {
      ++out.n_failed;
      continue;
    }
    max_log_weight = std::max(max_log_weight, -batch.eta[i] / gamma);
  }
  if (out.n_failed == n) throw AllRolloutsFailed("estimate_control: all rollouts failed");
  if (!std::isfinite(max_log_weight)) throw DegenerateWeights("estimate_control: every importance weight underflows");

  std::vector<double> weights(n, 0.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  Vector numerator = Vector::Zero(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.failed[i]) continue;
    const double w = std::exp(-batch.eta[i] / gamma - max_log_weight);
    weights[i] = w;
    sum += w;
    sum_sq += w * w;
    numerator.noalias() += w * batch.noise_sums.col(static_cast<Eigen::Index>(i));
  }
  out.u_hat = numerator / (sum * r);
  out.ess = sum * sum / sum_sq;

  out.variance_proxy = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.failed[i]) continue;
    const double wn = weights[i] / sum;
    const Vector dev = batch.noise_sums.col(static_cast<Eigen::Index>(i)) / r - out.u_hat;
    out.variance_proxy.noalias() += (wn * wn) * dev * dev.transpose();
  }
  if (out.ess < weight_floor) {
    throw DegenerateWeights("estimate_control: degenerate weights, ess=" + std::to_string(out.ess) +
                            " below floor " + std::to_string(weight_floor));
  }
  return out;
}

namespace {

// Everything one worker needs to run rollouts without allocating.
struct RolloutScratch {
  explicit RolloutScratch(const SdeModel& model)
      : ws(model), z(model.state_dim), dW(model.noise_dim), w_hat(model.control_dim) {}
  StepWorkspace ws;
  Vector z;
  Vector dW;
  Vector w_hat;
};

// Mirrors simulate_uncontrolled + noise_functional + path_cost step for step,
// so the fused and reference paths consume identical draws and round the
// same way.
bool run_one(const SdeModel& model, const CostSpec& cost, const Vector& x, double dt2, double sqrt_dt2,
             std::size_t steps, std::size_t window_steps, const Matrix* constant_hinv_g, const NoiseStream& stream,
             RolloutScratch& s, double& eta) {
  NormalSource source(stream);
  s.z = x;
  s.w_hat.setZero();
  double running = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    running += cost.running_state_cost(s.z) * dt2;
    draw_increment(source, sqrt_dt2, s.dW);
    if (j < window_steps) {
      if (constant_hinv_g != nullptr) {
        s.w_hat.noalias() += (*constant_hinv_g) * s.dW;
      } else {
        const Matrix hinv_g = left_inverse(model.eval_gain(s.z), s.z) * model.eval_diffusion(s.z);
        s.w_hat.noalias() += hinv_g * s.dW;
      }
    }
    if (!s.ws.advance(s.z, nullptr, dt2, s.dW)) return false;
  }
  eta = cost.terminal_cost(s.z) + running;
  return std::isfinite(eta);
}

}  // namespace

void simulate_rollouts(const SdeModel& model, const CostSpec& cost, const Vector& x, double dt2, std::size_t steps,
                       std::size_t window_steps, std::size_t rollouts, std::uint64_t seed, RolloutBatch& batch) {
  batch.eta.assign(rollouts, 0.0);
  batch.failed.assign(rollouts, 0);
  batch.noise_sums.setZero(model.control_dim, window_steps > 0 ? static_cast<Eigen::Index>(rollouts) : 0);

  std::optional<Matrix> constant_hinv_g;
  if (window_steps > 0 && model.gain_is_constant && model.diffusion_is_constant) {
    constant_hinv_g = left_inverse(model.eval_gain(x), x) * model.eval_diffusion(x);
  }
  const Matrix* hinv_g_ptr = constant_hinv_g ? &*constant_hinv_g : nullptr;
  const double sqrt_dt2 = std::sqrt(dt2);
  const auto n = static_cast<std::int64_t>(rollouts);

  std::exception_ptr first_error;
  std::int64_t first_error_index = n;

#pragma omp parallel
  {
    RolloutScratch scratch(model);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      try {
        double eta = 0.0;
        const bool ok = run_one(model, cost, x, dt2, sqrt_dt2, steps, window_steps, hinv_g_ptr,
                                NoiseStream{seed, idx}, scratch, eta);
        batch.failed[idx] = ok ? 0 : 1;
        batch.eta[idx] = ok ? eta : std::numeric_limits<double>::quiet_NaN();
        if (window_steps > 0) batch.noise_sums.col(i) = scratch.w_hat;
      } catch (...) {
#pragma omp critical(pirhc_rollout_error)
        {
          if (i < first_error_index) {
            first_error_index = i;
            first_error = std::current_exception();
          }
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

ControlEstimate estimate_control(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                 const Vector& x, const PiConfig& cfg, std::uint64_t seed) {
  gamma.require_certified();
  const std::size_t steps = cfg.horizon_steps(cost.horizon);
  const std::size_t window_steps = cfg.window_steps(cost.horizon);
  RolloutBatch batch;
  simulate_rollouts(model, cost, x, cfg.dt2, steps, window_steps, cfg.rollouts, seed, batch);
  return reduce_control(batch, gamma.gamma, static_cast<double>(window_steps) * cfg.dt2, cfg.weight_floor);
}

namespace reference {

ControlEstimate estimate_control(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                 const Vector& x, const PiConfig& cfg, std::uint64_t seed) {
  gamma.require_certified();
  const std::size_t steps = cfg.horizon_steps(cost.horizon);
  const std::size_t window_steps = cfg.window_steps(cost.horizon);
  RolloutBatch batch;
  batch.eta.assign(cfg.rollouts, 0.0);
  batch.failed.assign(cfg.rollouts, 0);
  batch.noise_sums.setZero(model.control_dim, static_cast<Eigen::Index>(cfg.rollouts));
  for (std::size_t i = 0; i < cfg.rollouts; ++i) {
    try {
      const Trajectory traj = simulate_uncontrolled(model, x, cfg.dt2, steps, NoiseStream{seed, i});
      batch.eta[i] = path_cost(traj, cost, cfg.dt2);
      batch.noise_sums.col(static_cast<Eigen::Index>(i)) = noise_functional(traj, model, window_steps);
      if (!std::isfinite(batch.eta[i])) batch.failed[i] = 1;
    } catch (const NumericalBlowUp&) {
      batch.failed[i] = 1;
      batch.eta[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return reduce_control(batch, gamma.gamma, static_cast<double>(window_steps) * cfg.dt2, cfg.weight_floor);
}

}  // namespace reference

std::vector<BiasRow> bias_sweep(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                const Vector& x, std::span<const PiConfig> configs, std::size_t repeats,
                                std::uint64_t seed, const Vector& oracle_control) {
  gamma.require_certified();
  if (repeats == 0) throw InvalidArgument("bias_sweep: need at least one repeat");
  std::vector<BiasRow> rows;
  rows.reserve(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const PiConfig& cfg = configs[c];
    std::vector<Vector> estimates;
    estimates.reserve(repeats);
    for (std::size_t k = 0; k < repeats; ++k) {
      estimates.push_back(estimate_control(model, cost, gamma, x, cfg, derive_seed(seed, {c, k})).u_hat);
    }
    Vector mean = Vector::Zero(model.control_dim);
    for (const Vector& u : estimates) mean += u;
    mean /= static_cast<double>(repeats);
    double spread = 0.0;
    for (const Vector& u : estimates) spread += (u - mean).squaredNorm();
    const double rep = static_cast<double>(repeats);
    BiasRow row;
    row.dt2 = cfg.dt2;
    row.r = static_cast<double>(cfg.window_steps(cost.horizon)) * cfg.dt2;
    row.mean_u_hat = mean;
    row.mean_error = (mean - oracle_control).norm();
    row.std_error = repeats > 1 ? std::sqrt(spread / (rep - 1.0) / rep) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<VarianceRow> variance_sweep(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                        const Vector& x, const PiConfig& cfg, std::span<const std::size_t> rollouts,
                                        std::size_t repeats, std::uint64_t seed) {
  gamma.require_certified();
  if (repeats < 2) throw InvalidArgument("variance_sweep: need at least two repeats");
  std::vector<VarianceRow> rows;
  rows.reserve(rollouts.size());
  for (std::size_t c = 0; c < rollouts.size(); ++c) {
    PiConfig row_cfg = cfg;
    row_cfg.rollouts = rollouts[c];
    std::vector<Vector> estimates;
    estimates.reserve(repeats);
    for (std::size_t k = 0; k < repeats; ++k) {
      estimates.push_back(estimate_control(model, cost, gamma, x, row_cfg, derive_seed(seed, {c, k})).u_hat);
    }
    Vector mean = Vector::Zero(model.control_dim);
    for (const Vector& u : estimates) mean += u;
    mean /= static_cast<double>(repeats);
    double spread = 0.0;
    for (const Vector& u : estimates) spread += (u - mean).squaredNorm();
    rows.push_back(VarianceRow{rollouts[c], spread / static_cast<double>(repeats - 1), mean});
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("loglog_slope: need two or more paired points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace pirhc

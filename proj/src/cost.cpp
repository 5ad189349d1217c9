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

#include <pirhc/cost.hpp>
#include <pirhc/path_integral.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pirhc {

void CostSpec::validate(int state_dim) const {
  if (!running_state_cost || !terminal_cost) throw InvalidArgument("CostSpec: running and terminal costs are required");
  if (!(horizon > 0.0)) throw InvalidArgument("CostSpec: horizon must be positive");
  if (!(growth_p >= 1.0)) throw InvalidArgument("CostSpec: growth_p must be >= 1");
  const Matrix& r = control_cost_matrix;
  if (r.rows() == 0 || r.rows() != r.cols()) throw InvalidArgument("CostSpec: R must be square and non-empty");
  if (!(r - r.transpose()).isZero(1e-12 * std::max(1.0, r.norm()))) throw InvalidArgument("CostSpec: R not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw InvalidArgument("CostSpec: R must be positive definite");
  const Vector origin = Vector::Zero(state_dim);
  if (running_state_cost(origin) != 0.0 || terminal_cost(origin) != 0.0) {
    throw InvalidArgument("CostSpec: running and terminal costs must vanish at the origin");
  }
}

double CostSpec::sandwich_violation(std::span<const Vector> points) const {
  double worst = 0.0;
  for (const Vector& x : points) {
    const double np = std::pow(x.norm(), growth_p);
    const double phi = terminal_cost(x);
    if (bound_c2) worst = std::max(worst, *bound_c2 * np - phi);
    if (bound_c3) worst = std::max(worst, phi - *bound_c3 * (1.0 + np));
  }
  return worst;
}

void GammaCoupling::require_certified() const {
  if (!certified()) {
    throw Assumption4Violated("assumption4 violated: gamma=" + std::to_string(gamma) +
                              " residual=" + std::to_string(residual_norm) + " tol=" + std::to_string(tolerance));
  }
}

GammaCoupling fit_gamma(const SdeModel& model, const CostSpec& cost, std::span<const Vector> probe_points, double tol) {
  if (probe_points.empty()) throw InvalidArgument("check_assumption4: probe set is empty");
  if (cost.control_cost_matrix.rows() != model.control_dim) {
    throw InvalidArgument("check_assumption4: R does not match the control dimension");
  }
  const Matrix r_inv = cost.control_cost_matrix.inverse();
  std::vector<Matrix> lhs;
  std::vector<Matrix> rhs;
  lhs.reserve(probe_points.size());
  rhs.reserve(probe_points.size());
  double cross = 0.0;
  double square = 0.0;
  for (const Vector& x : probe_points) {
    const Matrix h = model.eval_gain(x);
    const Matrix g = model.eval_diffusion(x);
    lhs.push_back(h * r_inv * h.transpose());
    rhs.push_back(g * g.transpose());
    cross += lhs.back().cwiseProduct(rhs.back()).sum();
    square += lhs.back().squaredNorm();
  }
  GammaCoupling out;
  out.tolerance = tol;
  out.gamma = square > 0.0 ? cross / square : 0.0;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    out.residual_norm = std::max(out.residual_norm, (out.gamma * lhs[k] - rhs[k]).norm());
  }
  return out;
}

GammaCoupling check_assumption4(const SdeModel& model, const CostSpec& cost, std::span<const Vector> probe_points,
                                double tol) {
  GammaCoupling coupling = fit_gamma(model, cost, probe_points, tol);
  coupling.require_certified();
  return coupling;
}

double path_cost(const Trajectory& traj, const CostSpec& cost, double dt) {
  if (traj.states.empty()) throw GridMismatch("path_cost: empty trajectory");
  const std::size_t steps = checked_ratio(cost.horizon, dt, "path_cost horizon/dt2");
  if (traj.states.size() != steps + 1) {
    throw GridMismatch("path_cost: trajectory has " + std::to_string(traj.states.size() - 1) + " steps, horizon needs " +
                       std::to_string(steps));
  }
  double running = 0.0;
  for (std::size_t j = 0; j < steps; ++j) running += cost.running_state_cost(traj.states[j]) * dt;
  return cost.terminal_cost(traj.states[steps]) + running;
}

ValueEstimate reduce_value(std::span<const double> eta, double gamma) {
  ValueEstimate out;
  double max_log_weight = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (double e : eta) {
    if (!std::isfinite(e)) {
      ++out.n_failed;
      continue;
    }
    ++n;
    max_log_weight = std::max(max_log_weight, -e / gamma);
  }
  if (n == 0) throw AllRolloutsFailed("estimate_value: all rollouts failed");
  if (!std::isfinite(max_log_weight)) {
    throw DegenerateWeights("estimate_value: degenerate weights; every exp(-eta/gamma) underflows, shorten the horizon");
  }
  double sum = 0.0;
  for (double e : eta) {
    if (std::isfinite(e)) sum += std::exp(-e / gamma - max_log_weight);
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double sq = 0.0;
  for (double e : eta) {
    if (std::isfinite(e)) {
      const double d = std::exp(-e / gamma - max_log_weight) - mean;
      sq += d * d;
    }
  }
  out.v_hat = -gamma * (max_log_weight + std::log(mean));
  out.std_err = n > 1 ? gamma * std::sqrt(sq / (nd - 1.0) / nd) / mean : 0.0;
  return out;
}

ValueEstimate estimate_value(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma, const Vector& x,
                             std::size_t rollouts, double dt2, std::uint64_t seed) {
  gamma.require_certified();
  if (rollouts == 0) throw InvalidArgument("estimate_value: need at least one rollout");
  const std::size_t steps = checked_ratio(cost.horizon, dt2, "estimate_value horizon/dt2");
  RolloutBatch batch;
  simulate_rollouts(model, cost, x, dt2, steps, 0, rollouts, seed, batch);
  return reduce_value(batch.eta, gamma.gamma);
}

namespace reference {

ValueEstimate estimate_value(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma, const Vector& x,
                             std::size_t rollouts, double dt2, std::uint64_t seed) {
  gamma.require_certified();
  if (rollouts == 0) throw InvalidArgument("estimate_value: need at least one rollout");
  const std::size_t steps = checked_ratio(cost.horizon, dt2, "estimate_value horizon/dt2");
  std::vector<double> eta(rollouts);
  for (std::size_t i = 0; i < rollouts; ++i) {
    try {
      const Trajectory traj = simulate_uncontrolled(model, x, dt2, steps, NoiseStream{seed, i});
      eta[i] = path_cost(traj, cost, dt2);
    } catch (const NumericalBlowUp&) {
      eta[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return reduce_value(eta, gamma.gamma);
}

}  // namespace reference

}  // namespace pirhc

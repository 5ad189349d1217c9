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

#include <pirhc/sde.hpp>

#include <cmath>

namespace pirhc {

std::size_t checked_ratio(double span, double step, const char* what) {
  if (!(step > 0.0) || !(span >= 0.0) || !std::isfinite(span) || !std::isfinite(step)) {
    throw GridMismatch(std::string(what) + ": step must be positive and span non-negative");
  }
  const double ratio = span / step;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
    throw GridMismatch(std::string(what) + ": " + std::to_string(span) + " is not an integer multiple of " +
                       std::to_string(step));
  }
  return static_cast<std::size_t>(k);
}

Vector SdeModel::eval_drift(const VectorIn& x) const {
  Vector f(state_dim);
  drift(x, f);
  return f;
}

Matrix SdeModel::eval_gain(const VectorIn& x) const {
  Matrix h(state_dim, control_dim);
  control_gain(x, h);
  return h;
}

Matrix SdeModel::eval_diffusion(const VectorIn& x) const {
  Matrix g(state_dim, noise_dim);
  diffusion(x, g);
  return g;
}

void SdeModel::validate() const {
  if (state_dim <= 0 || control_dim <= 0 || noise_dim <= 0) {
    throw InvalidArgument("SdeModel: dimensions must be positive");
  }
  if (!drift || !control_gain || !diffusion) throw InvalidArgument("SdeModel: drift, gain and diffusion are required");
}

StepWorkspace::StepWorkspace(const SdeModel& model)
    : model_(&model),
      drift_(model.state_dim),
      gain_(model.state_dim, model.control_dim),
      diffusion_(model.state_dim, model.noise_dim) {}

const Matrix& StepWorkspace::gain_at(const Vector& x) {
  if (!model_->gain_is_constant || !gain_ready_) {
    model_->control_gain(x, gain_);
    gain_ready_ = true;
  }
  return gain_;
}

const Matrix& StepWorkspace::diffusion_at(const Vector& x) {
  if (!model_->diffusion_is_constant || !diffusion_ready_) {
    model_->diffusion(x, diffusion_);
    diffusion_ready_ = true;
  }
  return diffusion_;
}

bool StepWorkspace::advance(Vector& x, const Vector* u, double dt, const Vector& dW) {
  model_->drift(x, drift_);
  if (u != nullptr) drift_.noalias() += gain_at(x) * (*u);
  const Matrix& g = diffusion_at(x);
  x += drift_ * dt;
  x.noalias() += g * dW;
  return x.allFinite();
}

Vector euler_maruyama_step(const SdeModel& model, const Vector& x, const Vector& u, double dt, const Vector& dW,
                           std::size_t step_index) {
  if (!(dt > 0.0)) throw InvalidArgument("euler_maruyama_step: dt must be positive");
  if (!x.allFinite() || !dW.allFinite() || !u.allFinite()) throw NumericalBlowUp(step_index);
  StepWorkspace ws(model);
  Vector next = x;
  if (!ws.advance(next, &u, dt, dW)) throw NumericalBlowUp(step_index);
  return next;
}

void draw_increment(NormalSource& source, double sqrt_dt, Vector& dW) {
  for (Eigen::Index k = 0; k < dW.size(); ++k) dW[k] = sqrt_dt * source.normal();
}

Trajectory simulate_uncontrolled(const SdeModel& model, const Vector& x0, double dt, std::size_t steps,
                                 const NoiseStream& stream) {
  if (!(dt > 0.0)) throw InvalidArgument("simulate_uncontrolled: dt must be positive");
  if (!x0.allFinite()) throw NumericalBlowUp(0);
  StepWorkspace ws(model);
  NormalSource source(stream);
  const double sqrt_dt = std::sqrt(dt);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.noise_increments.reserve(steps);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  Vector x = x0;
  Vector dW(model.noise_dim);
  for (std::size_t j = 0; j < steps; ++j) {
    draw_increment(source, sqrt_dt, dW);
    if (!ws.advance(x, nullptr, dt, dW)) throw NumericalBlowUp(j + 1);
    traj.times.push_back(static_cast<double>(j + 1) * dt);
    traj.states.push_back(x);
    traj.noise_increments.push_back(dW);
  }
  return traj;
}

Trajectory simulate_controlled(const SdeModel& model, const Vector& x0, const ControlLaw& controller, double dt,
                               double t_end, const NoiseStream& stream) {
  if (!(dt > 0.0)) throw InvalidArgument("simulate_controlled: dt must be positive");
  const std::size_t steps = checked_ratio(t_end, dt, "simulate_controlled t_end/dt");
  if (!x0.allFinite()) throw NumericalBlowUp(0);
  StepWorkspace ws(model);
  NormalSource source(stream);
  const double sqrt_dt = std::sqrt(dt);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.noise_increments.reserve(steps);
  traj.controls.reserve(steps);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  Vector x = x0;
  Vector dW(model.noise_dim);
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * dt;
    Vector u = controller(t, x);
    if (u.size() != model.control_dim) throw InvalidArgument("simulate_controlled: controller returned wrong size");
    if (!u.allFinite()) throw NumericalBlowUp(j);
    draw_increment(source, sqrt_dt, dW);
    if (!ws.advance(x, &u, dt, dW)) throw NumericalBlowUp(j + 1);
    traj.times.push_back(static_cast<double>(j + 1) * dt);
    traj.states.push_back(x);
    traj.noise_increments.push_back(dW);
    traj.controls.push_back(std::move(u));
  }
  return traj;
}

}  // namespace pirhc

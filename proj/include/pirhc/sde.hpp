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

#ifndef PIRHC_SDE_HPP
#define PIRHC_SDE_HPP

#include <pirhc/common.hpp>
#include <pirhc/random.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace pirhc {

/// Control-affine Ito SDE  dX = f(X) dt + h(X) u dt + g(X) dW.
///
/// The maps write into caller-owned buffers so that inner loops never
/// allocate. `gain_is_constant` / `diffusion_is_constant` let kernels
/// evaluate h and g once per rollout instead of once per step.
struct SdeModel {
  int state_dim = 1;
  int control_dim = 1;
  int noise_dim = 1;
  std::function<void(const VectorIn& x, VectorOut f)> drift;
  std::function<void(const VectorIn& x, MatrixOut h)> control_gain;
  std::function<void(const VectorIn& x, MatrixOut g)> diffusion;
  bool gain_is_constant = false;
  bool diffusion_is_constant = false;
  std::optional<double> lipschitz_c1;

  Vector eval_drift(const VectorIn& x) const;
  Matrix eval_gain(const VectorIn& x) const;
  Matrix eval_diffusion(const VectorIn& x) const;

  /// Throws InvalidArgument if the dimensions are non-positive or a map is
  /// missing.
  void validate() const;
};

/// Sampled path on a uniform grid. `noise_increments[j]` drives the step from
/// `states[j]` to `states[j + 1]`; `controls[j]` is the control applied on that
/// step (empty for uncontrolled paths).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> noise_increments;
  std::vector<Vector> controls;

  std::size_t steps() const noexcept { return noise_increments.size(); }
};

/// (time, state) -> control.
using ControlLaw = std::function<Vector(double t, const Vector& x)>;

/// Preallocated buffers for repeated stepping of one model.
class StepWorkspace {
 public:
  explicit StepWorkspace(const SdeModel& model);

  /// x <- x + (f(x) + h(x) u) dt + g(x) dW, in place. Returns false if the
  /// new state is not finite. The caller passes u = nullptr for u = 0.
  bool advance(Vector& x, const Vector* u, double dt, const Vector& dW);

  const Matrix& gain_at(const Vector& x);
  const Matrix& diffusion_at(const Vector& x);

 private:
  const SdeModel* model_;
  Vector drift_;
  Matrix gain_;
  Matrix diffusion_;
  bool gain_ready_ = false;
  bool diffusion_ready_ = false;
};

/// One explicit Euler-Maruyama step; throws NumericalBlowUp(step_index) on a
/// non-finite input or result.
Vector euler_maruyama_step(const SdeModel& model, const Vector& x, const Vector& u, double dt, const Vector& dW,
                           std::size_t step_index = 0);

/// Draws a Brownian increment of length dt (d components) from `source`.
void draw_increment(NormalSource& source, double sqrt_dt, Vector& dW);

/// K steps of the uncontrolled process from x0 with step dt, storing the
/// increments consumed from `stream`.
Trajectory simulate_uncontrolled(const SdeModel& model, const Vector& x0, double dt, std::size_t steps,
                                 const NoiseStream& stream);

/// Closed-loop path on [0, t_end]; the controller is queried at every step
/// with (j * dt, x_j).
Trajectory simulate_controlled(const SdeModel& model, const Vector& x0, const ControlLaw& controller, double dt,
                               double t_end, const NoiseStream& stream);

}  // namespace pirhc

#endif  // PIRHC_SDE_HPP

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

#ifndef PIRHC_COST_HPP
#define PIRHC_COST_HPP

#include <pirhc/sde.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

namespace pirhc {

/// Finite-horizon cost  phi(X_T) + int_0^T (1/2 u'Ru + l(X_s)) ds.
struct CostSpec {
  std::function<double(const VectorIn& x)> running_state_cost;
  std::function<double(const VectorIn& x)> terminal_cost;
  Matrix control_cost_matrix;
  double horizon = 1.0;
  double growth_p = 2.0;
  std::optional<double> bound_c2;
  std::optional<double> bound_c3;

  /// Checks R symmetric positive definite, T > 0, p >= 1, l(0) = phi(0) = 0.
  void validate(int state_dim) const;

  /// Largest violation of c2|x|^p <= phi(x) <= c3(1 + |x|^p) over `points`
  /// (0 when satisfied or when the bounds are unknown).
  double sandwich_violation(std::span<const Vector> points) const;
};

/// Fitted gamma of gamma h R^-1 h^T = g g^T with its worst residual over the
/// probe set. `certified()` is the validity gate of the path-integral method.
struct GammaCoupling {
  double gamma = 1.0;
  double residual_norm = 0.0;
  double tolerance = 0.0;

  bool certified() const noexcept { return gamma > 0.0 && std::isfinite(gamma) && residual_norm <= tolerance; }
  void require_certified() const;
};

/// Least-squares gamma over the probe points (Frobenius norm); never throws on
/// a bad fit, the result simply is not certified.
GammaCoupling fit_gamma(const SdeModel& model, const CostSpec& cost, std::span<const Vector> probe_points, double tol);

/// fit_gamma followed by require_certified().
GammaCoupling check_assumption4(const SdeModel& model, const CostSpec& cost, std::span<const Vector> probe_points,
                                double tol);

/// eta = phi(z_K) + sum_{j=0}^{K-1} l(z_j) dt, left-endpoint quadrature.
double path_cost(const Trajectory& traj, const CostSpec& cost, double dt);

struct ValueEstimate {
  double v_hat = 0.0;
  double std_err = 0.0;
  std::size_t n_failed = 0;
};

/// Log-sum-exp reduction of costs eta_i into -gamma log(mean exp(-eta_i/gamma))
/// with a delta-method standard error. Non-finite eta entries are treated as
/// failed rollouts and skipped.
ValueEstimate reduce_value(std::span<const double> eta, double gamma);

/// Feynman-Kac estimate v(x) = -gamma log E[exp(-eta/gamma)] from N
/// uncontrolled rollouts on streams (seed, 0..N-1). OpenMP over rollouts.
ValueEstimate estimate_value(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma, const Vector& x,
                             std::size_t rollouts, double dt2, std::uint64_t seed);

namespace reference {
/// Serial estimate_value built from simulate_uncontrolled + path_cost.
ValueEstimate estimate_value(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma, const Vector& x,
                             std::size_t rollouts, double dt2, std::uint64_t seed);
}  // namespace reference

}  // namespace pirhc

#endif  // PIRHC_COST_HPP

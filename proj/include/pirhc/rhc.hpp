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

#ifndef PIRHC_RHC_HPP
#define PIRHC_RHC_HPP

#include <pirhc/lq_oracle.hpp>
#include <pirhc/path_integral.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pirhc {

/// Sample-and-hold timing: the control is recomputed every dt1 seconds and
/// the plant is integrated with dt_sim.
struct RhcConfig {
  double dt1 = 0.05;
  double dt_sim = 0.01;
  double t_end = 10.0;

  std::size_t steps_per_window() const;
  std::size_t windows() const;
};

enum class InjectorKind { none, deterministic, gaussian, mixed };
enum class DirectionMode { against_nominal, fixed, random_per_call };

std::string to_string(InjectorKind kind);
InjectorKind injector_kind_from_string(const std::string& name);

/// Perturbs a computed control to emulate the controller-error classes:
/// bounded deterministic offsets, zero-mean Gaussian errors, or both.
struct ErrorInjector {
  InjectorKind kind = InjectorKind::none;
  /// Deterministic bound, or bound on the mean for the mixed kind.
  double epsilon = 0.0;
  /// Bound on the spectral norm of the Gaussian covariance.
  double sigma_scale = 0.0;
  DirectionMode direction_mode = DirectionMode::against_nominal;
  Vector fixed_direction;
  /// Defaults to sigma_scale * I.
  std::optional<Matrix> covariance;

  void validate(int control_dim) const;
  Matrix effective_covariance(int control_dim) const;
  Vector apply(const Vector& nominal, NormalSource& rng) const;
};

/// Nominal control at the start of sample-and-hold window k, in the shape
/// the path-integral estimator reports it.
using BaseController = std::function<ControlEstimate(std::size_t window, const Vector& x)>;

/// u*(x) = -Kx from the Riccati oracle. Reports ess = 1 and no failures.
BaseController oracle_controller(const LqOracle& oracle);

/// Path-integral estimator re-run at every window with rollout streams
/// derived from (seed, realization, window), disjoint from the plant noise.
BaseController path_integral_controller(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                        const PiConfig& cfg, std::uint64_t seed, std::size_t realization);

/// Replays base(t_k, x(t_k)) on every query inside [t_k, t_k + dt1).
ControlLaw hold_wrap(ControlLaw base, double dt1);

struct ControlRecord {
  double t = 0.0;
  Vector nominal;
  Vector applied;
  double ess = 0.0;
  std::size_t n_failed = 0;
};

struct RhcRun {
  Trajectory trajectory;
  std::vector<ControlRecord> log;
};

/// Plant noise stream of a closed-loop realization.
NoiseStream plant_stream(std::uint64_t seed, std::size_t realization);
/// Injector noise stream of a closed-loop realization.
NoiseStream injector_stream(std::uint64_t seed, std::size_t realization);

/// One closed-loop receding-horizon realization.
RhcRun run_rhc(const SdeModel& model, const BaseController& base, const ErrorInjector& injector, const RhcConfig& rhc,
               const Vector& x0, std::uint64_t seed, std::size_t realization = 0);

using BaseControllerFactory = std::function<BaseController(std::size_t realization)>;

/// M independent realizations, OpenMP-parallel over realizations.
std::vector<RhcRun> run_realizations(const SdeModel& model, const BaseControllerFactory& make_base,
                                     const ErrorInjector& injector, const RhcConfig& rhc, const Vector& x0,
                                     std::uint64_t seed, std::size_t realizations);

namespace reference {
std::vector<RhcRun> run_realizations(const SdeModel& model, const BaseControllerFactory& make_base,
                                     const ErrorInjector& injector, const RhcConfig& rhc, const Vector& x0,
                                     std::uint64_t seed, std::size_t realizations);
}  // namespace reference

}  // namespace pirhc

#endif  // PIRHC_RHC_HPP

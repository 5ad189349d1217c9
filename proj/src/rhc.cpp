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

#include <pirhc/rhc.hpp>

#include <cmath>
#include <exception>
#include <memory>

namespace pirhc {

namespace {
constexpr std::uint64_t kPlantTag = 0x706C616E74ULL;
constexpr std::uint64_t kInjectorTag = 0x696E6A6563ULL;
constexpr std::uint64_t kControllerTag = 0x6374726CULL;

std::size_t window_index(double t, double dt1) {
  return static_cast<std::size_t>(std::floor(t / dt1 * (1.0 + 1e-12) + 1e-9));
}
}  // namespace

std::size_t RhcConfig::steps_per_window() const {
  if (!(dt_sim > 0.0) || dt_sim > dt1 * (1.0 + 1e-12)) throw InvalidArgument("RhcConfig: need 0 < dt_sim <= dt1");
  return checked_ratio(dt1, dt_sim, "RhcConfig dt1/dt_sim");
}

std::size_t RhcConfig::windows() const { return checked_ratio(t_end, dt1, "RhcConfig t_end/dt1"); }

std::string to_string(InjectorKind kind) {
  switch (kind) {
    case InjectorKind::none:
      return "none";
    case InjectorKind::deterministic:
      return "deterministic";
    case InjectorKind::gaussian:
      return "gaussian";
    case InjectorKind::mixed:
      return "mixed";
  }
  return "none";
}

InjectorKind injector_kind_from_string(const std::string& name) {
  if (name == "none") return InjectorKind::none;
  if (name == "deterministic") return InjectorKind::deterministic;
  if (name == "gaussian") return InjectorKind::gaussian;
  if (name == "mixed") return InjectorKind::mixed;
  throw InvalidArgument("unknown injector kind '" + name + "'");
}

void ErrorInjector::validate(int control_dim) const {
  if (!(epsilon >= 0.0) || !(sigma_scale >= 0.0)) throw InvalidArgument("ErrorInjector: bounds must be non-negative");
  if (direction_mode == DirectionMode::fixed) {
    if (fixed_direction.size() != control_dim || std::abs(fixed_direction.norm() - 1.0) > 1e-9) {
      throw InvalidArgument("ErrorInjector: fixed direction must be a unit vector of the control dimension");
    }
  }
  if (covariance) {
    const Matrix& c = *covariance;
    if (c.rows() != control_dim || c.cols() != control_dim) throw InvalidArgument("ErrorInjector: covariance shape");
    if (!(c - c.transpose()).isZero(1e-12)) throw InvalidArgument("ErrorInjector: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw InvalidArgument("ErrorInjector: covariance not positive definite");
    if (eig.eigenvalues().maxCoeff() > sigma_scale * (1.0 + 1e-12)) {
      throw InvalidArgument("ErrorInjector: covariance norm exceeds sigma_scale");
    }
  }
}

Matrix ErrorInjector::effective_covariance(int control_dim) const {
  if (covariance) return *covariance;
  return sigma_scale * Matrix::Identity(control_dim, control_dim);
}

Vector ErrorInjector::apply(const Vector& nominal, NormalSource& rng) const {
  const auto m = static_cast<int>(nominal.size());
  Vector out = nominal;
  const bool offset = (kind == InjectorKind::deterministic || kind == InjectorKind::mixed) && epsilon > 0.0;
  const bool noise = (kind == InjectorKind::gaussian || kind == InjectorKind::mixed) && sigma_scale > 0.0;
  if (offset) {
    Vector dir(m);
    switch (direction_mode) {
      case DirectionMode::against_nominal: {
        const double norm = nominal.norm();
        if (norm > 0.0) {
          dir = -nominal / norm;
        } else {
          dir = Vector::Unit(m, 0);
        }
        break;
      }
      case DirectionMode::fixed:
        dir = fixed_direction;
        break;
      case DirectionMode::random_per_call: {
        for (int k = 0; k < m; ++k) dir[k] = rng.normal();
        dir /= dir.norm();
        break;
      }
    }
    out += epsilon * dir;
  }
  if (noise) {
    Vector z(m);
    for (int k = 0; k < m; ++k) z[k] = rng.normal();
    const Matrix chol = effective_covariance(m).llt().matrixL();
    out += chol * z;
  }
  return out;
}

BaseController oracle_controller(const LqOracle& oracle) {
  const Matrix gain = oracle.feedback_gain();
  return [gain](std::size_t, const Vector& x) {
    ControlEstimate est;
    est.u_hat = -(gain * x);
    est.ess = 1.0;
    est.variance_proxy = Matrix::Zero(gain.rows(), gain.rows());
    return est;
  };
}

BaseController path_integral_controller(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                        const PiConfig& cfg, std::uint64_t seed, std::size_t realization) {
  gamma.require_certified();
  return [&model, &cost, gamma, cfg, seed, realization](std::size_t window, const Vector& x) {
    return estimate_control(model, cost, gamma, x, cfg, derive_seed(seed, {kControllerTag, realization, window}));
  };
}

ControlLaw hold_wrap(ControlLaw base, double dt1) {
  if (!(dt1 > 0.0)) throw InvalidArgument("hold_wrap: dt1 must be positive");
  struct Cache {
    bool valid = false;
    std::size_t window = 0;
    Vector value;
  };
  auto cache = std::make_shared<Cache>();
  return [base = std::move(base), dt1, cache](double t, const Vector& x) {
    const std::size_t k = window_index(t, dt1);
    if (!cache->valid || cache->window != k) {
      cache->value = base(static_cast<double>(k) * dt1, x);
      cache->window = k;
      cache->valid = true;
    }
    return cache->value;
  };
}

NoiseStream plant_stream(std::uint64_t seed, std::size_t realization) {
  return NoiseStream{derive_seed(seed, {kPlantTag}), realization};
}

NoiseStream injector_stream(std::uint64_t seed, std::size_t realization) {
  return NoiseStream{derive_seed(seed, {kInjectorTag}), realization};
}

RhcRun run_rhc(const SdeModel& model, const BaseController& base, const ErrorInjector& injector, const RhcConfig& rhc,
               const Vector& x0, std::uint64_t seed, std::size_t realization) {
  rhc.steps_per_window();
  rhc.windows();
  injector.validate(model.control_dim);

  RhcRun run;
  NormalSource injector_rng(injector_stream(seed, realization));
  const double dt1 = rhc.dt1;
  ControlLaw perturbed = [&](double t_k, const Vector& x) {
    const std::size_t k = window_index(t_k, dt1);
    ControlEstimate est = base(k, x);
    ControlRecord record;
    record.t = t_k;
    record.applied = injector.apply(est.u_hat, injector_rng);
    record.nominal = std::move(est.u_hat);
    record.ess = est.ess;
    record.n_failed = est.n_failed;
    run.log.push_back(record);
    return record.applied;
  };
  run.trajectory =
      simulate_controlled(model, x0, hold_wrap(perturbed, dt1), rhc.dt_sim, rhc.t_end, plant_stream(seed, realization));
  return run;
}

std::vector<RhcRun> run_realizations(const SdeModel& model, const BaseControllerFactory& make_base,
                                     const ErrorInjector& injector, const RhcConfig& rhc, const Vector& x0,
                                     std::uint64_t seed, std::size_t realizations) {
  std::vector<RhcRun> runs(realizations);
  const auto n = static_cast<std::int64_t>(realizations);
  std::exception_ptr first_error;
  std::int64_t first_index = n;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      runs[idx] = run_rhc(model, make_base(idx), injector, rhc, x0, seed, idx);
    } catch (...) {
#pragma omp critical(pirhc_realization_error)
      {
        if (i < first_index) {
          first_index = i;
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return runs;
}

namespace reference {

std::vector<RhcRun> run_realizations(const SdeModel& model, const BaseControllerFactory& make_base,
                                     const ErrorInjector& injector, const RhcConfig& rhc, const Vector& x0,
                                     std::uint64_t seed, std::size_t realizations) {
  std::vector<RhcRun> runs;
  runs.reserve(realizations);
  for (std::size_t i = 0; i < realizations; ++i) runs.push_back(run_rhc(model, make_base(i), injector, rhc, x0, seed, i));
  return runs;
}

}  // namespace reference

}  // namespace pirhc

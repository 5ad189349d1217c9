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

#include <pirhc/lq_oracle.hpp>
#include <pirhc/models.hpp>
#include <pirhc/path_integral.hpp>
#include <pirhc/sde.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace {

using namespace pirhc;

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

SdeModel scalar_model(double a, double b, double sigma) { return linear_model(m1(a), m1(b), m1(sigma)); }

TEST(EulerMaruyama, ZeroModelIsIdentity) {
  const SdeModel model = scalar_model(0.0, 0.0, 0.0);
  EXPECT_EQ(euler_maruyama_step(model, v1(3.5), v1(7.0), 0.1, v1(-2.0))[0], 3.5);
}

TEST(EulerMaruyama, OneStepArithmetic) {
  const SdeModel model = scalar_model(-1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(euler_maruyama_step(model, v1(2.0), v1(0.0), 0.1, v1(0.2))[0], 1.9);
}

TEST(EulerMaruyama, NonFiniteStateCarriesStepIndex) {
  const SdeModel model = scalar_model(-1.0, 1.0, 1.0);
  try {
    euler_maruyama_step(model, v1(1.0), v1(0.0), 0.1, v1(std::numeric_limits<double>::infinity()), 17);
    FAIL() << "expected NumericalBlowUp";
  } catch (const NumericalBlowUp& e) {
    EXPECT_EQ(e.step(), 17u);
  }
}

TEST(EulerMaruyama, BlowUpInsideSimulation) {
  SdeModel model = scalar_model(0.0, 1.0, 1.0);
  model.drift = [](const VectorIn& x, VectorOut f) { f[0] = x[0] * x[0] * 1e200; };
  EXPECT_THROW(simulate_uncontrolled(model, v1(1.0), 0.1, 10, NoiseStream{1, 0}), NumericalBlowUp);
}

TEST(SimulateUncontrolled, ZeroDynamicsStayPut) {
  const SdeModel model = scalar_model(0.0, 1.0, 0.0);
  const Trajectory t = simulate_uncontrolled(model, v1(1.25), 0.1, 20, NoiseStream{3, 4});
  ASSERT_EQ(t.states.size(), 21u);
  ASSERT_EQ(t.noise_increments.size(), 20u);
  for (const Vector& x : t.states) EXPECT_EQ(x[0], 1.25);
}

TEST(SimulateUncontrolled, ZeroStepsIsJustTheStart) {
  const Trajectory t = simulate_uncontrolled(scalar_model(-1.0, 1.0, 1.0), v1(2.0), 0.1, 0, NoiseStream{});
  ASSERT_EQ(t.states.size(), 1u);
  EXPECT_TRUE(t.noise_increments.empty());
  EXPECT_EQ(t.states[0][0], 2.0);
}

TEST(SimulateUncontrolled, ZeroDiffusionIgnoresTheStream) {
  const SdeModel model = scalar_model(-1.0, 1.0, 0.0);
  const Trajectory a = simulate_uncontrolled(model, v1(1.0), 0.01, 100, NoiseStream{1, 0});
  const Trajectory b = simulate_uncontrolled(model, v1(1.0), 0.01, 100, NoiseStream{2, 5});
  EXPECT_EQ(a.states.back()[0], b.states.back()[0]);
}

TEST(SimulateUncontrolled, ReproducibleAndIncrementsHaveVarianceDt) {
  const SdeModel model = scalar_model(-1.0, 1.0, 1.0);
  const Trajectory a = simulate_uncontrolled(model, v1(1.0), 0.02, 50, NoiseStream{11, 2});
  const Trajectory b = simulate_uncontrolled(model, v1(1.0), 0.02, 50, NoiseStream{11, 2});
  for (std::size_t j = 0; j < a.states.size(); ++j) ASSERT_EQ(a.states[j][0], b.states[j][0]);

  double sum2 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const Trajectory t = simulate_uncontrolled(model, v1(0.0), 0.02, 5, NoiseStream{12, static_cast<std::uint64_t>(i)});
    for (const Vector& dw : t.noise_increments) sum2 += dw[0] * dw[0];
  }
  const double var = sum2 / (5.0 * n);
  EXPECT_NEAR(var, 0.02, 4.0 * 0.02 * std::sqrt(2.0 / (5.0 * n)));
}

// Mean of dX = -X dt + dW at t = 1 from X0 = 1 is e^-1.
TEST(SimulateUncontrolled, OrnsteinUhlenbeckMean) {
  const SdeModel model = scalar_model(-1.0, 1.0, 1.0);
  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = simulate_uncontrolled(model, v1(1.0), 0.01, 100, NoiseStream{21, static_cast<std::uint64_t>(i)})
                         .states.back()[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  // Euler bias (1 - dt)^K - e^-1 is about -1.8e-3 at dt = 0.01; compare with
  // the discrete-scheme mean so the 3-stderr band tests the sampler alone.
  EXPECT_NEAR(mean, std::pow(0.99, 100), 3.0 * se);
  EXPECT_NEAR(mean, std::exp(-1.0), 3.0 * se + 2e-3);
}

// Variance of the OU state at T = 1 from 0 is (1 - e^-2) / 2.
TEST(SimulateUncontrolled, OrnsteinUhlenbeckVariance) {
  const SdeModel model = scalar_model(-1.0, 1.0, 1.0);
  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  double sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = simulate_uncontrolled(model, v1(0.0), 0.01, 100, NoiseStream{22, static_cast<std::uint64_t>(i)})
                         .states.back()[0];
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  const double se = std::sqrt((sum4 / n - (sum2 / n) * (sum2 / n)) / n);
  // Euler: Var = dt * sum_{k<K} (1 - dt)^{2k}.
  const double discrete = 0.01 * (1.0 - std::pow(0.99, 200)) / (1.0 - 0.99 * 0.99);
  EXPECT_NEAR(var, discrete, 3.0 * se);
  EXPECT_NEAR(var, (1.0 - std::exp(-2.0)) / 2.0, 3.0 * se + 3e-3);
}

// Weak order one: |E X_T - x0 e^-T| shrinks linearly in dt. X0 = 10 keeps
// the bias well above the Monte Carlo error at N = 1e6.
TEST(SimulateUncontrolled, WeakConvergenceSlope) {
  const SdeModel model = scalar_model(-1.0, 1.0, 1.0);
  CostSpec identity;
  identity.running_state_cost = [](const VectorIn&) { return 0.0; };
  identity.terminal_cost = [](const VectorIn& x) { return x[0]; };
  identity.control_cost_matrix = m1(1.0);
  const double x0 = 10.0;
  std::vector<double> dts{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errors;
  for (std::size_t k = 0; k < dts.size(); ++k) {
    RolloutBatch batch;
    const auto steps = static_cast<std::size_t>(std::lround(1.0 / dts[k]));
    simulate_rollouts(model, identity, v1(x0), dts[k], steps, 0, 1000000, derive_seed(31, {k}), batch);
    double mean = 0.0;
    for (double eta : batch.eta) mean += eta;
    mean /= static_cast<double>(batch.eta.size());
    errors.push_back(std::abs(mean - x0 * std::exp(-1.0)));
  }
  const double slope = loglog_slope(dts, errors);
  EXPECT_GE(slope, 0.7);
  EXPECT_LE(slope, 1.3);
}

TEST(SimulateControlled, ZeroControllerMatchesUncontrolled) {
  const SdeModel model = scalar_model(-0.5, 1.0, 0.7);
  const NoiseStream stream{5, 9};
  const Trajectory a = simulate_uncontrolled(model, v1(1.0), 0.01, 300, stream);
  const Trajectory b =
      simulate_controlled(model, v1(1.0), [](double, const Vector&) { return v1(0.0); }, 0.01, 3.0, stream);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t j = 0; j < a.states.size(); ++j) ASSERT_EQ(a.states[j][0], b.states[j][0]);
  EXPECT_EQ(b.controls.size(), 300u);
}

TEST(SimulateControlled, DeterministicLinearFeedback) {
  const SdeModel model = scalar_model(0.0, 1.0, 0.0);
  const Trajectory t =
      simulate_controlled(model, v1(1.0), [](double, const Vector& x) { return Vector(-x); }, 1e-4, 2.0, {});
  for (std::size_t j = 0; j < t.states.size(); j += 2000) {
    EXPECT_NEAR(t.states[j][0], std::exp(-t.times[j]), 1e-4);
  }
}

TEST(SimulateControlled, GridMustDivide) {
  const SdeModel model = scalar_model(0.0, 1.0, 1.0);
  EXPECT_THROW(simulate_controlled(model, v1(1.0), [](double, const Vector&) { return v1(0.0); }, 0.03, 1.0, {}),
               GridMismatch);
}

// E|X_t|^2 under the exact Riccati feedback falls below twice its
// stationary value 1 / (2 P0) by t = 5 / lambda, lambda = 2 P0.
TEST(SimulateControlled, RiccatiFeedbackReachesStationaryBand) {
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 1e-3);
  const SdeModel model = o.model();
  const double lambda = o.second_moment_rate();
  const double t_end = 0.01 * std::ceil(5.0 / lambda / 0.01);
  const int n = 2000;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Trajectory t = simulate_controlled(
        model, v1(3.0), [&o](double, const Vector& x) { return o.control(x); }, 0.01, t_end,
        NoiseStream{41, static_cast<std::uint64_t>(i)});
    sum2 += t.states.back().squaredNorm();
  }
  EXPECT_LT(sum2 / n, 2.0 * (1.0 / (2.0 * o.P0()(0, 0))));
}

}  // namespace

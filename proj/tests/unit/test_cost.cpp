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
#include <pirhc/lq_oracle.hpp>
#include <pirhc/models.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace {

using namespace pirhc;

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

CostSpec constant_cost(double running, double terminal, double horizon) {
  CostSpec c;
  c.running_state_cost = [running](const VectorIn&) { return running; };
  c.terminal_cost = [terminal](const VectorIn&) { return terminal; };
  c.control_cost_matrix = m1(1.0);
  c.horizon = horizon;
  return c;
}

const std::vector<Vector> kProbes{v1(-1.0), v1(0.0), v1(2.0)};

TEST(Assumption4, ScalarGammaIsRSigmaSquared) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(0.7));
  const CostSpec cost = quadratic_cost(m1(1.0), m1(0.0), m1(3.0), 1.0);
  const GammaCoupling g = check_assumption4(model, cost, kProbes, 1e-12);
  EXPECT_NEAR(g.gamma, 3.0 * 0.49, 1e-12);
  EXPECT_NEAR(g.residual_norm, 0.0, 1e-12);
  EXPECT_TRUE(g.certified());
}

TEST(Assumption4, SquareInvertibleGainEqualToDiffusion) {
  Matrix h(2, 2);
  h << 1.0, 0.5, -0.3, 2.0;
  const SdeModel model = linear_model(Matrix::Zero(2, 2), h, h);
  const CostSpec cost = quadratic_cost(Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Identity(2, 2), 1.0);
  const std::vector<Vector> probes{Vector::Zero(2), Vector::Ones(2)};
  const GammaCoupling g = check_assumption4(model, cost, probes, 1e-12);
  EXPECT_NEAR(g.gamma, 1.0, 1e-12);
  EXPECT_NEAR(g.residual_norm, 0.0, 1e-12);
}

TEST(Assumption4, InconsistentPairIsRejected) {
  SdeModel model = linear_model(m1(0.0), m1(1.0), m1(1.0));
  model.diffusion = [](const VectorIn& x, MatrixOut g) { g(0, 0) = 1.0 + x[0] * x[0]; };
  model.diffusion_is_constant = false;
  const CostSpec cost = quadratic_cost(m1(1.0), m1(0.0), m1(1.0), 1.0);
  const std::vector<Vector> probes{v1(0.0), v1(1.0)};
  const GammaCoupling g = fit_gamma(model, cost, probes, 1e-9);
  EXPECT_GT(g.residual_norm, 0.1);
  EXPECT_FALSE(g.certified());
  EXPECT_THROW(check_assumption4(model, cost, probes, 1e-9), Assumption4Violated);
}

TEST(Assumption4, EmptyProbeSetIsAnError) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(1.0));
  const CostSpec cost = quadratic_cost(m1(1.0), m1(0.0), m1(1.0), 1.0);
  EXPECT_THROW(fit_gamma(model, cost, {}, 1e-9), InvalidArgument);
}

TEST(CostSpec, ValidatesRAndOrigin) {
  CostSpec cost = quadratic_cost(m1(1.0), m1(1.0), m1(1.0), 1.0);
  EXPECT_NO_THROW(cost.validate(1));
  cost.control_cost_matrix = m1(-1.0);
  EXPECT_THROW(cost.validate(1), InvalidArgument);
  CostSpec shifted = constant_cost(1.0, 0.0, 1.0);
  EXPECT_THROW(shifted.validate(1), InvalidArgument);
}

TEST(CostSpec, QuadraticSandwichHolds) {
  CostSpec cost = quadratic_cost(m1(1.0), m1(0.5), m1(1.0), 1.0);
  ASSERT_TRUE(cost.bound_c2 && cost.bound_c3);
  const std::vector<Vector> pts{v1(-3.0), v1(0.1), v1(10.0)};
  EXPECT_LE(cost.sandwich_violation(pts), 0.0);
  cost.bound_c2 = 1.0;
  EXPECT_GT(cost.sandwich_violation(pts), 0.0);
}

TEST(PathCost, ZeroCostsGiveZero) {
  const SdeModel model = linear_model(m1(-1.0), m1(1.0), m1(1.0));
  const Trajectory t = simulate_uncontrolled(model, v1(1.0), 0.1, 10, {});
  EXPECT_EQ(path_cost(t, constant_cost(0.0, 0.0, 1.0), 0.1), 0.0);
}

TEST(PathCost, LeftEndpointArithmetic) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(0.0));
  const Trajectory t = simulate_uncontrolled(model, v1(0.4), 0.1, 10, {});
  EXPECT_DOUBLE_EQ(path_cost(t, constant_cost(1.0, 2.0, 1.0), 0.1), 3.0);
}

TEST(PathCost, GridMismatchIsReported) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(0.0));
  const Trajectory t = simulate_uncontrolled(model, v1(0.4), 0.1, 9, {});
  EXPECT_THROW(path_cost(t, constant_cost(1.0, 2.0, 1.0), 0.1), GridMismatch);
}

// E eta for the Euler chain of dZ = -Z ds + dW with l = z^2 / 2:
// sum_j (m_j^2 + v_j) dt / 2, m_j = (1-dt)^j, v_j = dt sum_{k<j} (1-dt)^{2k}.
TEST(PathCost, OrnsteinUhlenbeckMeanCost) {
  const SdeModel model = linear_model(m1(-1.0), m1(1.0), m1(1.0));
  const CostSpec cost = quadratic_cost(m1(1.0), m1(0.0), m1(1.0), 1.0);
  const double dt = 0.01;
  const int steps = 100;
  double discrete = 0.0;
  double v = 0.0;
  for (int j = 0; j < steps; ++j) {
    const double m = std::pow(1.0 - dt, j);
    discrete += 0.5 * (m * m + v) * dt;
    v = v * (1.0 - dt) * (1.0 - dt) + dt;
  }
  // Continuous: int_0^1 (e^{-2s} + (1 - e^{-2s}) / 2) / 2 ds.
  const double continuous = 0.5 * (0.5 * (1.0 - std::exp(-2.0)) + 0.5 - 0.25 * (1.0 - std::exp(-2.0)));

  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Trajectory t = simulate_uncontrolled(model, v1(1.0), dt, steps, NoiseStream{7, static_cast<std::uint64_t>(i)});
    const double eta = path_cost(t, cost, dt);
    sum += eta;
    sum2 += eta * eta;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, discrete, 3.0 * se);
  EXPECT_NEAR(mean, continuous, 3.0 * se + 5e-3);
}

TEST(EstimateValue, ZeroCostIsExactlyZero) {
  const SdeModel model = linear_model(m1(-1.0), m1(1.0), m1(1.0));
  const GammaCoupling gamma{1.0, 0.0, 1e-9};
  for (std::size_t n : {1, 7, 1000}) {
    EXPECT_EQ(estimate_value(model, constant_cost(0.0, 0.0, 1.0), gamma, v1(2.0), n, 0.1, 3).v_hat, 0.0);
  }
}

TEST(EstimateValue, DeterministicModelGivesThePathCost) {
  const SdeModel model = linear_model(m1(-1.0), m1(1.0), m1(0.0));
  const CostSpec cost = quadratic_cost(m1(1.0), m1(2.0), m1(1.0), 1.0);
  const GammaCoupling bypass{1.0, 0.0, 1.0};
  const double eta = path_cost(simulate_uncontrolled(model, v1(1.5), 0.01, 100, {}), cost, 0.01);
  const ValueEstimate v = estimate_value(model, cost, bypass, v1(1.5), 50, 0.01, 9);
  EXPECT_NEAR(v.v_hat, eta, 1e-12);
}

TEST(EstimateValue, RefusesUncertifiedCoupling) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(1.0));
  const CostSpec cost = quadratic_cost(m1(1.0), m1(0.0), m1(1.0), 1.0);
  EXPECT_THROW(estimate_value(model, cost, GammaCoupling{1.0, 0.5, 1e-9}, v1(1.0), 10, 0.1, 1), Assumption4Violated);
}

TEST(EstimateValue, MatchesRiccatiValue) {
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 1e-3);
  const GammaCoupling gamma = check_assumption4(o.model(), o.cost(), kProbes, 1e-12);
  const ValueEstimate v = estimate_value(o.model(), o.cost(), gamma, v1(1.0), 100000, 0.005, 17);
  const double exact = o.value(v1(1.0));
  EXPECT_LE(std::abs(v.v_hat - exact) / exact, 0.03);
}

TEST(EstimateValue, FusedKernelMatchesReference) {
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 1e-3);
  const GammaCoupling gamma{1.0, 0.0, 1e-9};
  const ValueEstimate a = estimate_value(o.model(), o.cost(), gamma, v1(0.8), 2000, 0.01, 4);
  const ValueEstimate b = reference::estimate_value(o.model(), o.cost(), gamma, v1(0.8), 2000, 0.01, 4);
  EXPECT_NEAR(a.v_hat, b.v_hat, 1e-12 * std::abs(b.v_hat));
  EXPECT_NEAR(a.std_err, b.std_err, 1e-10 * b.std_err);
}

TEST(ReduceValue, ShiftInvariance) {
  const std::vector<double> eta{0.3, 1.7, 250.0, 2.2, 0.05};
  const double c = 123.25;
  std::vector<double> shifted;
  for (double e : eta) shifted.push_back(e + c);
  const double a = reduce_value(eta, 0.8).v_hat;
  const double b = reduce_value(shifted, 0.8).v_hat;
  EXPECT_NEAR(b - a, c, 1e-12 * c);
}

TEST(ReduceValue, LargeCostsStayFinite) {
  const std::vector<double> eta{800.0, 801.0, 805.0};
  const ValueEstimate v = reduce_value(eta, 1.0);
  EXPECT_TRUE(std::isfinite(v.v_hat));
  EXPECT_GT(v.v_hat, 799.0);
  EXPECT_LT(v.v_hat, 801.0);
}

TEST(ReduceValue, FailureModes) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> failed{nan, nan};
  EXPECT_THROW(reduce_value(failed, 1.0), AllRolloutsFailed);
  const std::vector<double> huge{1e10, 2e10};
  EXPECT_THROW(reduce_value(huge, 1e-300), DegenerateWeights);
  const std::vector<double> partial{1.0, nan, 2.0};
  EXPECT_EQ(reduce_value(partial, 1.0).n_failed, 1u);
}

TEST(EstimateValue, LargerTerminalCostNeverLowersValue) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(1.0));
  const GammaCoupling gamma{1.0, 0.0, 1e-9};
  const CostSpec low = quadratic_cost(m1(1.0), m1(0.5), m1(1.0), 1.0);
  const CostSpec high = quadratic_cost(m1(1.0), m1(0.9), m1(1.0), 1.0);
  for (double x : {0.0, 0.5, 2.0}) {
    EXPECT_GE(estimate_value(model, high, gamma, v1(x), 5000, 0.01, 8).v_hat,
              estimate_value(model, low, gamma, v1(x), 5000, 0.01, 8).v_hat);
  }
}

}  // namespace

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

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>

namespace {

using namespace pirhc;

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

Trajectory manual_path(int dim, const std::vector<Vector>& increments) {
  Trajectory t;
  for (std::size_t j = 0; j <= increments.size(); ++j) {
    t.times.push_back(0.1 * static_cast<double>(j));
    t.states.push_back(Vector::Zero(dim));
  }
  t.noise_increments = increments;
  return t;
}

CostSpec zero_cost(double horizon) {
  CostSpec c;
  c.running_state_cost = [](const VectorIn&) { return 0.0; };
  c.terminal_cost = [](const VectorIn&) { return 0.0; };
  c.control_cost_matrix = m1(1.0);
  c.horizon = horizon;
  return c;
}

LqOracle scalar_oracle() {
  return solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 5e-4);
}

const GammaCoupling kUnit{1.0, 0.0, 1e-9};

TEST(NoiseFunctional, ZeroIncrementsGiveZero) {
  const SdeModel model = linear_model(m1(0.0), m1(2.0), m1(1.0));
  const Trajectory t = manual_path(1, {v1(0.0), v1(0.0), v1(0.0)});
  EXPECT_EQ(noise_functional(t, model, 3)[0], 0.0);
}

TEST(NoiseFunctional, ScalarArithmetic) {
  const SdeModel model = linear_model(m1(0.0), m1(2.0), m1(1.0));
  const Trajectory t = manual_path(1, {v1(0.1), v1(-0.3)});
  EXPECT_NEAR(noise_functional(t, model, 2)[0], -0.1, 1e-15);
}

TEST(NoiseFunctional, SquareGainEqualToDiffusionIsAPlainSum) {
  Matrix h(2, 2);
  h << 1.0, 0.5, -0.3, 2.0;
  const SdeModel model = linear_model(Matrix::Zero(2, 2), h, h);
  Vector a(2), b(2), c(2);
  a << 0.1, 0.2;
  b << -0.4, 0.05;
  c << 9.0, 9.0;
  const Trajectory t = manual_path(2, {a, b, c});
  const Vector w = noise_functional(t, model, 2);
  EXPECT_NEAR(w[0], -0.3, 1e-12);
  EXPECT_NEAR(w[1], 0.25, 1e-12);
}

TEST(NoiseFunctional, WindowLongerThanPathIsRejected) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(1.0));
  const Trajectory t = manual_path(1, {v1(0.1)});
  EXPECT_ANY_THROW(noise_functional(t, model, 2));
}

TEST(LeftInverse, RankDeficientGainReportsTheState) {
  Matrix h(2, 2);
  h << 1.0, 2.0, 2.0, 4.0;
  try {
    left_inverse(h, Vector::Ones(2));
    FAIL() << "expected GainRankFailure";
  } catch (const GainRankFailure& e) {
    EXPECT_EQ(e.state(), Vector::Ones(2));
  }
  Matrix tall(3, 1);
  tall << 1.0, 2.0, 2.0;
  EXPECT_NEAR((left_inverse(tall, Vector::Zero(3)) * tall)(0, 0), 1.0, 1e-14);
}

TEST(PiConfig, GridChecks) {
  PiConfig cfg;
  cfg.dt2 = 0.01;
  EXPECT_EQ(cfg.horizon_steps(1.0), 100u);
  EXPECT_NEAR(cfg.window(), 0.1, 1e-15);
  EXPECT_EQ(cfg.window_steps(1.0), 10u);
  cfg.dt2 = 0.03;
  EXPECT_THROW(cfg.horizon_steps(1.0), GridMismatch);
  cfg.dt2 = 0.01;
  cfg.r = 2.0;
  EXPECT_THROW(cfg.window_steps(1.0), InvalidArgument);
  cfg.r = 0.015;
  EXPECT_THROW(cfg.window_steps(1.0), GridMismatch);
}

TEST(EstimateControl, UniformWeightsAreCenteredNoise) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(1.0));
  PiConfig cfg{2000, 0.01, 0.1, 0.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ControlEstimate u = estimate_control(model, zero_cost(1.0), kUnit, v1(0.7), cfg, seed);
    EXPECT_LE(std::abs(u.u_hat[0]), 4.0 * std::sqrt(u.variance_proxy.trace()));
    EXPECT_NEAR(u.ess, 2000.0, 1e-6);
  }
}

TEST(EstimateControl, SingleRolloutIsItsOwnNoiseQuotient) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{1, 0.01, 0.05, 0.0};
  const ControlEstimate u = estimate_control(o.model(), o.cost(), kUnit, v1(1.3), cfg, 21);
  const Trajectory t = simulate_uncontrolled(o.model(), v1(1.3), 0.01, 100, NoiseStream{21, 0});
  EXPECT_NEAR(u.u_hat[0], noise_functional(t, o.model(), 5)[0] / 0.05, 1e-12);
  EXPECT_EQ(u.ess, 1.0);
}

TEST(EstimateControl, MatchesRiccatiControl) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{100000, 0.005, 0.05, 0.0};
  const double exact = o.control(v1(1.0))[0];
  EXPECT_NEAR(exact, -o.P0()(0, 0), 1e-12);
  const ControlEstimate u = estimate_control(o.model(), o.cost(), kUnit, v1(1.0), cfg, 31);
  EXPECT_LE(std::abs(u.u_hat[0] - exact) / std::abs(exact), 0.05);
}

TEST(EstimateControl, TerminalShiftLeavesControlUnchanged) {
  const LqOracle o = scalar_oracle();
  CostSpec shifted = o.cost();
  const auto phi = shifted.terminal_cost;
  shifted.terminal_cost = [phi](const VectorIn& x) { return phi(x) + 3.5; };
  PiConfig cfg{5000, 0.01, 0.1, 0.0};
  const double a = estimate_control(o.model(), o.cost(), kUnit, v1(1.0), cfg, 5).u_hat[0];
  const double b = estimate_control(o.model(), shifted, kUnit, v1(1.0), cfg, 5).u_hat[0];
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(EstimateControl, DisjointSeedsAgreeWithinProxy) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{20000, 0.01, 0.1, 0.0};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ControlEstimate a = estimate_control(o.model(), o.cost(), kUnit, v1(1.0), cfg, 100 + 2 * s);
    const ControlEstimate b = estimate_control(o.model(), o.cost(), kUnit, v1(1.0), cfg, 101 + 2 * s);
    const double z = (a.u_hat[0] - b.u_hat[0]) / std::sqrt(a.variance_proxy(0, 0) + b.variance_proxy(0, 0));
    EXPECT_LE(std::abs(z), 4.0);
  }
}

TEST(EstimateControl, BitIdenticalAcrossThreadCountsAndReference) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{3001, 0.01, 0.1, 0.0};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const ControlEstimate one = estimate_control(o.model(), o.cost(), kUnit, v1(0.9), cfg, 77);
  for (int threads : {2, 3}) {
    omp_set_num_threads(threads);
    const ControlEstimate many = estimate_control(o.model(), o.cost(), kUnit, v1(0.9), cfg, 77);
    EXPECT_EQ(one.u_hat, many.u_hat);
    EXPECT_EQ(one.ess, many.ess);
  }
  omp_set_num_threads(saved);
  const ControlEstimate ref = reference::estimate_control(o.model(), o.cost(), kUnit, v1(0.9), cfg, 77);
  EXPECT_NEAR(one.u_hat[0], ref.u_hat[0], 1e-12 * std::abs(ref.u_hat[0]));
  EXPECT_NEAR(one.ess, ref.ess, 1e-9 * ref.ess);
}

TEST(EstimateControl, WeightFloorRaisesDegenerateWeights) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{200, 0.01, 0.1, 1e9};
  EXPECT_THROW(estimate_control(o.model(), o.cost(), kUnit, v1(1.0), cfg, 1), DegenerateWeights);
}

TEST(EstimateControl, RankDeficientGainFails) {
  SdeModel model = linear_model(m1(0.0), m1(0.0), m1(1.0));
  PiConfig cfg{10, 0.01, 0.1, 0.0};
  EXPECT_THROW(estimate_control(model, zero_cost(1.0), kUnit, v1(1.0), cfg, 1), GainRankFailure);
}

TEST(EstimateControl, UncertifiedCouplingIsRejected) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{10, 0.01, 0.1, 0.0};
  EXPECT_THROW(estimate_control(o.model(), o.cost(), GammaCoupling{1.0, 1.0, 1e-9}, v1(1.0), cfg, 1),
               Assumption4Violated);
}

TEST(BiasSweep, DegenerateDiffusionFailsTheGate) {
  const SdeModel model = linear_model(m1(0.0), m1(1.0), m1(0.0));
  const CostSpec cost = quadratic_cost(m1(1.0), m1(0.5), m1(1.0), 1.0);
  const std::vector<Vector> probes{v1(0.0), v1(1.0)};
  EXPECT_THROW(check_assumption4(model, cost, probes, 1e-9), Assumption4Violated);
}

TEST(BiasSweep, FinestStepHasTheSmallestError) {
  const LqOracle o = scalar_oracle();
  const std::vector<PiConfig> cfgs{{20000, 0.1, 0.4, 0.0}, {20000, 0.01, 0.04, 0.0}};
  const std::vector<BiasRow> rows =
      bias_sweep(o.model(), o.cost(), kUnit, v1(1.0), cfgs, 4, 3, o.control(v1(1.0)));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].dt2, 0.1);
  EXPECT_EQ(rows[1].r, 0.04);
  EXPECT_LT(rows[1].mean_error, rows[0].mean_error);
}

TEST(VarianceSweep, VarianceShrinksWithRollouts) {
  const LqOracle o = scalar_oracle();
  PiConfig cfg{0, 0.02, 0.1, 0.0};
  const std::vector<std::size_t> ns{200, 2000};
  const std::vector<VarianceRow> rows = variance_sweep(o.model(), o.cost(), kUnit, v1(1.0), cfg, ns, 20, 4);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].rollouts, 2000u);
  EXPECT_GT(rows[0].variance, 3.0 * rows[1].variance);
  EXPECT_THROW(variance_sweep(o.model(), o.cost(), kUnit, v1(1.0), cfg, ns, 1, 4), InvalidArgument);
}

TEST(LogLogSlope, RecoversPowerLaw) {
  const std::vector<double> x{1e3, 1e4, 1e5};
  const std::vector<double> y{2e-3, 2e-4, 2e-5};
  EXPECT_NEAR(loglog_slope(x, y), -1.0, 1e-12);
  const std::vector<double> y2{1.0, 100.0, 1e4};
  EXPECT_NEAR(loglog_slope(x, y2), 2.0, 1e-12);
}

}  // namespace

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

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace pirhc;

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
Vector v1(double v) { return Vector::Constant(1, v); }

// Scalar Riccati dP/ds = P^2 / r - q with P(T) = q_T < sqrt(q r).
double closed_form_p(double s, double q, double q_t, double r, double horizon) {
  const double k = std::sqrt(q * r);
  return k * std::tanh(std::sqrt(q / r) * (horizon - s) + std::atanh(q_t / k));
}

struct ScalarCase {
  double q, q_t, r, sigma, horizon;
};

class ScalarRiccati : public ::testing::TestWithParam<ScalarCase> {};

TEST_P(ScalarRiccati, MatchesClosedForm) {
  const ScalarCase c = GetParam();
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(c.sigma), m1(c.q), m1(c.q_t), m1(c.r), c.horizon, 1e-3);
  for (int i = 0; i <= 400; ++i) {
    const double s = c.horizon * i / 400.0 + (i < 400 ? 1.7e-4 : 0.0);
    EXPECT_NEAR(o.P(s)(0, 0), closed_form_p(s, c.q, c.q_t, c.r, c.horizon), 1e-6) << "s=" << s;
  }
  EXPECT_DOUBLE_EQ(o.P(c.horizon)(0, 0), c.q_t);
  EXPECT_LE(o.residual(), 1e-5);

  // Offset c(0) = sigma^2 / 2 * int_0^T P(s) ds by composite Simpson on the closed form.
  const int n = 2000;
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * closed_form_p(c.horizon * i / n, c.q, c.q_t, c.r, c.horizon);
  }
  integral *= c.horizon / n / 3.0;
  EXPECT_NEAR(o.value_offset(), 0.5 * c.sigma * c.sigma * integral, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Cases, ScalarRiccati,
                         ::testing::Values(ScalarCase{1.0, 0.5, 1.0, 1.0, 1.0}, ScalarCase{2.0, 0.3, 0.5, 0.7, 2.0},
                                           ScalarCase{4.0, 0.0, 1.0, 1.0, 0.5}),
                         [](const ::testing::TestParamInfo<ScalarCase>& info) {
                           return "case" + std::to_string(info.index);
                         });

TEST(LqOracle, FixedPointIsConstant) {
  const double q = 2.0, r = 0.5;
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(q), m1(std::sqrt(q * r)), m1(r), 3.0, 1e-3);
  for (double s : {0.0, 0.77, 1.5, 2.999}) EXPECT_NEAR(o.P(s)(0, 0), 1.0, 1e-12);
}

TEST(LqOracle, ZeroCostsGiveZeroControl) {
  const LqOracle o = solve_riccati(m1(0.3), m1(1.0), m1(1.0), m1(0.0), m1(0.0), m1(1.0), 1.0, 1e-3);
  EXPECT_EQ(o.P0()(0, 0), 0.0);
  EXPECT_EQ(o.control(v1(5.0))[0], 0.0);
  EXPECT_EQ(o.value_offset(), 0.0);
}

TEST(LqOracle, ReferenceScalarConstants) {
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 5e-4);
  const double p0 = closed_form_p(0.0, 1.0, 0.5, 1.0, 1.0);
  EXPECT_NEAR(o.P0()(0, 0), p0, 1e-6);
  EXPECT_NEAR(o.feedback_gain()(0, 0), p0, 1e-6);
  EXPECT_NEAR(o.closed_loop_matrix()(0, 0), -p0, 1e-6);
  EXPECT_NEAR(o.second_moment_rate(), 2.0 * p0, 1e-6);
  EXPECT_NEAR(o.c4(), p0 / 2.0, 1e-6);
  // Zero control: M(0) = q T + q_T = 1.5, c0 = int_0^1 (1.5 - s) / 2 ds = 0.5.
  EXPECT_NEAR(o.zero_control_cost(v1(2.0)), 0.75 * 4.0 + 0.5, 1e-9);
  EXPECT_NEAR(o.c5_zero_control(), 0.75, 1e-9);
  EXPECT_NEAR(o.c5_from_value(), std::max(p0 / 2.0, o.value_offset()), 1e-9);
  EXPECT_LE(o.c5_from_value(), o.c5_zero_control());
  for (double x : {-3.0, -0.4, 0.0, 1.1, 5.0}) {
    EXPECT_LE(o.value(v1(x)), o.zero_control_cost(v1(x)));
    EXPECT_GE(o.value(v1(x)), o.c4() * x * x);
  }
}

TEST(LqOracle, DoubleIntegratorControlIsMinusRInverseBTransposeGradient) {
  Matrix a(2, 2), b(2, 1), s(2, 1);
  a << 0.0, 1.0, 0.0, 0.0;
  b << 0.0, 1.0;
  s << 0.0, 1.0;
  const Matrix r = m1(0.5);
  const LqOracle o = solve_riccati(a, b, s, Matrix::Identity(2, 2), Matrix::Identity(2, 2), r, 1.0, 1e-3);
  EXPECT_TRUE((o.P0() - o.P0().transpose()).isZero(1e-12));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(o.P0()).eigenvalues().minCoeff(), 0.0);
  Vector x(2);
  x << 1.5, -0.7;
  // Central differences of v as an independent gradient.
  Vector grad(2);
  for (int i = 0; i < 2; ++i) {
    Vector e = Vector::Zero(2);
    e[i] = 1e-5;
    grad[i] = (o.value(x + e) - o.value(x - e)) / 2e-5;
  }
  const Vector expected = -r.inverse() * b.transpose() * grad;
  EXPECT_NEAR(o.control(x)[0], expected[0], 1e-7);
  EXPECT_TRUE(o.value_gradient(x).isApprox(grad, 1e-7));
  EXPECT_LE(o.residual(), 1e-5);
  const Eigen::VectorXcd ev = o.closed_loop_matrix().eigenvalues();
  const double slowest = std::max(ev[0].real(), ev[1].real());
  EXPECT_LT(slowest, 0.0);
  EXPECT_NEAR(o.second_moment_rate(), -2.0 * slowest, 1e-12);
}

TEST(LqOracle, RiccatiRhsMatchesFiniteDifference) {
  const LqOracle o = solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 1e-3);
  const double s = 0.4, h = 1e-5;
  const double fd = (closed_form_p(s + h, 1, 0.5, 1, 1) - closed_form_p(s - h, 1, 0.5, 1, 1)) / (2 * h);
  EXPECT_NEAR(o.riccati_rhs(m1(closed_form_p(s, 1, 0.5, 1, 1)))(0, 0), fd, 1e-7);
}

TEST(LqOracle, RejectsBadInputs) {
  EXPECT_ANY_THROW(solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(-1.0), 1.0, 1e-3));
  EXPECT_THROW(solve_riccati(m1(0.0), m1(1.0), m1(1.0), m1(1.0), m1(0.5), m1(1.0), 1.0, 0.5, 1e-14),
               RiccatiSolveFailed);
}

TEST(LqOracle, ModelAndCostMirrorTheMatrices) {
  const LqOracle o = solve_riccati(m1(-0.2), m1(2.0), m1(0.5), m1(1.0), m1(0.5), m1(1.0), 1.0, 1e-3);
  const SdeModel model = o.model();
  EXPECT_NEAR(model.eval_drift(v1(3.0))[0], -0.6, 1e-15);
  EXPECT_EQ(model.eval_gain(v1(3.0))(0, 0), 2.0);
  EXPECT_EQ(model.eval_diffusion(v1(3.0))(0, 0), 0.5);
  const CostSpec cost = o.cost();
  EXPECT_EQ(cost.running_state_cost(v1(2.0)), 2.0);
  EXPECT_EQ(cost.terminal_cost(v1(2.0)), 1.0);
  EXPECT_EQ(cost.horizon, 1.0);
}

}  // namespace

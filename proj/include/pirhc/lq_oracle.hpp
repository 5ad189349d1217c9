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

#ifndef PIRHC_LQ_ORACLE_HPP
#define PIRHC_LQ_ORACLE_HPP

#include <pirhc/cost.hpp>

#include <vector>

namespace pirhc {

/// Linear-quadratic ground truth: dX = (AX + Bu) dt + sigma dW with
/// l = x'Qx/2, phi = x'Q_T x/2 and control cost u'Ru/2 on [0, T].
///
/// Holds the backward Riccati solution P(s) with the value offset c(s), so
/// v(s, x) = x'P(s)x/2 + c(s), and the zero-control cost-to-go
/// x'M(0)x/2 + c0 used as an explicit upper bound on v.
class LqOracle {
 public:
  Matrix A, B, sigma, Q, Q_T, R;
  double horizon = 1.0;

  /// P(s) on [0, T], cubic Hermite between grid nodes.
  Matrix P(double s) const;
  const Matrix& P0() const { return p_.front(); }
  double value_offset() const { return offset_.front(); }

  /// v(0, x) = x'P(0)x/2 + c(0).
  double value(const Vector& x) const;
  Vector value_gradient(const Vector& x) const;
  /// K = R^-1 B' P(0).
  Matrix feedback_gain() const;
  /// u*(x) = -K x, the receding-horizon optimal control.
  Vector control(const Vector& x) const;
  Matrix closed_loop_matrix() const;
  /// 2 |Re lambda_max(A - BK)|: decay rate of the second moment's transient.
  double second_moment_rate() const;

  /// c4 = lambda_min(P(0))/2, so c4 |x|^2 <= v(x).
  double c4() const;
  /// Smallest c with v(x) <= c (1 + |x|^2), read off the exact value.
  double c5_from_value() const;
  /// Same bound built from the zero-control cost-to-go, which dominates v.
  double c5_zero_control() const;
  double zero_control_cost(const Vector& x) const;

  /// Max over interior grid nodes of |central difference of P - Riccati rhs|.
  double residual() const { return residual_; }
  const std::vector<double>& grid() const { return grid_; }

  SdeModel model() const;
  CostSpec cost() const;

  /// Riccati right-hand side dP/ds = -(A'P + PA - P B R^-1 B' P + Q).
  Matrix riccati_rhs(const Matrix& p) const;

 private:
  friend LqOracle solve_riccati(const Matrix&, const Matrix&, const Matrix&, const Matrix&, const Matrix&,
                                const Matrix&, double, double, double);
  std::vector<double> grid_;
  std::vector<Matrix> p_;
  std::vector<double> offset_;
  Matrix m0_;
  double zero_control_offset_ = 0.0;
  double residual_ = 0.0;
};

/// RK4 backward from P(T) = Q_T with step <= dt. Throws RiccatiSolveFailed if
/// the residual exceeds `tol` or the solution leaves the PSD cone.
LqOracle solve_riccati(const Matrix& A, const Matrix& B, const Matrix& sigma, const Matrix& Q, const Matrix& Q_T,
                       const Matrix& R, double horizon, double dt, double tol = 1e-5);

}  // namespace pirhc

#endif  // PIRHC_LQ_ORACLE_HPP

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

#include <pirhc/models.hpp>

namespace pirhc {

double quadratic_form(const Matrix& m, const VectorIn& x) {
  const Eigen::Index n = x.size();
  if (n == 1) return m(0, 0) * x[0] * x[0];
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += m(i, j) * x[i];
    acc += col * x[j];
  }
  return acc;
}

SdeModel linear_model(const Matrix& A, const Matrix& B, const Matrix& sigma) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || sigma.rows() != A.rows()) {
    throw InvalidArgument("linear_model: inconsistent dimensions");
  }
  SdeModel model;
  model.state_dim = static_cast<int>(A.rows());
  model.control_dim = static_cast<int>(B.cols());
  model.noise_dim = static_cast<int>(sigma.cols());
  if (A.rows() == 1) {
    const double a = A(0, 0);
    model.drift = [a](const VectorIn& x, VectorOut f) { f[0] = a * x[0]; };
  } else {
    model.drift = [A](const VectorIn& x, VectorOut f) { f.noalias() = A * x; };
  }
  model.control_gain = [B](const VectorIn&, MatrixOut h) { h = B; };
  model.diffusion = [sigma](const VectorIn&, MatrixOut g) { g = sigma; };
  model.gain_is_constant = true;
  model.diffusion_is_constant = true;
  model.lipschitz_c1 = A.norm() + B.norm();
  return model;
}

CostSpec quadratic_cost(const Matrix& Q, const Matrix& Q_T, const Matrix& R, double horizon) {
  CostSpec cost;
  cost.running_state_cost = [Q](const VectorIn& x) { return 0.5 * quadratic_form(Q, x); };
  cost.terminal_cost = [Q_T](const VectorIn& x) { return 0.5 * quadratic_form(Q_T, x); };
  cost.control_cost_matrix = R;
  cost.horizon = horizon;
  cost.growth_p = 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q_T, Eigen::EigenvaluesOnly);
  const double lo = 0.5 * eig.eigenvalues().minCoeff();
  const double hi = 0.5 * eig.eigenvalues().maxCoeff();
  if (lo > 0.0) cost.bound_c2 = lo;
  if (hi > 0.0) cost.bound_c3 = hi;
  return cost;
}

SdeModel cubic_drift_model(double sigma) {
  SdeModel model;
  model.drift = [](const VectorIn& x, VectorOut f) { f[0] = -x[0] * x[0] * x[0]; };
  model.control_gain = [](const VectorIn&, MatrixOut h) { h(0, 0) = 1.0; };
  model.diffusion = [sigma](const VectorIn&, MatrixOut g) { g(0, 0) = sigma; };
  model.gain_is_constant = true;
  model.diffusion_is_constant = true;
  return model;
}

}  // namespace pirhc

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

#include <algorithm>
#include <cmath>
#include <limits>

namespace pirhc {

namespace {

// Everything integrated backward in tau = T - s.
struct BackwardState {
  Matrix p;
  double offset = 0.0;
  Matrix m;
  double zero_offset = 0.0;
};

double symmetric_min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double symmetric_max_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace

Matrix LqOracle::riccati_rhs(const Matrix& p) const {
  const Matrix pb = p * B;
  return -(A.transpose() * p + p * A - pb * R.llt().solve(pb.transpose()) + Q);
}

Matrix LqOracle::P(double s) const {
  if (s <= grid_.front()) return p_.front();
  if (s >= grid_.back()) return p_.back();
  const double h = grid_[1] - grid_[0];
  const auto k = std::min(static_cast<std::size_t>(s / h), grid_.size() - 2);
  const double t = (s - grid_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * p_[k] + h10 * h * riccati_rhs(p_[k]) + h01 * p_[k + 1] + h11 * h * riccati_rhs(p_[k + 1]);
}

double LqOracle::value(const Vector& x) const { return 0.5 * quadratic_form(P0(), x) + value_offset(); }

Vector LqOracle::value_gradient(const Vector& x) const { return P0() * x; }

Matrix LqOracle::feedback_gain() const { return R.llt().solve(B.transpose() * P0()); }

Vector LqOracle::control(const Vector& x) const { return -(feedback_gain() * x); }

Matrix LqOracle::closed_loop_matrix() const { return A - B * feedback_gain(); }

double LqOracle::second_moment_rate() const {
  const Eigen::VectorXcd eig = closed_loop_matrix().eigenvalues();
  double slowest = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.size(); ++i) slowest = std::max(slowest, eig[i].real());
  return 2.0 * std::abs(slowest);
}

double LqOracle::c4() const { return 0.5 * symmetric_min_eig(P0()); }

double LqOracle::c5_from_value() const { return std::max(0.5 * symmetric_max_eig(P0()), value_offset()); }

double LqOracle::c5_zero_control() const { return std::max(0.5 * symmetric_max_eig(m0_), zero_control_offset_); }

double LqOracle::zero_control_cost(const Vector& x) const { return 0.5 * quadratic_form(m0_, x) + zero_control_offset_; }

SdeModel LqOracle::model() const { return linear_model(A, B, sigma); }

CostSpec LqOracle::cost() const { return quadratic_cost(Q, Q_T, R, horizon); }

LqOracle solve_riccati(const Matrix& A, const Matrix& B, const Matrix& sigma, const Matrix& Q, const Matrix& Q_T,
                       const Matrix& R, double horizon, double dt, double tol) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || sigma.rows() != n || Q.rows() != n || Q.cols() != n || Q_T.rows() != n ||
      Q_T.cols() != n || R.rows() != B.cols() || R.cols() != B.cols()) {
    throw InvalidArgument("solve_riccati: inconsistent dimensions");
  }
  if (!(horizon > 0.0) || !(dt > 0.0)) throw InvalidArgument("solve_riccati: horizon and dt must be positive");
  if (!(symmetric_min_eig(R) > 0.0)) throw InvalidArgument("solve_riccati: R must be positive definite");

  LqOracle oracle;
  oracle.A = A;
  oracle.B = B;
  oracle.sigma = sigma;
  oracle.Q = Q;
  oracle.Q_T = Q_T;
  oracle.R = R;
  oracle.horizon = horizon;

  const auto steps = static_cast<std::size_t>(std::max(2.0, std::ceil(horizon / dt - 1e-9)));
  const double h = horizon / static_cast<double>(steps);
  const Matrix noise_cov = sigma * sigma.transpose();

  // d/dtau of every component, tau = T - s.
  auto deriv = [&](const BackwardState& y) {
    BackwardState d;
    d.p = -oracle.riccati_rhs(y.p);
    d.offset = 0.5 * (noise_cov * y.p).trace();
    d.m = A.transpose() * y.m + y.m * A + Q;
    d.zero_offset = 0.5 * (noise_cov * y.m).trace();
    return d;
  };
  auto axpy = [](const BackwardState& y, double a, const BackwardState& d) {
    return BackwardState{y.p + a * d.p, y.offset + a * d.offset, y.m + a * d.m, y.zero_offset + a * d.zero_offset};
  };

  std::vector<BackwardState> backward;
  backward.reserve(steps + 1);
  backward.push_back(BackwardState{Q_T, 0.0, Q_T, 0.0});
  for (std::size_t k = 0; k < steps; ++k) {
    const BackwardState& y = backward.back();
    const BackwardState k1 = deriv(y);
    const BackwardState k2 = deriv(axpy(y, 0.5 * h, k1));
    const BackwardState k3 = deriv(axpy(y, 0.5 * h, k2));
    const BackwardState k4 = deriv(axpy(y, h, k3));
    BackwardState next;
    next.p = y.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    next.p = 0.5 * (next.p + next.p.transpose()).eval();
    next.offset = y.offset + (h / 6.0) * (k1.offset + 2.0 * k2.offset + 2.0 * k3.offset + k4.offset);
    next.m = y.m + (h / 6.0) * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
    next.zero_offset =
        y.zero_offset + (h / 6.0) * (k1.zero_offset + 2.0 * k2.zero_offset + 2.0 * k3.zero_offset + k4.zero_offset);
    if (!next.p.allFinite() || !next.m.allFinite()) throw RiccatiSolveFailed("riccati solve failed: diverged");
    backward.push_back(std::move(next));
  }

  oracle.grid_.resize(steps + 1);
  oracle.p_.resize(steps + 1);
  oracle.offset_.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    oracle.grid_[k] = static_cast<double>(k) * h;
    oracle.p_[k] = backward[steps - k].p;
    oracle.offset_[k] = backward[steps - k].offset;
    const double scale = 1.0 + oracle.p_[k].norm();
    if (symmetric_min_eig(oracle.p_[k]) < -1e-9 * scale) {
      throw RiccatiSolveFailed("riccati solve failed: P(s) left the positive semidefinite cone");
    }
  }
  oracle.m0_ = backward.back().m;
  oracle.zero_control_offset_ = backward.back().zero_offset;

  double residual = 0.0;
  for (std::size_t k = 1; k < steps; ++k) {
    const Matrix fd = (oracle.p_[k + 1] - oracle.p_[k - 1]) / (2.0 * h);
    residual = std::max(residual, (fd - oracle.riccati_rhs(oracle.p_[k])).norm());
  }
  oracle.residual_ = residual;
  if (!(residual <= tol)) {
    throw RiccatiSolveFailed("riccati solve failed: residual " + std::to_string(residual) + " above tol " +
                             std::to_string(tol));
  }
  return oracle;
}

}  // namespace pirhc

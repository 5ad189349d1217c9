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

#ifndef PIRHC_COMMON_HPP
#define PIRHC_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pirhc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorOut = Eigen::Ref<Eigen::VectorXd>;
using MatrixOut = Eigen::Ref<Eigen::MatrixXd>;
using VectorIn = Eigen::Ref<const Eigen::VectorXd>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state, increment, or cost became non-finite during time stepping.
class NumericalBlowUp : public Error {
 public:
  explicit NumericalBlowUp(std::size_t step)
      : Error("numerical blow-up at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// The noise/control-cost coupling gamma h R^-1 h^T = g g^T does not hold.
class Assumption4Violated : public Error {
 public:
  using Error::Error;
};

/// Importance weights collapsed (effective sample size below the floor or
/// every log-weight non-finite).
class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

class AllRolloutsFailed : public Error {
 public:
  using Error::Error;
};

/// h(x) lost full column rank, so no left-inverse exists at the visited state.
class GainRankFailure : public Error {
 public:
  GainRankFailure(const std::string& what, Vector state) : Error(what), state_(std::move(state)) {}
  const Vector& state() const noexcept { return state_; }

 private:
  Vector state_;
};

/// A time grid is inconsistent with a horizon, window or step ratio.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

class RiccatiSolveFailed : public Error {
 public:
  using Error::Error;
};

class NoTransientDetected : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Returns the integer k with k * step == span up to a relative tolerance of
/// 1e-9, or throws GridMismatch.
std::size_t checked_ratio(double span, double step, const char* what);

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

}  // namespace pirhc

#endif  // PIRHC_COMMON_HPP

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

#ifndef PIRHC_MODELS_HPP
#define PIRHC_MODELS_HPP

#include <pirhc/cost.hpp>

namespace pirhc {

/// f(x) = Ax, h = B, g = sigma.
SdeModel linear_model(const Matrix& A, const Matrix& B, const Matrix& sigma);

/// l(x) = x'Qx/2, phi(x) = x'Q_T x/2, with sandwich constants for p = 2
/// taken from the spectrum of Q_T.
CostSpec quadratic_cost(const Matrix& Q, const Matrix& Q_T, const Matrix& R, double horizon);

/// Scalar f(x) = -x^3 with h = 1 and g = sigma.
SdeModel cubic_drift_model(double sigma);

/// x'Mx without temporaries.
double quadratic_form(const Matrix& m, const VectorIn& x);

}  // namespace pirhc

#endif  // PIRHC_MODELS_HPP

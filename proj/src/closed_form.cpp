// Copyright 2026 The detcol Authors
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

#include "detcol/closed_form.hpp"

#include <cmath>
#include <stdexcept>

namespace detcol {

void SingletParams::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("SingletParams: q must be in [0, 1]");
  }
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("SingletParams: kappa must be positive");
  }
}

StateVector singlet_state(double q) {
  Vector amps = Vector::Zero(4);
  amps(0) = Complex(q, 0.0);
  amps(1) = Complex(-std::sqrt(1.0 - q * q), 0.0);
  return StateVector(std::move(amps));
}

DensityMatrix n2_solution(const DensityMatrix& rho0, Sigma2Sign sign,
                          double kappa, double t) {
  if (rho0.dim() != 2) {
    throw std::invalid_argument("n2_solution: initial state must be 2x2");
  }
  const double decay = std::exp(-kappa * t);
  const double half = std::exp(-0.5 * kappa * t);
  const Matrix& r0 = rho0.matrix();
  Matrix m(2, 2);
  if (sign == Sigma2Sign::Positive) {
    m(0, 0) = r0(0, 0) * decay;
    m(1, 1) = 1.0 - m(0, 0);
  } else {
    m(1, 1) = r0(1, 1) * decay;
    m(0, 0) = 1.0 - m(1, 1);
  }
  m(0, 1) = r0(0, 1) * half;
  m(1, 0) = r0(1, 0) * half;
  return DensityMatrix::from_matrix(std::move(m));
}

DensityMatrix n4_singlet_solution(const SingletParams& p, double t) {
  p.validate();
  const double q2 = p.q * p.q;
  const double decay = std::exp(-p.kappa * t);
  const double off = -p.q * std::sqrt(1.0 - q2) * std::exp(-0.5 * p.kappa * t);
  Matrix m = Matrix::Zero(4, 4);
  if (p.sigma2 == Sigma2Sign::Positive) {
    m(0, 0) = q2 * decay;
    m(1, 1) = 1.0 - q2 * decay;
  } else {
    m(0, 0) = 1.0 - (1.0 - q2) * decay;
    m(1, 1) = (1.0 - q2) * decay;
  }
  m(0, 1) = off;
  m(1, 0) = off;
  return DensityMatrix::from_matrix(std::move(m));
}

DensityMatrix n4_averaged_solution(const SingletParams& p, double t) {
  p.validate();
  const double q2 = p.q * p.q;
  const double off = -p.q * std::sqrt(1.0 - q2) * std::exp(-0.5 * p.kappa * t);
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = q2;
  m(1, 1) = 1.0 - q2;
  m(0, 1) = off;
  m(1, 0) = off;
  return DensityMatrix::from_matrix(std::move(m));
}

double lambda_decay_rate(int i, int j, const SigmaCascade& sig) {
  if (sig.dim() != 4) {
    throw std::invalid_argument("lambda_decay_rate: cascade must have N = 4");
  }
  if (i == j || i < 1 || j < 1 || i > 4 || j > 4) {
    throw std::invalid_argument("lambda_decay_rate: need distinct indices in 1..4");
  }
  // Number of jump operators draining basis state m: one per higher state
  // with positive sigma, plus (m - 1) downward operators when sigma_m <= 0.
  const auto outflow = [&sig](int m) {
    double count = 0.0;
    for (int k = m + 1; k <= 4; ++k) {
      if (sig.sigma(k) > 0.0) count += 1.0;
    }
    if (m >= 2 && !(sig.sigma(m) > 0.0)) count += m - 1;
    return count;
  };
  return outflow(i) + outflow(j);
}

}  // namespace detcol

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

#pragma once

#include "detcol/linalg.hpp"
#include "detcol/model.hpp"

namespace detcol {

/// Branch selector for the two-level transition: `Positive` means
/// sigma_2 > 0 (state 1 decays into state 2); sigma_2 = 0 belongs to the
/// `NonPositive` branch.
enum class Sigma2Sign { Positive, NonPositive };

/// Entangled two-qubit pair with amplitudes (q, -sqrt(1-q^2)) on the first
/// two detector states.
struct SingletParams {
  double q = 0.5;
  double kappa = 1.0;
  Sigma2Sign sigma2 = Sigma2Sign::Positive;

  void validate() const;  // 0 <= q <= 1, kappa > 0
};

/// Prepared singlet state in detector-basis coordinates:
/// (q, -sqrt(1-q^2), 0, 0).
StateVector singlet_state(double q);

/// Two-level amplitude damping at time t from an arbitrary valid initial
/// state. For sigma_2 > 0: rho_11(t) = rho_11(0) e^{-kt},
/// rho_12(t) = rho_12(0) e^{-kt/2}; mirrored for the other branch.
DensityMatrix n2_solution(const DensityMatrix& rho0, Sigma2Sign sign,
                          double kappa, double t);

/// Exact four-level solution for the singlet initial state, in detector
/// basis coordinates. Off-diagonal element rho_12(t) = -q sqrt(1-q^2)
/// e^{-kt/2}; rho_33 = rho_44 = 0 for all t.
DensityMatrix n4_singlet_solution(const SingletParams& p, double t);

/// The two sign branches of n4_singlet_solution weighted by
/// P(sigma_2 > 0) = 1 - q^2 and P(sigma_2 <= 0) = q^2: diagonal
/// (q^2, 1-q^2, 0, 0) for all t, off-diagonal -q sqrt(1-q^2) e^{-kt/2}.
/// The sigma2 field of `p` is ignored.
DensityMatrix n4_averaged_solution(const SingletParams& p, double t);

/// Decay exponent of the off-diagonal element (i, j) for a four-level
/// system: |rho_ij(t)| = |rho_ij(0)| e^{-kappa Lambda_ij t / 2}. Indices
/// are 1-based and must differ; the cascade must have dimension 4.
double lambda_decay_rate(int i, int j, const SigmaCascade& sig);

}  // namespace detcol

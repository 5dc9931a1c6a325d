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

#include <random>
#include <string>
#include <vector>

#include "detcol/linalg.hpp"

namespace detcol {

/// Measurement setup: detector eigenbasis, Hamiltonian, preparation and
/// detection times, and the collapse rate kappa. Basis states are the
/// columns of `basis`, labelled 1..N.
class MeasurementContext {
 public:
  /// Validates orthonormality of the basis, hermiticity of the Hamiltonian,
  /// kappa >= 0 and t_d >= t_p. kappa = 0 disables the collapse dynamics.
  MeasurementContext(Matrix basis, Matrix hamiltonian, double t_p, double t_d,
                     double kappa);

  /// Computational basis, zero Hamiltonian, t_p = 0, t_d = 0.
  static MeasurementContext standard(int dim, double kappa);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Matrix& basis() const { return basis_; }
  StateVector basis_state(int i) const;  // i in 1..N
  const Matrix& hamiltonian() const { return hamiltonian_; }
  double t_p() const { return t_p_; }
  double t_d() const { return t_d_; }
  double kappa() const { return kappa_; }
  bool has_computational_basis() const { return computational_; }

 private:
  Matrix basis_;
  Matrix hamiltonian_;
  double t_p_;
  double t_d_;
  double kappa_;
  bool computational_;
};

/// Hidden-variable distribution family. The uniform disk is the reference
/// distribution; the restricted families are deliberately non-uniform and
/// break the Born statistics by a computable amount.
struct Sampler {
  enum class Kind { UniformDisk, Disk, Annulus };

  Kind kind = Kind::UniformDisk;
  double radius = 1.0;  // outer radius for Disk, in (0, 1]
  double inner = 0.0;   // inner radius for Annulus, in [0, 1)

  void validate() const;
  /// One draw, uniform over the configured region. Consumes exactly two
  /// generator outputs (radius first, then phase).
  Complex draw(std::mt19937_64& rng) const;
  std::string describe() const;
  static Sampler parse(const std::string& text);  // "uniform", "disk:R", "annulus:R0"
};

/// The complex draws lambda_2 .. lambda_N on the closed unit disk.
class HiddenVariables {
 public:
  /// `values[0]` is lambda_2. Each modulus must be <= 1 (+tol::kUnitDisk).
  explicit HiddenVariables(std::vector<Complex> values);

  int dim() const { return static_cast<int>(values_.size()) + 1; }
  Complex lambda(int j) const { return values_.at(j - 2); }  // j in 2..N
  const std::vector<Complex>& values() const { return values_; }

 private:
  std::vector<Complex> values_;
};

/// Detector-basis amplitudes alpha_I of the Hamiltonian-evolved state at
/// detection time.
class BranchAmplitudes {
 public:
  explicit BranchAmplitudes(std::vector<Complex> alphas);

  int dim() const { return static_cast<int>(alphas_.size()); }
  Complex alpha(int i) const { return alphas_.at(i - 1); }  // i in 1..N
  double weight(int i) const { return std::norm(alphas_.at(i - 1)); }

 private:
  std::vector<Complex> alphas_;
};

/// The reals sigma_2 .. sigma_N whose signs fix the collapse outcome.
/// sigma_J = |alpha_J lambda_J|^2 - (1 - |lambda_J|^2) sum_{I<J} |alpha_I|^2.
class SigmaCascade {
 public:
  explicit SigmaCascade(std::vector<double> sigmas);

  int dim() const { return static_cast<int>(sigmas_.size()) + 1; }
  double sigma(int j) const { return sigmas_.at(j - 2); }  // j in 2..N
  const std::vector<double>& values() const { return sigmas_; }

 private:
  std::vector<double> sigmas_;
};

/// One jump operator |to><from| between detector basis states (1-based).
struct Transition {
  int to = 0;
  int from = 0;
};

/// The N(N-1)/2 jump operators of the collapse master equation. Each pair
/// K > M contributes |K><M| when sigma_K > 0 and |M><K| otherwise (the
/// boundary sigma_K = 0 transitions downward). Operators are enumerated in
/// (K, M) order: (2,1), (3,1), (3,2), (4,1), ...
class LindbladSet {
 public:
  LindbladSet(int dim, std::vector<Transition> transitions);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(transitions_.size()); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  /// Dense matrix of operator k (zero-based) in the coordinates of `ctx`.
  Matrix operator_matrix(int k, const MeasurementContext& ctx) const;

 private:
  int dim_;
  std::vector<Transition> transitions_;
};

/// N-1 independent draws for an N-dimensional system, uniform on the unit
/// disk (or on the region of `sampler`), in index order lambda_2 .. lambda_N.
HiddenVariables sample_hidden_variables(int n, std::mt19937_64& rng);
HiddenVariables sample_hidden_variables(int n, std::mt19937_64& rng,
                                        const Sampler& sampler);

/// alpha_I = <I| exp(-i H (t_d - t_p)) |psi_p>.
BranchAmplitudes compute_branch_amplitudes(const StateVector& psi_p,
                                           const MeasurementContext& ctx);

SigmaCascade compute_sigma_cascade(const BranchAmplitudes& alphas,
                                   const HiddenVariables& hv);

LindbladSet build_lindblad_set(const SigmaCascade& sig,
                               const MeasurementContext& ctx);

/// Asymptotic collapse outcome: the largest J with sigma_J > 0, else 1.
int predict_outcome(const SigmaCascade& sig);

/// Probability that the cascade selects |K>, k in 1..N. Evaluates the
/// conditional product over sign probabilities; equals |alpha_K|^2 whenever
/// all partial sums are nonzero, and 0 for unreachable branches.
double exact_outcome_probability(const BranchAmplitudes& alphas, int k);

/// P(sigma_j > 0) under uniform-disk sampling:
/// |alpha_j|^2 / sum_{I<=j} |alpha_I|^2, or 0 if the sum vanishes.
double analytic_sigma_sign_probability(const BranchAmplitudes& alphas, int j);

}  // namespace detcol

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

#include "detcol/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "detcol/rng.hpp"

namespace detcol {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

}  // namespace

MeasurementContext::MeasurementContext(Matrix basis, Matrix hamiltonian,
                                       double t_p, double t_d, double kappa)
    : basis_(std::move(basis)),
      hamiltonian_(std::move(hamiltonian)),
      t_p_(t_p),
      t_d_(t_d),
      kappa_(kappa) {
  const int n = static_cast<int>(basis_.rows());
  if (n < 2 || basis_.cols() != n) {
    fail("MeasurementContext: basis must be square with dimension >= 2");
  }
  const double defect =
      (basis_.adjoint() * basis_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > tol::kOrthonormality) {
    std::ostringstream os;
    os << "MeasurementContext: basis orthonormality defect " << defect;
    fail(os.str());
  }
  if (hamiltonian_.rows() != n || hamiltonian_.cols() != n) {
    fail("MeasurementContext: Hamiltonian dimension mismatch");
  }
  if (!is_hermitian(hamiltonian_, tol::kOrthonormality)) {
    fail("MeasurementContext: Hamiltonian is not Hermitian");
  }
  // kappa = 0 switches the collapse dynamics off (plain Hamiltonian
  // evolution); negative rates are rejected.
  if (!(kappa_ >= 0.0)) fail("MeasurementContext: kappa must be non-negative");
  if (t_d_ < t_p_) fail("MeasurementContext: t_d must not precede t_p");
  computational_ =
      (basis_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0;
}

MeasurementContext MeasurementContext::standard(int dim, double kappa) {
  return MeasurementContext(Matrix::Identity(dim, dim),
                            Matrix::Zero(dim, dim), 0.0, 0.0, kappa);
}

StateVector MeasurementContext::basis_state(int i) const {
  return StateVector(basis_.col(i - 1));
}

void Sampler::validate() const {
  switch (kind) {
    case Kind::UniformDisk:
      break;
    case Kind::Disk:
      if (!(radius > 0.0 && radius <= 1.0)) {
        fail("Sampler: disk radius must be in (0, 1]");
      }
      break;
    case Kind::Annulus:
      if (!(inner >= 0.0 && inner < 1.0)) {
        fail("Sampler: annulus inner radius must be in [0, 1)");
      }
      break;
  }
}

Complex Sampler::draw(std::mt19937_64& rng) const {
  // Inverse-CDF radius keeps the draw count fixed at two uniforms.
  const double u = uniform_double(rng);
  const double v = uniform_double(rng);
  double r = 0.0;
  switch (kind) {
    case Kind::UniformDisk:
      r = std::sqrt(u);
      break;
    case Kind::Disk:
      r = radius * std::sqrt(u);
      break;
    case Kind::Annulus:
      r = std::sqrt(inner * inner + u * (1.0 - inner * inner));
      break;
  }
  const double phi = 2.0 * std::numbers::pi * v;
  return Complex(r * std::cos(phi), r * std::sin(phi));
}

std::string Sampler::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::UniformDisk:
      os << "uniform";
      break;
    case Kind::Disk:
      os << "disk:" << radius;
      break;
    case Kind::Annulus:
      os << "annulus:" << inner;
      break;
  }
  return os.str();
}

Sampler Sampler::parse(const std::string& text) {
  Sampler s;
  if (text == "uniform") {
    s.kind = Kind::UniformDisk;
    return s;
  }
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  double value = 0.0;
  if (colon != std::string::npos) {
    std::istringstream is(text.substr(colon + 1));
    if (!(is >> value) || !is.eof()) {
      fail("Sampler: malformed parameter in '" + text + "'");
    }
  } else {
    fail("Sampler: '" + name + "' requires a parameter, e.g. disk:0.8");
  }
  if (name == "disk") {
    s.kind = Kind::Disk;
    s.radius = value;
  } else if (name == "annulus") {
    s.kind = Kind::Annulus;
    s.inner = value;
  } else {
    fail("Sampler: unknown kind '" + name + "'");
  }
  s.validate();
  return s;
}

HiddenVariables::HiddenVariables(std::vector<Complex> values)
    : values_(std::move(values)) {
  if (values_.empty()) fail("HiddenVariables: need at least lambda_2");
  for (const Complex& v : values_) {
    if (std::abs(v) > 1.0 + tol::kUnitDisk) {
      fail("HiddenVariables: draw outside the closed unit disk");
    }
  }
}

BranchAmplitudes::BranchAmplitudes(std::vector<Complex> alphas)
    : alphas_(std::move(alphas)) {
  if (alphas_.size() < 2) fail("BranchAmplitudes: need dimension >= 2");
  double total = 0.0;
  for (const Complex& a : alphas_) total += std::norm(a);
  if (std::abs(total - 1.0) > tol::kAmplitudeNorm) {
    std::ostringstream os;
    os << "BranchAmplitudes: weights sum to " << total;
    fail(os.str());
  }
}

SigmaCascade::SigmaCascade(std::vector<double> sigmas)
    : sigmas_(std::move(sigmas)) {
  if (sigmas_.empty()) fail("SigmaCascade: need at least sigma_2");
}

LindbladSet::LindbladSet(int dim, std::vector<Transition> transitions)
    : dim_(dim), transitions_(std::move(transitions)) {
  if (static_cast<int>(transitions_.size()) != dim_ * (dim_ - 1) / 2) {
    fail("LindbladSet: expected N(N-1)/2 transitions");
  }
  for (const Transition& t : transitions_) {
    if (t.to < 1 || t.to > dim_ || t.from < 1 || t.from > dim_ ||
        t.to == t.from) {
      fail("LindbladSet: transition indices out of range");
    }
  }
}

Matrix LindbladSet::operator_matrix(int k, const MeasurementContext& ctx) const {
  if (ctx.dim() != dim_) fail("LindbladSet: context dimension mismatch");
  const Transition& t = transitions_.at(k);
  return ctx.basis().col(t.to - 1) * ctx.basis().col(t.from - 1).adjoint();
}

HiddenVariables sample_hidden_variables(int n, std::mt19937_64& rng) {
  return sample_hidden_variables(n, rng, Sampler{});
}

HiddenVariables sample_hidden_variables(int n, std::mt19937_64& rng,
                                        const Sampler& sampler) {
  if (n < 2) fail("sample_hidden_variables: dimension must be >= 2");
  sampler.validate();
  std::vector<Complex> values;
  values.reserve(n - 1);
  for (int j = 2; j <= n; ++j) values.push_back(sampler.draw(rng));
  return HiddenVariables(std::move(values));
}

BranchAmplitudes compute_branch_amplitudes(const StateVector& psi_p,
                                           const MeasurementContext& ctx) {
  if (psi_p.dim() != ctx.dim()) {
    fail("compute_branch_amplitudes: dimension mismatch");
  }
  const Matrix u =
      hermitian_propagator(ctx.hamiltonian(), ctx.t_d() - ctx.t_p());
  const Vector evolved = u * psi_p.amplitudes();
  const Vector alpha = ctx.basis().adjoint() * evolved;
  return BranchAmplitudes(
      std::vector<Complex>(alpha.data(), alpha.data() + alpha.size()));
}

SigmaCascade compute_sigma_cascade(const BranchAmplitudes& alphas,
                                   const HiddenVariables& hv) {
  const int n = alphas.dim();
  if (hv.dim() != n) fail("compute_sigma_cascade: dimension mismatch");
  std::vector<double> sigmas;
  sigmas.reserve(n - 1);
  double below = alphas.weight(1);  // sum_{I<J} |alpha_I|^2
  for (int j = 2; j <= n; ++j) {
    const double mod2 = std::norm(hv.lambda(j));
    sigmas.push_back(mod2 * alphas.weight(j) - (1.0 - mod2) * below);
    below += alphas.weight(j);
  }
  return SigmaCascade(std::move(sigmas));
}

LindbladSet build_lindblad_set(const SigmaCascade& sig,
                               const MeasurementContext& ctx) {
  const int n = sig.dim();
  if (ctx.dim() != n) fail("build_lindblad_set: dimension mismatch");
  std::vector<Transition> transitions;
  transitions.reserve(n * (n - 1) / 2);
  for (int k = 2; k <= n; ++k) {
    const bool upward = sig.sigma(k) > 0.0;
    for (int m = 1; m < k; ++m) {
      transitions.push_back(upward ? Transition{k, m} : Transition{m, k});
    }
  }
  return LindbladSet(n, std::move(transitions));
}

int predict_outcome(const SigmaCascade& sig) {
  for (int j = sig.dim(); j >= 2; --j) {
    if (sig.sigma(j) > 0.0) return j;
  }
  return 1;
}

double analytic_sigma_sign_probability(const BranchAmplitudes& alphas, int j) {
  if (j < 2 || j > alphas.dim()) {
    fail("analytic_sigma_sign_probability: index out of range");
  }
  double partial = 0.0;
  for (int i = 1; i <= j; ++i) partial += alphas.weight(i);
  if (partial == 0.0) return 0.0;
  return alphas.weight(j) / partial;
}

double exact_outcome_probability(const BranchAmplitudes& alphas, int k) {
  const int n = alphas.dim();
  if (k < 1 || k > n) fail("exact_outcome_probability: index out of range");
  double p = 1.0;
  for (int j = n; j > k; --j) {
    p *= 1.0 - analytic_sigma_sign_probability(alphas, j);
  }
  if (k >= 2) p *= analytic_sigma_sign_probability(alphas, k);
  return p;
}

}  // namespace detcol

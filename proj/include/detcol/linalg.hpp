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

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "detcol/tolerances.hpp"

namespace detcol {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

/// Normalised pure state of an N-dimensional system. The norm defect is
/// checked at construction (tol::kStateNorm).
class StateVector {
 public:
  explicit StateVector(Vector amplitudes);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  /// Amplitude on basis state |i>, i in 1..N.
  Complex amplitude(int i) const { return amps_(i - 1); }

 private:
  Vector amps_;
};

/// Hermiticity, trace and positivity defects of a candidate density matrix.
struct ValidationReport {
  double hermiticity_defect = 0.0;  // max |m_ij - conj(m_ji)|
  double trace_defect = 0.0;        // |tr(m) - 1|
  double min_eigenvalue = 0.0;

  bool ok() const {
    return hermiticity_defect <= tol::kHermiticity &&
           trace_defect <= tol::kTrace &&
           min_eigenvalue >= tol::kMinEigenvalue;
  }
};

ValidationReport validate_density(const Matrix& m);

/// Valid density matrix: Hermitian, unit trace, positive semidefinite
/// within the tolerances of tolerances.hpp. Use from_matrix() to construct
/// from raw entries (throws std::invalid_argument on defect) or pure() for
/// a rank-one projector.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(Matrix m);
  static DensityMatrix pure(const StateVector& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex entry(int i, int j) const { return m_(i - 1, j - 1); }

  /// Dominant eigenvector; requires the state to be pure within
  /// `purity_tol` (largest eigenvalue >= 1 - purity_tol).
  StateVector principal_state(double purity_tol = 1e-9) const;

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Kronecker product; the left factor varies slowest.
Matrix tensor_product(const Matrix& a, const Matrix& b);
StateVector tensor_product(const StateVector& a, const StateVector& b);

/// Trace out all tensor factors except `keep` (zero-based position in
/// `dims`). The product of `dims` must equal the matrix dimension.
Matrix partial_trace(const Matrix& rho, const std::vector<int>& dims, int keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& dims, int keep);

/// U = exp(-i h t) for Hermitian h, computed by eigendecomposition.
/// Throws std::invalid_argument if h is not Hermitian within
/// tol::kOrthonormality.
Matrix hermitian_propagator(const Matrix& h, double t);

/// Half the trace norm of (a - b). Zero iff the states are equal.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

bool is_hermitian(const Matrix& m, double tolerance);

}  // namespace detcol

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

#include "detcol/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace detcol {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::invalid_argument(what);
}

}  // namespace

StateVector::StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 1) fail("StateVector: empty amplitude vector");
  const double defect = std::abs(amps_.squaredNorm() - 1.0);
  if (defect > tol::kStateNorm) {
    std::ostringstream os;
    os << "StateVector: norm defect " << defect << " exceeds "
       << tol::kStateNorm;
    fail(os.str());
  }
}

bool is_hermitian(const Matrix& m, double tolerance) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

ValidationReport validate_density(const Matrix& m) {
  ValidationReport report;
  report.hermiticity_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  report.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = solver.eigenvalues().minCoeff();
  return report;
}

DensityMatrix DensityMatrix::from_matrix(Matrix m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    fail("DensityMatrix: matrix must be square and non-empty");
  }
  const ValidationReport report = validate_density(m);
  if (!report.ok()) {
    std::ostringstream os;
    os << "DensityMatrix: invalid state (hermiticity defect "
       << report.hermiticity_defect << ", trace defect " << report.trace_defect
       << ", min eigenvalue " << report.min_eigenvalue << ")";
    fail(os.str());
  }
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const Vector& a = psi.amplitudes();
  return DensityMatrix(a * a.adjoint());
}

StateVector DensityMatrix::principal_state(double purity_tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m_);
  const int last = dim() - 1;  // eigenvalues ascending
  if (solver.eigenvalues()(last) < 1.0 - purity_tol) {
    std::ostringstream os;
    os << "DensityMatrix: state is not pure (largest eigenvalue "
       << solver.eigenvalues()(last) << ")";
    fail(os.str());
  }
  Vector v = solver.eigenvectors().col(last);
  v /= v.norm();
  return StateVector(std::move(v));
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  const Vector& va = a.amplitudes();
  const Vector& vb = b.amplitudes();
  Vector out(va.size() * vb.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) {
    out.segment(i * vb.size(), vb.size()) = va(i) * vb;
  }
  return StateVector(std::move(out));
}

Matrix partial_trace(const Matrix& rho, const std::vector<int>& dims,
                     int keep) {
  if (keep < 0 || keep >= static_cast<int>(dims.size())) {
    fail("partial_trace: keep index out of range");
  }
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d < 1) fail("partial_trace: factor dimensions must be positive");
    total *= d;
  }
  if (total != rho.rows() || rho.rows() != rho.cols()) {
    fail("partial_trace: factor dimensions do not match the matrix");
  }

  // Row index decomposes as i = left*(d_keep*right_size) + k*right_size + r,
  // with `left` the slower factors and `r` the faster ones.
  Eigen::Index right = 1;
  for (int f = keep + 1; f < static_cast<int>(dims.size()); ++f) {
    right *= dims[f];
  }
  const Eigen::Index d = dims[keep];
  const Eigen::Index left = total / (d * right);

  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index l = 0; l < left; ++l) {
    for (Eigen::Index r = 0; r < right; ++r) {
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          out(i, j) += rho(l * d * right + i * right + r,
                           l * d * right + j * right + r);
        }
      }
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& dims, int keep) {
  return DensityMatrix::from_matrix(partial_trace(rho.matrix(), dims, keep));
}

Matrix hermitian_propagator(const Matrix& h, double t) {
  if (h.rows() != h.cols()) fail("hermitian_propagator: matrix must be square");
  if (!is_hermitian(h, tol::kOrthonormality)) {
    fail("hermitian_propagator: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  Vector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    phases(k) = std::exp(Complex(0.0, -solver.eigenvalues()(k) * t));
  }
  return solver.eigenvectors() * phases.asDiagonal() *
         solver.eigenvectors().adjoint();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) fail("trace_distance: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix() - b.matrix(),
                                               Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace detcol

// Copyright 2026 The qrstab authors
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

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>

#include "qrstab/errors.hpp"

namespace qrstab {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Kronecker product. Convention: kron(A,B)(i*p+k, j*q+l) = A(i,j)*B(k,l)
// with B of size p x q, so that vec(A X B^T) = kron(B, A) vec(X) under
// column stacking.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Column-stacking vectorization and its inverse.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vec(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(m.data(),
                                                                    m.size());
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, Eigen::Index rows,
    Eigen::Index cols) {
  if (v.size() != rows * cols) throw ShapeMismatch("unvec: size mismatch");
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(
      v.data(), rows, cols);
}

inline bool is_square(const MatrixXd& m) { return m.rows() == m.cols(); }

inline double symmetry_defect(const MatrixXd& m) {
  return (m - m.transpose()).norm() / (1.0 + m.norm());
}

inline double antisymmetry_defect(const MatrixXd& m) {
  return (m + m.transpose()).norm() / (1.0 + m.norm());
}

// Largest real part over the eigenvalues of a real square matrix.
inline double max_real_eigenvalue(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("eigensolver did not converge");
  return es.eigenvalues().real().maxCoeff();
}

// Smallest eigenvalue of a symmetric (Hermitian) matrix.
inline double min_eigenvalue_sym(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("selfadjoint eigensolver did not converge");
  return es.eigenvalues().minCoeff();
}

inline double min_eigenvalue_herm(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("selfadjoint eigensolver did not converge");
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue_sym(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("selfadjoint eigensolver did not converge");
  return es.eigenvalues().maxCoeff();
}

// Condition number from singular values.
inline double condition_number(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// Frobenius inner product <M, N> = Tr(M^T N) for real matrices.
inline double frobenius_inner(const MatrixXd& m, const MatrixXd& n) {
  return (m.array() * n.array()).sum();
}

inline MatrixXd symmetrize(const MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace qrstab

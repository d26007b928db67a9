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

#include <string>

#include <Eigen/Dense>

#include "qrstab/errors.hpp"
#include "qrstab/linalg.hpp"

namespace qrstab {

// Numeric cutoffs. The algebra is exact; these decide when a floating-point
// residual counts as a violation. Overridable per call.
struct Tolerances {
  double theta_singularity = 1e-10;  // relative smallest singular value
  double symmetry = 1e-12;           // relative (anti)symmetry defect
  double realizability = 1e-10;      // relative drift identity residual
  double lyapunov_residual = 1e-9;   // relative steady-state residual
  double theta_consistency = 1e-8;   // |Im S - Theta| absolute
  double psd_slack = 1e-9;           // eigenvalue slack for PSD checks
};

// Open quantum harmonic oscillator with linear field coupling:
// commutation matrix theta, quadratic Hamiltonian weight R, coupling M and
// field Ito imaginary part J. B and A are derived:
//   B = 2 theta M^T,   A = 2 theta R - (1/2) B J B^T theta^{-1}.
struct QuantumLinearSystem {
  int n = 0;  // system variables (even)
  int m = 0;  // field quadratures (even)
  MatrixXd theta;
  MatrixXd R;
  MatrixXd M;
  MatrixXd J;
  MatrixXd B;  // derived
  MatrixXd A;  // derived drift
  double theta_condition = 0.0;  // reported, not gated beyond singularity

  MatrixXd omega_real() const { return MatrixXd::Identity(m, m); }
  MatrixXd bbt() const { return B * B.transpose(); }
};

// Steady-state second moments E(X X^T) = P + i*theta.
struct SecondMomentMatrix {
  MatrixXd P;      // real part, symmetric PSD
  MatrixXd theta;  // imaginary part, antisymmetric
};

namespace detail {

inline void require_even_positive(Eigen::Index k, const char* what) {
  if (k <= 0 || k % 2 != 0)
    throw ShapeMismatch(std::string(what) + " dimension must be even and positive, got " +
                        std::to_string(k));
}

}  // namespace detail

// Validates the inputs and derives B and A. The drift identity
// A theta + theta A^T + B J B^T = 0 is an algebraic consequence of the two
// constructions; it is re-checked here as a guard against conditioning loss.
inline QuantumLinearSystem build_system(const MatrixXd& theta, const MatrixXd& R,
                                        const MatrixXd& M, const MatrixXd& J,
                                        const Tolerances& tol = {}) {
  if (!is_square(theta)) throw ShapeMismatch("theta must be square");
  if (!is_square(R)) throw ShapeMismatch("R must be square");
  if (!is_square(J)) throw ShapeMismatch("J must be square");
  detail::require_even_positive(theta.rows(), "theta");
  detail::require_even_positive(J.rows(), "J");
  const int n = static_cast<int>(theta.rows());
  const int m = static_cast<int>(J.rows());
  if (R.rows() != n)
    throw ShapeMismatch("R must be " + std::to_string(n) + "x" + std::to_string(n));
  if (M.rows() != m || M.cols() != n)
    throw ShapeMismatch("M must be " + std::to_string(m) + "x" + std::to_string(n) +
                        ", got " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()));

  if (antisymmetry_defect(theta) > tol.symmetry)
    throw SymmetryViolation("theta is not antisymmetric");
  if (symmetry_defect(R) > tol.symmetry)
    throw SymmetryViolation("R is not symmetric");
  if (antisymmetry_defect(J) > tol.symmetry)
    throw SymmetryViolation("J is not antisymmetric");

  Eigen::JacobiSVD<MatrixXd> svd(theta);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= tol.theta_singularity * sv(0))
    throw SingularTheta("relative smallest singular value " +
                        std::to_string(sv(sv.size() - 1) / sv(0)));

  QuantumLinearSystem sys;
  sys.n = n;
  sys.m = m;
  sys.theta = theta;
  sys.R = R;
  sys.M = M;
  sys.J = J;
  sys.theta_condition = sv(0) / sv(sv.size() - 1);
  sys.B = 2.0 * theta * M.transpose();
  const MatrixXd theta_inv = theta.inverse();
  sys.A = 2.0 * theta * R - 0.5 * sys.B * J * sys.B.transpose() * theta_inv;

  const MatrixXd resid =
      sys.A * theta + theta * sys.A.transpose() + sys.B * J * sys.B.transpose();
  if (resid.norm() > tol.realizability * (1.0 + sys.A.norm() * theta.norm()))
    throw NumericalFailure("drift identity residual " + std::to_string(resid.norm()));
  return sys;
}

// max_k Re eig_k(A). Negative value means Hurwitz.
inline double spectral_abscissa(const MatrixXd& a) {
  if (!is_square(a)) throw ShapeMismatch("spectral_abscissa: matrix must be square");
  return max_real_eigenvalue(a);
}

// Steady state of S' = A S + S A^T + B Omega B^T with Omega = I + iJ,
// solved by Kronecker vectorization of the n^2 x n^2 complex system.
// For a valid system the imaginary part of the solution is theta itself;
// a mismatch means the inputs are not physically consistent (e.g. a
// hand-assembled system with B = 0 but nonzero theta).
inline SecondMomentMatrix nominal_steady_covariance(const QuantumLinearSystem& sys,
                                                    const Tolerances& tol = {}) {
  const double alpha = spectral_abscissa(sys.A);
  if (alpha >= 0.0)
    throw NotHurwitz("spectral abscissa " + std::to_string(alpha));

  const int n = sys.n;
  const MatrixXcd omega =
      MatrixXd::Identity(sys.m, sys.m).cast<std::complex<double>>() +
      std::complex<double>(0, 1) * sys.J.cast<std::complex<double>>();
  const MatrixXcd rhs = sys.B.cast<std::complex<double>>() * omega *
                        sys.B.transpose().cast<std::complex<double>>();

  const MatrixXcd eye = MatrixXcd::Identity(n, n);
  const MatrixXcd ac = sys.A.cast<std::complex<double>>();
  // vec(A S + S A^T) = (I (x) A + A (x) I) vec(S), column stacking.
  const MatrixXcd op = kron(eye, ac) + kron(ac, eye);
  const VectorXcd s_vec = op.colPivHouseholderQr().solve(-vec(rhs));
  const MatrixXcd s = unvec(s_vec, n, n);

  const double resid = (ac * s + s * ac.transpose() + rhs).norm();
  if (resid > tol.lyapunov_residual * std::max(rhs.norm(), 1e-300))
    throw NumericalFailure("Lyapunov residual " + std::to_string(resid));

  const MatrixXd im_part = s.imag();
  if ((im_part - sys.theta).norm() > tol.theta_consistency * (1.0 + sys.theta.norm())) {
    std::string msg = "steady covariance imaginary part deviates from theta by " +
                      std::to_string((im_part - sys.theta).norm());
    if (sys.B.norm() == 0.0 && sys.theta.norm() > 0.0)
      msg += " (B = 0 with nonzero theta cannot hold the commutation relations)";
    throw PhysicallyInconsistent(msg);
  }

  SecondMomentMatrix out;
  out.P = symmetrize(s.real());
  out.theta = sys.theta;

  // Heisenberg consistency: P and P + i*theta positive semi-definite.
  if (min_eigenvalue_sym(out.P) < -tol.psd_slack)
    throw PhysicallyInconsistent("steady covariance real part is not PSD");
  const MatrixXcd herm = out.P.cast<std::complex<double>>() +
                         std::complex<double>(0, 1) * out.theta.cast<std::complex<double>>();
  if (min_eigenvalue_herm(herm) < -tol.psd_slack)
    throw PhysicallyInconsistent("P + i theta is not PSD");
  return out;
}

}  // namespace qrstab

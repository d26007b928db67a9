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

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrstab/errors.hpp"
#include "qrstab/linalg.hpp"
#include "qrstab/perturbation.hpp"
#include "qrstab/system.hpp"

namespace qrstab {

// Vectorized form of Pi -> A^T Pi + Pi A + sum_{k=0}^d Gamma_k^T Pi Gamma_k
// under column stacking:
//   K = I (x) A^T + A^T (x) I + sum_k Gamma_k^T (x) Gamma_k^T,
// where the k = 0 term with Gamma_0 = sqrt(mu1) I contributes mu1 * I.
struct SylvesterOperatorMatrix {
  MatrixXd K;
  int n = 0;
};

inline SylvesterOperatorMatrix operator_matrix(const MatrixXd& A,
                                               const PerturbationEnvelope& envelope) {
  if (!is_square(A)) throw ShapeMismatch("operator_matrix: A must be square");
  const int n = static_cast<int>(A.rows());
  if (envelope.n != n)
    throw ShapeMismatch("operator_matrix: envelope dimension " +
                        std::to_string(envelope.n) + " does not match A (" +
                        std::to_string(n) + ")");
  const MatrixXd eye = MatrixXd::Identity(n, n);
  const MatrixXd at = A.transpose();
  MatrixXd K = kron(eye, at) + kron(at, eye) +
               envelope.mu1 * MatrixXd::Identity(n * n, n * n);
  for (const MatrixXd& g : envelope.gammas) {
    if (g.rows() != n || g.cols() != n)
      throw ShapeMismatch("operator_matrix: Gamma_k must be " + std::to_string(n) + "x" +
                          std::to_string(n));
    const MatrixXd gt = g.transpose();
    K += kron(gt, gt);
  }
  return {K, n};
}

// gamma* = -max Re eig(K). Positive gamma* makes the LMI feasible for every
// gamma in (0, gamma*).
inline double decay_margin(const SylvesterOperatorMatrix& op) {
  return -max_real_eigenvalue(op.K);
}

// Feasibility witness: Pi > 0 with
//   A^T Pi + Pi A + sum_{k=0}^d Gamma_k^T Pi Gamma_k + gamma Pi = -Q <= 0,
// and the induced mean-square bound of the weighted second moment.
struct StabilityCertificate {
  MatrixXd Pi;
  double gamma = 0.0;
  double mu1 = 0.0;
  double mu0 = 0.0;
  double decay_margin = 0.0;  // gamma* of the operator used for the solve
  double ms_bound = 0.0;      // (1/gamma)(<Pi, BB^T> + (mu0/mu1) Tr Pi)
  double min_eig_pi = 0.0;
  double lmi_residual = 0.0;  // max eigenvalue of the LMI expression + Q
};

inline StabilityCertificate solve_certificate(const QuantumLinearSystem& sys,
                                              const PerturbationEnvelope& envelope,
                                              double gamma, const MatrixXd& Q) {
  const int n = sys.n;
  if (envelope.n != n)
    throw ShapeMismatch("solve_certificate: envelope dimension does not match system");
  if (Q.rows() != n || Q.cols() != n)
    throw ShapeMismatch("solve_certificate: Q must be " + std::to_string(n) + "x" +
                        std::to_string(n));
  if (symmetry_defect(Q) > 1e-12)
    throw SymmetryViolation("solve_certificate: Q must be symmetric");
  if (min_eigenvalue_sym(Q) <= 0.0)
    throw InvalidArgument("solve_certificate: Q must be positive definite");
  if (!(gamma > 0.0))
    throw InvalidArgument("solve_certificate: gamma must be positive, got " +
                          std::to_string(gamma));

  const SylvesterOperatorMatrix op = operator_matrix(sys.A, envelope);
  const double margin = decay_margin(op);
  if (gamma >= margin)
    throw Infeasible("gamma = " + std::to_string(gamma) +
                     " is not below the decay margin " + std::to_string(margin));

  const int nn = n * n;
  const MatrixXd lhs = op.K + gamma * MatrixXd::Identity(nn, nn);
  const VectorXd pi_vec = lhs.colPivHouseholderQr().solve(-vec(MatrixXd(Q)));
  MatrixXd Pi = symmetrize(unvec(VectorXd(pi_vec), n, n));

  StabilityCertificate cert;
  cert.Pi = Pi;
  cert.gamma = gamma;
  cert.mu1 = envelope.mu1;
  cert.mu0 = envelope.mu0;
  cert.decay_margin = margin;
  cert.min_eig_pi = min_eigenvalue_sym(Pi);
  if (cert.min_eig_pi <= 0.0)
    throw IndefinitePi("solved Pi has minimum eigenvalue " +
                       std::to_string(cert.min_eig_pi));

  MatrixXd lmi = sys.A.transpose() * Pi + Pi * sys.A + envelope.mu1 * Pi + gamma * Pi;
  for (const MatrixXd& g : envelope.gammas) lmi += g.transpose() * Pi * g;
  const double solve_resid = (lmi + Q).norm();
  if (solve_resid > 1e-8 * std::max(1.0, Pi.norm()))
    throw NumericalFailure("certificate solve residual " + std::to_string(solve_resid));
  cert.lmi_residual = max_eigenvalue_sym(symmetrize(lmi + Q));

  cert.ms_bound = (frobenius_inner(Pi, sys.bbt()) +
                   (envelope.mu0 / envelope.mu1) * Pi.trace()) /
                  gamma;
  return cert;
}

inline StabilityCertificate solve_certificate(const QuantumLinearSystem& sys,
                                              const PerturbationEnvelope& envelope,
                                              double gamma) {
  return solve_certificate(sys, envelope, gamma, MatrixXd::Identity(sys.n, sys.n));
}

enum class ScanObjective { max_gamma_star, min_ms_bound };

struct ScanPoint {
  double mu1 = 0.0;
  double decay_margin = 0.0;
  bool feasible = false;
  double gamma = 0.0;     // valid when feasible
  double ms_bound = 0.0;  // valid when feasible
  std::string note;
};

struct ScanResult {
  std::vector<ScanPoint> points;
  int best_index = -1;
  StabilityCertificate best;

  double best_mu1() const { return points.at(static_cast<std::size_t>(best_index)).mu1; }
};

// Evaluates the certificate pipeline on a mu1 grid. Per point, gamma is the
// caller's value when given (the point is infeasible if that gamma is not
// below the margin) and gamma*/2 otherwise.
inline ScanResult scan_mu1(const QuantumLinearSystem& sys,
                           const std::function<PerturbationEnvelope(double)>& builder,
                           const std::vector<double>& grid, ScanObjective objective,
                           std::optional<double> gamma = std::nullopt) {
  if (grid.empty()) throw MissingParameter("scan_mu1: empty mu1 grid");
  ScanResult out;
  out.points.reserve(grid.size());
  double best_key = 0.0;
  for (double mu1 : grid) {
    if (!(mu1 > 0.0)) throw InvalidArgument("scan_mu1: grid values must be positive");
    ScanPoint pt;
    pt.mu1 = mu1;
    try {
      const PerturbationEnvelope env = builder(mu1);
      const SylvesterOperatorMatrix op = operator_matrix(sys.A, env);
      pt.decay_margin = decay_margin(op);
      if (pt.decay_margin > 0.0) {
        const double g = gamma.value_or(0.5 * pt.decay_margin);
        if (g > 0.0 && g < pt.decay_margin) {
          const StabilityCertificate cert = solve_certificate(sys, env, g);
          pt.feasible = true;
          pt.gamma = g;
          pt.ms_bound = cert.ms_bound;
          const double key = objective == ScanObjective::max_gamma_star
                                 ? pt.decay_margin
                                 : -cert.ms_bound;
          if (out.best_index < 0 || key > best_key) {
            best_key = key;
            out.best_index = static_cast<int>(out.points.size());
            out.best = cert;
          }
        } else {
          pt.note = "requested gamma not below margin";
        }
      } else {
        pt.note = "nonpositive decay margin";
      }
    } catch (const Error& e) {
      pt.note = e.what();
    }
    out.points.push_back(std::move(pt));
  }
  if (out.best_index < 0) {
    std::ostringstream msg;
    msg << "no feasible grid point; margins:";
    for (const ScanPoint& pt : out.points)
      msg << " mu1=" << pt.mu1 << " margin=" << pt.decay_margin
          << (pt.note.empty() ? "" : " (" + pt.note + ")") << ";";
    throw AllInfeasible(msg.str());
  }
  return out;
}

// V(t) <= V0 e^{-gamma t} + ms_bound (1 - e^{-gamma t}).
inline std::vector<double> gronwall_envelope(const StabilityCertificate& cert, double V0,
                                             const std::vector<double>& times) {
  if (!(V0 >= 0.0)) throw InvalidArgument("gronwall_envelope: V0 must be nonnegative");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw InvalidArgument("gronwall_envelope: times must be nonnegative ascending");
  }
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const double decay = std::exp(-cert.gamma * t);
    out.push_back(V0 * decay + cert.ms_bound * (1.0 - decay));
  }
  return out;
}

}  // namespace qrstab

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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qrstab/errors.hpp"
#include "qrstab/linalg.hpp"
#include "qrstab/lmi.hpp"
#include "qrstab/perturbation.hpp"
#include "qrstab/rng.hpp"
#include "qrstab/system.hpp"

// Brute-force verification layer: truncated-Fock matrix representations of
// every operator the analytic modules reason about, used as an independent
// oracle. Everything here is desk scale (one or two modes).
namespace qrstab::fock {

using Complex = std::complex<double>;

struct FockSpace {
  int modes = 1;
  int cutoff = 40;

  FockSpace() = default;
  FockSpace(int modes_, int cutoff_) : modes(modes_), cutoff(cutoff_) {
    if (modes < 1 || modes > 2)
      throw InvalidArgument("FockSpace supports 1 or 2 modes, got " +
                            std::to_string(modes));
    if (cutoff < 8)
      throw InvalidArgument("FockSpace cutoff must be at least 8, got " +
                            std::to_string(cutoff));
  }

  Eigen::Index dim() const {
    Eigen::Index d = 1;
    for (int k = 0; k < modes; ++k) d *= cutoff;
    return d;
  }

  int quadratures() const { return 2 * modes; }

  // Per-mode level of a basis index; mode 0 varies slowest.
  int level(Eigen::Index basis_index, int mode) const {
    Eigen::Index rest = basis_index;
    for (int k = modes - 1; k > mode; --k) rest /= cutoff;
    return static_cast<int>(rest % cutoff);
  }
};

inline MatrixXcd lowering(int cutoff) {
  MatrixXcd a = MatrixXcd::Zero(cutoff, cutoff);
  for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

inline MatrixXd canonical_theta(int n) {
  MatrixXd theta = MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; k += 2) {
    theta(k, k + 1) = 1.0;
    theta(k + 1, k) = -1.0;
  }
  return theta;
}

// The quadrature construction fixes Theta = diag(S2, ...); reject anything
// else here (the analytic modules accept general Theta).
inline void require_canonical_theta(const MatrixXd& theta, double tol = 1e-12) {
  if (!is_square(theta) || theta.rows() % 2 != 0)
    throw NonCanonicalTheta("theta must be square with even dimension");
  const int n = static_cast<int>(theta.rows());
  if ((theta - canonical_theta(n)).norm() > tol * (1.0 + theta.norm()))
    throw NonCanonicalTheta(
        "oracle requires the canonical block-diagonal symplectic form diag(S2, ...)");
}

// Quadratures q = a + a^dag, p = -i(a - a^dag) per mode, interleaved as
// (q1, p1, q2, p2). Satisfies [q, p] = 2i away from the truncation edge.
inline std::vector<MatrixXcd> build_quadratures(const FockSpace& space) {
  const MatrixXcd a = lowering(space.cutoff);
  const MatrixXcd q = a + a.adjoint();
  const MatrixXcd p = Complex(0, -1) * (a - a.adjoint());
  if (space.modes == 1) return {q, p};
  const MatrixXcd eye = MatrixXcd::Identity(space.cutoff, space.cutoff);
  return {kron(q, eye), kron(p, eye), kron(eye, q), kron(eye, p)};
}

// Basis indices whose per-mode levels all sit below fraction*cutoff; the
// subspace on which truncated identities are meaningful.
inline std::vector<Eigen::Index> interior_indices(const FockSpace& space,
                                                  double fraction = 0.6) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw InvalidArgument("interior fraction must lie in (0, 1]");
  const int max_level = static_cast<int>(fraction * space.cutoff);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < space.dim(); ++i) {
    bool inside = true;
    for (int mode = 0; mode < space.modes; ++mode)
      if (space.level(i, mode) >= max_level) inside = false;
    if (inside) idx.push_back(i);
  }
  return idx;
}

inline MatrixXcd project_interior(const MatrixXcd& op,
                                  const std::vector<Eigen::Index>& idx) {
  MatrixXcd out(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = op(idx[r], idx[c]);
  return out;
}

namespace detail {

inline void require_hermitian(const MatrixXcd& k, const char* what) {
  if ((k - k.adjoint()).norm() > 1e-10 * (1.0 + k.norm()))
    throw InvalidArgument(std::string(what) + ": matrix is not Hermitian");
}

}  // namespace detail

// f(K) for Hermitian K via eigendecomposition; f maps real eigenvalues to
// complex values (exp(i z), cos, sin, ...).
inline MatrixXcd hermitian_function(const MatrixXcd& k,
                                    const std::function<Complex(double)>& f) {
  detail::require_hermitian(k, "hermitian_function");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(k);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("hermitian_function: eigendecomposition failed");
  VectorXcd fe(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < fe.size(); ++i) fe(i) = f(es.eigenvalues()(i));
  return es.eigenvectors() * fe.asDiagonal() * es.eigenvectors().adjoint();
}

// e^{i lambda^T X}.
inline MatrixXcd weyl_operator(const VectorXd& lambda,
                               const std::vector<MatrixXcd>& X) {
  if (lambda.size() != static_cast<Eigen::Index>(X.size()))
    throw ShapeMismatch("weyl_operator: lambda size does not match quadrature count");
  MatrixXcd s = MatrixXcd::Zero(X.front().rows(), X.front().cols());
  for (Eigen::Index j = 0; j < lambda.size(); ++j) s += lambda(j) * X[static_cast<std::size_t>(j)];
  return hermitian_function(s, [](double z) { return std::exp(Complex(0.0, z)); });
}

// H1 = sum_k r_k cos(lambda_k^T X + phi_k), Hermitian by construction.
inline MatrixXcd operator_of_trig(const TrigPerturbation& p,
                                  const std::vector<MatrixXcd>& X) {
  const Eigen::Index d = X.front().rows();
  MatrixXcd h1 = MatrixXcd::Zero(d, d);
  for (const TrigTerm& t : sanitize_terms(p)) {
    if (t.lambda.size() != static_cast<Eigen::Index>(X.size()))
      throw ShapeMismatch("operator_of_trig: lambda size does not match quadratures");
    MatrixXcd s = MatrixXcd::Zero(d, d);
    for (Eigen::Index j = 0; j < t.lambda.size(); ++j)
      s += t.lambda(j) * X[static_cast<std::size_t>(j)];
    const double r = t.r;
    const double phi = t.phi;
    h1 += hermitian_function(s, [r, phi](double z) { return Complex(r * std::cos(z + phi), 0.0); });
  }
  return 0.5 * (h1 + h1.adjoint());
}

// Z_j = i [H1, X_j].
inline std::vector<MatrixXcd> commutator_Z(const MatrixXcd& h1,
                                           const std::vector<MatrixXcd>& X) {
  std::vector<MatrixXcd> z;
  z.reserve(X.size());
  for (const MatrixXcd& xj : X) z.push_back(Complex(0, 1) * (h1 * xj - xj * h1));
  return z;
}

// Closed form Z = -2 sum_k r_k Theta lambda_k sin(lambda_k^T X + phi_k).
inline std::vector<MatrixXcd> z_ops_closed_form(const TrigPerturbation& p,
                                                const MatrixXd& theta,
                                                const std::vector<MatrixXcd>& X) {
  const Eigen::Index d = X.front().rows();
  std::vector<MatrixXcd> z(X.size(), MatrixXcd::Zero(d, d));
  for (const ZAtom& atom : z_atoms(p, theta)) {
    MatrixXcd s = MatrixXcd::Zero(d, d);
    for (Eigen::Index j = 0; j < atom.lambda.size(); ++j)
      s += atom.lambda(j) * X[static_cast<std::size_t>(j)];
    const double phi = atom.phi;
    const MatrixXcd sine =
        hermitian_function(s, [phi](double v) { return Complex(std::sin(v + phi), 0.0); });
    for (std::size_t j = 0; j < X.size(); ++j) z[j] += atom.coeff(static_cast<Eigen::Index>(j)) * sine;
  }
  return z;
}

// n x n array of D x D operators.
using BlockMatrix = std::vector<std::vector<MatrixXcd>>;

inline BlockMatrix zero_blocks(int n, Eigen::Index d) {
  return BlockMatrix(static_cast<std::size_t>(n),
                     std::vector<MatrixXcd>(static_cast<std::size_t>(n),
                                            MatrixXcd::Zero(d, d)));
}

// E = sum_atoms coeff * e^{i freq^T X} as an operator matrix.
inline BlockMatrix evaluate_matrix_spectrum(const MatrixAtomicSpectrum& ms,
                                            const std::vector<MatrixXcd>& X) {
  const Eigen::Index d = X.front().rows();
  BlockMatrix blocks = zero_blocks(ms.n, d);
  for (const MatrixAtom& atom : ms.atoms) {
    const MatrixXcd w = weyl_operator(atom.freq, X);
    for (int j = 0; j < ms.n; ++j)
      for (int l = 0; l < ms.n; ++l)
        blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] +=
            atom.coeff(j, l) * w;
  }
  return blocks;
}

// Z Z^T = 4 Theta E Theta with E from the convolution spectrum.
inline BlockMatrix assemble_zz(const MatrixAtomicSpectrum& ms, const MatrixXd& theta,
                               const std::vector<MatrixXcd>& X) {
  if (theta.rows() != ms.n)
    throw ShapeMismatch("assemble_zz: theta does not match spectrum dimension");
  const BlockMatrix e = evaluate_matrix_spectrum(ms, X);
  const Eigen::Index d = X.front().rows();
  BlockMatrix out = zero_blocks(ms.n, d);
  for (int j = 0; j < ms.n; ++j)
    for (int l = 0; l < ms.n; ++l) {
      MatrixXcd acc = MatrixXcd::Zero(d, d);
      for (int p = 0; p < ms.n; ++p)
        for (int q = 0; q < ms.n; ++q) {
          const double w = theta(j, p) * theta(q, l);
          if (w != 0.0)
            acc += w * e[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
        }
      out[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] = 4.0 * acc;
    }
  return out;
}

// (Z Z^T)_{jl} = Z_j Z_l computed directly from operator products.
inline BlockMatrix outer_blocks(const std::vector<MatrixXcd>& ops) {
  const int n = static_cast<int>(ops.size());
  const Eigen::Index d = ops.front().rows();
  BlockMatrix out = zero_blocks(n, d);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      out[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] =
          ops[static_cast<std::size_t>(j)] * ops[static_cast<std::size_t>(l)];
  return out;
}

// mu1 sum_k Gamma_k X X^T Gamma_k^T + mu0 I as an operator matrix (the
// gammas are Gamma_1..Gamma_d; the Gamma_0 term belongs to the LMI, not to
// the envelope inequality).
inline BlockMatrix envelope_blocks(const PerturbationEnvelope& env,
                                   const std::vector<MatrixXcd>& X) {
  const int n = env.n;
  if (n != static_cast<int>(X.size()))
    throw ShapeMismatch("envelope_blocks: envelope dimension does not match quadratures");
  const Eigen::Index d = X.front().rows();
  BlockMatrix xx = outer_blocks(X);
  BlockMatrix out = zero_blocks(n, d);
  for (const MatrixXd& g : env.gammas) {
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        MatrixXcd acc = MatrixXcd::Zero(d, d);
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) {
            const double w = g(j, p) * g(l, q);
            if (w != 0.0)
              acc += w * xx[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
          }
        out[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] += env.mu1 * acc;
      }
  }
  for (int j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] +=
        env.mu0 * MatrixXcd::Identity(d, d);
  return out;
}

inline BlockMatrix block_difference(const BlockMatrix& a, const BlockMatrix& b) {
  if (a.size() != b.size()) throw ShapeMismatch("block_difference: size mismatch");
  BlockMatrix out = a;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].size() != b[j].size()) throw ShapeMismatch("block_difference: size mismatch");
    for (std::size_t l = 0; l < a[j].size(); ++l) out[j][l] -= b[j][l];
  }
  return out;
}

// Checks g(K) - f(K) >= -tol via the shared eigendecomposition; sound
// whenever f <= g on the spectral range of K.
inline bool function_order_check(const std::function<double(double)>& f,
                                 const std::function<double(double)>& g,
                                 const MatrixXcd& k, double tol = 1e-12) {
  detail::require_hermitian(k, "function_order_check");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(k, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("function_order_check: eigendecomposition failed");
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double z = es.eigenvalues()(i);
    if (g(z) - f(z) < -tol) return false;
  }
  return true;
}

struct PositivitySample {
  double min_value = 0.0;
  double scale = 0.0;
  bool pass = false;
};

// Randomized block positivity: for unit complex vectors u, the operator
// sum_{jl} conj(u_j) u_l L_{jl} restricted to the truncation interior must
// have min eigenvalue >= -1e-6 * scale. One derived RNG stream per trial
// keeps the outcome independent of evaluation order.
inline PositivitySample block_positivity_sample(const BlockMatrix& blocks,
                                                const FockSpace& space,
                                                int trials = 1000,
                                                double interior_fraction = 0.6,
                                                std::uint64_t seed = 42) {
  const int n = static_cast<int>(blocks.size());
  if (n == 0) throw InvalidArgument("block_positivity_sample: empty block matrix");
  if (trials < 1) throw InvalidArgument("block_positivity_sample: trials must be positive");
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const MatrixXcd& jl = blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
      const MatrixXcd& lj = blocks[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
      if ((jl - lj.adjoint()).norm() > 1e-8 * (1.0 + jl.norm()))
        throw InvalidArgument(
            "block_positivity_sample: blocks are not Hermitian as an operator matrix");
    }

  const std::vector<Eigen::Index> idx = interior_indices(space, interior_fraction);
  std::vector<std::vector<MatrixXcd>> inner(static_cast<std::size_t>(n));
  double scale = 0.0;
  for (int j = 0; j < n; ++j) {
    inner[static_cast<std::size_t>(j)].reserve(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
      MatrixXcd pr = project_interior(
          blocks[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)], idx);
      scale = std::max(scale, pr.norm());
      inner[static_cast<std::size_t>(j)].push_back(std::move(pr));
    }
  }

  PositivitySample out;
  out.scale = scale;
  out.min_value = std::numeric_limits<double>::infinity();
  const Eigen::Index d = static_cast<Eigen::Index>(idx.size());
  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(trial)));
    const VectorXcd u = random_unit_complex(rng, n);
    MatrixXcd lu = MatrixXcd::Zero(d, d);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        lu += std::conj(u(j)) * u(l) *
              inner[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
    lu = 0.5 * (lu + lu.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(lu, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("block_positivity_sample: eigendecomposition failed");
    out.min_value = std::min(out.min_value, es.eigenvalues().minCoeff());
  }
  out.pass = out.min_value >= -1e-6 * std::max(out.scale, 1e-300);
  return out;
}

// Orthogonal O with O^T J O = diag(S2, ...). Exists iff the field Ito matrix
// is a rotated canonical form (all invariant blocks carry unit weight).
inline MatrixXd canonical_field_rotation(const MatrixXd& J, double tol = 1e-8) {
  if (!is_square(J) || J.rows() % 2 != 0)
    throw ShapeMismatch("canonical_field_rotation: J must be square of even dimension");
  const int m = static_cast<int>(J.rows());
  const MatrixXd target = canonical_theta(m);
  if ((J - target).norm() <= tol * (1.0 + J.norm())) return MatrixXd::Identity(m, m);

  Eigen::RealSchur<MatrixXd> schur(J);
  if (schur.info() != Eigen::Success)
    throw NumericalFailure("canonical_field_rotation: Schur decomposition failed");
  MatrixXd u = schur.matrixU();
  const MatrixXd& t = schur.matrixT();
  for (int k = 0; k + 1 < m; k += 2) {
    if (t(k, k + 1) < 0.0) u.col(k).swap(u.col(k + 1));
  }
  if ((u.transpose() * J * u - target).norm() > tol * (1.0 + J.norm()))
    throw PhysicallyInconsistent(
        "field Ito matrix J is not an orthogonal rotation of the canonical form; no "
        "vacuum jump-operator realization exists");
  return u;
}

// Matrix realization of the model: quadratures, Hamiltonians, paired complex
// jump operators c_j = (M'X)_{2j-1} + i (M'X)_{2j} with M' = O^T M after the
// field rotation, and the state.
struct FockModel {
  FockSpace space;
  std::vector<MatrixXcd> X;
  MatrixXcd H0;
  MatrixXcd H1;
  std::vector<MatrixXcd> L;
  MatrixXcd rho;
};

inline MatrixXcd vacuum_state(const FockSpace& space) {
  MatrixXcd rho = MatrixXcd::Zero(space.dim(), space.dim());
  rho(0, 0) = 1.0;
  return rho;
}

// |alpha><alpha| for one complex amplitude per mode, built by exponentiating
// the displacement generator and truncating.
inline MatrixXcd coherent_state(const FockSpace& space, const VectorXcd& alphas) {
  if (alphas.size() != space.modes)
    throw ShapeMismatch("coherent_state: need one amplitude per mode");
  VectorXcd psi;
  for (int mode = 0; mode < space.modes; ++mode) {
    const MatrixXcd a = lowering(space.cutoff);
    const Complex alpha = alphas(mode);
    const MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
    // exp(gen) = exp(i h) with h = -i*gen Hermitian.
    const MatrixXcd h = Complex(0, -1) * gen;
    const MatrixXcd disp =
        hermitian_function(h, [](double z) { return std::exp(Complex(0.0, z)); });
    VectorXcd mode_psi = disp.col(0);
    mode_psi /= mode_psi.norm();
    if (mode == 0) {
      psi = mode_psi;
    } else {
      VectorXcd joint(psi.size() * mode_psi.size());
      for (Eigen::Index i = 0; i < psi.size(); ++i)
        joint.segment(i * mode_psi.size(), mode_psi.size()) = psi(i) * mode_psi;
      psi = joint;
    }
  }
  return psi * psi.adjoint();
}

inline void validate_density(const MatrixXcd& rho, const FockSpace& space) {
  if (rho.rows() != space.dim() || rho.cols() != space.dim())
    throw ShapeMismatch("density matrix does not match the Fock space dimension");
  if ((rho - rho.adjoint()).norm() > 1e-10 * (1.0 + rho.norm()))
    throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-10)
    throw InvalidArgument("density matrix trace is not 1");
  if (min_eigenvalue_herm(rho) < -1e-10)
    throw InvalidArgument("density matrix is not positive semi-definite");
}

inline FockModel build_model(const QuantumLinearSystem& sys, const TrigPerturbation& p,
                             const FockSpace& space, const MatrixXcd& rho0) {
  require_canonical_theta(sys.theta);
  if (sys.n != space.quadratures())
    throw ShapeMismatch("system has " + std::to_string(sys.n) +
                        " variables but the Fock space provides " +
                        std::to_string(space.quadratures()));
  validate_density(rho0, space);

  FockModel model;
  model.space = space;
  model.X = build_quadratures(space);
  model.rho = rho0;

  const Eigen::Index d = space.dim();
  model.H0 = MatrixXcd::Zero(d, d);
  for (int a = 0; a < sys.n; ++a)
    for (int b = 0; b < sys.n; ++b)
      if (sys.R(a, b) != 0.0)
        model.H0 += 0.5 * sys.R(a, b) *
                    (model.X[static_cast<std::size_t>(a)] * model.X[static_cast<std::size_t>(b)]);
  model.H0 = 0.5 * (model.H0 + model.H0.adjoint()).eval();

  model.H1 = operator_of_trig(p, model.X);

  const MatrixXd rot = canonical_field_rotation(sys.J);
  const MatrixXd m_rot = rot.transpose() * sys.M;
  for (int j = 0; j + 1 < sys.m; j += 2) {
    MatrixXcd l1 = MatrixXcd::Zero(d, d);
    MatrixXcd l2 = MatrixXcd::Zero(d, d);
    for (int b = 0; b < sys.n; ++b) {
      if (m_rot(j, b) != 0.0) l1 += m_rot(j, b) * model.X[static_cast<std::size_t>(b)];
      if (m_rot(j + 1, b) != 0.0) l2 += m_rot(j + 1, b) * model.X[static_cast<std::size_t>(b)];
    }
    model.L.push_back(l1 + Complex(0, 1) * l2);
  }
  return model;
}

struct EvolveOptions {
  double dt = 1e-3;
  double trace_tol = 1e-6;
  double leak_tol = 1e-4;
  std::optional<MatrixXd> Pi;  // attach a certificate weight to record V
};

struct Trajectory {
  std::vector<double> times;
  std::vector<MatrixXd> P;            // Re E(X X^T)
  std::vector<VectorXd> mean;         // Re E(X)
  std::vector<double> V;              // <Pi, P>, present when Pi attached
  std::vector<double> trace_error;    // max |Tr rho - 1| seen since last sample
};

namespace detail {

inline MatrixXcd gksl_rhs(const MatrixXcd& rho, const MatrixXcd& h,
                          const std::vector<MatrixXcd>& jumps,
                          const std::vector<MatrixXcd>& jump_grams) {
  MatrixXcd out = Complex(0, -1) * (h * rho - rho * h);
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    out += jumps[j] * rho * jumps[j].adjoint();
    out -= 0.5 * (jump_grams[j] * rho + rho * jump_grams[j]);
  }
  return out;
}

}  // namespace detail

// Fixed-step RK4 integration of the GKSL master equation
//   rho' = -i[H0 + H1, rho] + sum_j (c_j rho c_j^dag - 1/2 {c_j^dag c_j, rho})
// sampled on t_grid. Guards: trace drift beyond trace_tol aborts (the step
// size is too coarse or the state left the truncation), and population in
// the top 10% of Fock levels beyond leak_tol aborts with advice to raise the
// cutoff.
inline Trajectory lindblad_evolve(const QuantumLinearSystem& sys,
                                  const TrigPerturbation& p, const FockSpace& space,
                                  const MatrixXcd& rho0,
                                  const std::vector<double>& t_grid,
                                  const EvolveOptions& opts = {}) {
  if (t_grid.empty()) throw InvalidArgument("lindblad_evolve: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw InvalidArgument("lindblad_evolve: times must be nonnegative ascending");
  if (!(opts.dt > 0.0)) throw InvalidArgument("lindblad_evolve: dt must be positive");

  FockModel model = build_model(sys, p, space, rho0);
  const MatrixXcd h = model.H0 + model.H1;
  std::vector<MatrixXcd> grams;
  grams.reserve(model.L.size());
  for (const MatrixXcd& c : model.L) grams.push_back(c.adjoint() * c);
  if (opts.Pi && (opts.Pi->rows() != sys.n || opts.Pi->cols() != sys.n))
    throw ShapeMismatch("lindblad_evolve: Pi must match the system dimension");

  const int top_start = (9 * space.cutoff) / 10;
  const Eigen::Index dim = space.dim();

  Trajectory traj;
  traj.times = t_grid;
  traj.P.reserve(t_grid.size());
  traj.mean.reserve(t_grid.size());
  traj.trace_error.reserve(t_grid.size());

  MatrixXcd rho = model.rho;
  double max_drift = 0.0;

  auto sample = [&](double drift) {
    MatrixXd pmat(sys.n, sys.n);
    for (int a = 0; a < sys.n; ++a)
      for (int b = 0; b < sys.n; ++b)
        pmat(a, b) = (rho * model.X[static_cast<std::size_t>(a)] *
                      model.X[static_cast<std::size_t>(b)])
                         .trace()
                         .real();
    pmat = symmetrize(pmat);
    VectorXd mu(sys.n);
    for (int a = 0; a < sys.n; ++a)
      mu(a) = (rho * model.X[static_cast<std::size_t>(a)]).trace().real();
    double leak = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      bool top = false;
      for (int mode = 0; mode < space.modes; ++mode)
        if (space.level(i, mode) >= top_start) top = true;
      if (top) leak += rho(i, i).real();
    }
    if (leak > opts.leak_tol)
      throw CutoffLeak("population " + std::to_string(leak) +
                       " in the top Fock levels exceeds " + std::to_string(opts.leak_tol) +
                       "; raise the cutoff");
    traj.P.push_back(pmat);
    traj.mean.push_back(mu);
    traj.trace_error.push_back(drift);
    if (opts.Pi) traj.V.push_back(frobenius_inner(*opts.Pi, pmat));
  };

  sample(std::abs(rho.trace().real() - 1.0));

  for (std::size_t seg = 0; seg + 1 < t_grid.size(); ++seg) {
    const double span = t_grid[seg + 1] - t_grid[seg];
    const int nsub = std::max(1, static_cast<int>(std::ceil(span / opts.dt)));
    const double hstep = span / nsub;
    max_drift = 0.0;
    for (int s = 0; s < nsub; ++s) {
      const MatrixXcd k1 = detail::gksl_rhs(rho, h, model.L, grams);
      const MatrixXcd k2 = detail::gksl_rhs(rho + 0.5 * hstep * k1, h, model.L, grams);
      const MatrixXcd k3 = detail::gksl_rhs(rho + 0.5 * hstep * k2, h, model.L, grams);
      const MatrixXcd k4 = detail::gksl_rhs(rho + hstep * k3, h, model.L, grams);
      rho += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho = 0.5 * (rho + rho.adjoint()).eval();
      const double tr = rho.trace().real();
      const double drift = std::abs(tr - 1.0);
      max_drift = std::max(max_drift, drift);
      if (drift > opts.trace_tol)
        throw TraceDrift("trace drifted by " + std::to_string(drift) +
                         "; reduce dt or raise the cutoff");
      rho /= tr;
    }
    sample(max_drift);
  }
  return traj;
}

inline double weighted_mean_square(const MatrixXd& Pi, const MatrixXd& P) {
  return frobenius_inner(Pi, P);
}

// Max over interior grid points of dV/dt - (-gamma V + c), central
// differences; c defaults to gamma * ms_bound for a certificate.
inline double dissipation_residual(const Trajectory& traj, double gamma, double c) {
  if (traj.V.size() != traj.times.size() || traj.V.size() < 3)
    throw InvalidArgument("dissipation_residual: trajectory must carry V on 3+ points");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < traj.V.size(); ++i) {
    const double dv =
        (traj.V[i + 1] - traj.V[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
    worst = std::max(worst, dv - (-gamma * traj.V[i] + c));
  }
  return worst;
}

inline double dissipation_residual(const Trajectory& traj,
                                   const StabilityCertificate& cert) {
  return dissipation_residual(traj, cert.gamma, cert.gamma * cert.ms_bound);
}

// CSV columns: t, V, envelope, P entries row-major, trace error.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const std::vector<double>& envelope) {
  if (traj.V.size() != traj.times.size())
    throw InvalidArgument("write_trajectory_csv: trajectory carries no V column");
  if (envelope.size() != traj.times.size())
    throw InvalidArgument("write_trajectory_csv: envelope length mismatch");
  const Eigen::Index n = traj.P.front().rows();
  os << "t,V,envelope";
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) os << ",P" << a << b;
  os << ",trace_error\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i] << ',' << traj.V[i] << ',' << envelope[i];
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) os << ',' << traj.P[i](a, b);
    os << ',' << traj.trace_error[i] << '\n';
  }
}

}  // namespace qrstab::fock

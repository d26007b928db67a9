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
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrstab/errors.hpp"
#include "qrstab/linalg.hpp"

namespace qrstab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// One cosine term r*cos(lambda^T X + phi) of the perturbation Hamiltonian.
// Phases are canonicalized into [0, 2*pi); the constant-offset bound mu0
// below grows with phi^2, so callers wanting tight envelopes should phrase
// phases near zero.
struct TrigTerm {
  double r = 0.0;
  VectorXd lambda;
  double phi = 0.0;
};

using TrigPerturbation = std::vector<TrigTerm>;

// Drops terms that cannot influence the dynamics: r == 0 silently,
// lambda == 0 (a constant in the Hamiltonian commutes with everything)
// with a warning. Negative amplitudes are rejected; fold the sign into the
// phase instead. Phases are reduced modulo 2*pi.
inline TrigPerturbation sanitize_terms(const TrigPerturbation& terms,
                                       std::vector<std::string>* warnings = nullptr) {
  TrigPerturbation out;
  out.reserve(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const TrigTerm& t = terms[k];
    if (t.r < 0.0)
      throw InvalidPerturbation("term " + std::to_string(k) +
                                " has negative amplitude; use phi += pi instead");
    if (!std::isfinite(t.r) || !t.lambda.allFinite() || !std::isfinite(t.phi))
      throw InvalidPerturbation("term " + std::to_string(k) + " has non-finite entries");
    if (t.r == 0.0) continue;
    if (t.lambda.size() == 0 || t.lambda.norm() == 0.0) {
      if (warnings)
        warnings->push_back("term " + std::to_string(k) +
                            " has zero frequency (constant Hamiltonian offset); dropped");
      continue;
    }
    TrigTerm c = t;
    c.phi = std::fmod(t.phi, kTwoPi);
    if (c.phi < 0.0) c.phi += kTwoPi;
    out.push_back(std::move(c));
  }
  return out;
}

// Dirac-comb Fourier transform h(lambda) = sum coeff * delta(lambda - freq).
struct SpectrumAtom {
  std::complex<double> coeff;
  VectorXd freq;
};

namespace detail {

inline bool freq_close(const VectorXd& a, const VectorXd& b, double tol) {
  return a.size() == b.size() && (a - b).norm() <= tol;
}

}  // namespace detail

// Enforces Hermitian symmetry on construction: a real Hamiltonian requires
// an atom (conj(c), -f) for every atom (c, f).
class AtomicSpectrum {
 public:
  AtomicSpectrum() = default;

  explicit AtomicSpectrum(std::vector<SpectrumAtom> atoms) : atoms_(std::move(atoms)) {
    constexpr double tol = 1e-12;
    for (const auto& a : atoms_) {
      bool matched = false;
      for (const auto& b : atoms_) {
        if (detail::freq_close(b.freq, VectorXd(-a.freq), tol) &&
            std::abs(b.coeff - std::conj(a.coeff)) <= tol) {
          matched = true;
          break;
        }
      }
      if (!matched)
        throw InvalidPerturbation(
            "atomic spectrum is not Hermitian symmetric; the Hamiltonian would not be "
            "self-adjoint");
    }
  }

  const std::vector<SpectrumAtom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::vector<SpectrumAtom> atoms_;
};

// h for sum_k r_k cos(lambda_k^T X + phi_k): each term contributes the pair
// (r_k/2 e^{+i phi_k}, +lambda_k), (r_k/2 e^{-i phi_k}, -lambda_k).
inline AtomicSpectrum to_spectrum(const TrigPerturbation& p) {
  const TrigPerturbation terms = sanitize_terms(p);
  std::vector<SpectrumAtom> atoms;
  atoms.reserve(2 * terms.size());
  for (const TrigTerm& t : terms) {
    const std::complex<double> half_a =
        0.5 * t.r * std::exp(std::complex<double>(0.0, t.phi));
    atoms.push_back({half_a, t.lambda});
    atoms.push_back({std::conj(half_a), -t.lambda});
  }
  return AtomicSpectrum(std::move(atoms));
}

// One summand of the perturbation drift, Z_k = coeff * sin(lambda^T X + phi)
// with coeff = -2 r_k Theta lambda_k.
struct ZAtom {
  VectorXd coeff;
  VectorXd lambda;
  double phi = 0.0;
};

// Decomposition Z = sum_k Z_k. Assumes theta is antisymmetric nonsingular.
inline std::vector<ZAtom> z_atoms(const TrigPerturbation& p, const MatrixXd& theta) {
  const TrigPerturbation terms = sanitize_terms(p);
  std::vector<ZAtom> out;
  out.reserve(terms.size());
  for (const TrigTerm& t : terms) {
    if (t.lambda.size() != theta.rows())
      throw ShapeMismatch("z_atoms: lambda has size " + std::to_string(t.lambda.size()) +
                          " but theta is " + std::to_string(theta.rows()) + "x" +
                          std::to_string(theta.cols()));
    out.push_back({-2.0 * t.r * (theta * t.lambda), t.lambda, t.phi});
  }
  return out;
}

// Matrix-valued Dirac comb, sum coeff * delta(lambda - freq) with coeff an
// n x n complex matrix.
struct MatrixAtom {
  MatrixXcd coeff;
  VectorXd freq;
};

struct MatrixAtomicSpectrum {
  std::vector<MatrixAtom> atoms;
  int n = 0;

  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }
};

// Discrete convolution giving the spectrum of the symmetrized product:
// for atoms (c1, f1), (c2, f2) of h, emit
//   (c1 c2 * f1 f2^T * e^{i f2^T Theta (f1+f2)}, f1 + f2),
// then merge atoms with coincident frequencies (tolerance 1e-12 absolute).
// The operator Z Z^T equals 4 Theta E Theta with E the evaluation of the
// returned spectrum.
inline MatrixAtomicSpectrum zz_spectrum(const AtomicSpectrum& h, const MatrixXd& theta) {
  constexpr double merge_tol = 1e-12;
  MatrixAtomicSpectrum out;
  out.n = static_cast<int>(theta.rows());
  for (const SpectrumAtom& a1 : h.atoms()) {
    for (const SpectrumAtom& a2 : h.atoms()) {
      if (a1.freq.size() != theta.rows() || a2.freq.size() != theta.rows())
        throw ShapeMismatch("zz_spectrum: frequency size does not match theta");
      const VectorXd freq = a1.freq + a2.freq;
      const double phase = a2.freq.dot(theta * freq);
      const MatrixXcd coeff = a1.coeff * a2.coeff *
                              std::exp(std::complex<double>(0.0, phase)) *
                              (a1.freq * a2.freq.transpose()).cast<std::complex<double>>();
      bool merged = false;
      for (MatrixAtom& existing : out.atoms) {
        if (detail::freq_close(existing.freq, freq, merge_tol)) {
          existing.coeff += coeff;
          merged = true;
          break;
        }
      }
      if (!merged) out.atoms.push_back({coeff, freq});
    }
  }
  return out;
}

// Free parameters of the envelope family: one omega_k per trig term and the
// symmetric positive coupling weights nu_jk of the cross-term bound.
struct FreeParameters {
  std::vector<double> omegas;
  MatrixXd nus;

  static FreeParameters defaults(int d) {
    FreeParameters fp;
    fp.omegas.assign(static_cast<std::size_t>(d), 1.0);
    fp.nus = MatrixXd::Ones(d, d);
    return fp;
  }
};

// sigma_k = 1 + sum_{j<k} nu_jk + sum_{j>k} 1/nu_jk (1-based k in the
// formula; zero-based storage).
inline std::vector<double> sigma_coefficients(const FreeParameters& params, int d) {
  if (d < 1) throw MissingParameter("sigma_coefficients: d must be at least 1");
  if (params.nus.rows() < d || params.nus.cols() < d)
    throw MissingParameter("sigma_coefficients: nus must be at least " + std::to_string(d) +
                           "x" + std::to_string(d));
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      const double v = params.nus(j, k);
      if (!(v > 0.0))
        throw InvalidPerturbation("sigma_coefficients: nu(" + std::to_string(j) + "," +
                                  std::to_string(k) + ") must be positive");
      if (std::abs(params.nus(k, j) - v) > 1e-14 * (1.0 + std::abs(v)))
        throw SymmetryViolation("sigma_coefficients: nus must be symmetric");
    }
  std::vector<double> sigma(static_cast<std::size_t>(d), 1.0);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < k; ++j) sigma[k] += params.nus(j, k);
    for (int j = k + 1; j < d; ++j) sigma[k] += 1.0 / params.nus(j, k);
  }
  return sigma;
}

// Envelope of Z Z^T by matrices Gamma_0..Gamma_d and offset mu0:
//   Z Z^T <= mu1 * sum_k Gamma_k X X^T Gamma_k^T + mu0 * I,
// with Gamma_0 = sqrt(mu1) * I always.
struct PerturbationEnvelope {
  int n = 0;
  double mu1 = 0.0;
  double mu0 = 0.0;
  std::vector<MatrixXd> gammas;  // Gamma_1 .. Gamma_d

  int d() const { return static_cast<int>(gammas.size()); }
  MatrixXd gamma0() const { return std::sqrt(mu1) * MatrixXd::Identity(n, n); }
};

// Single cosine with zero phase: Gamma_1 = (2/sqrt(mu1)) Theta lambda0 lambda0^T,
// mu0 = 0.
inline PerturbationEnvelope envelope_single_cos(const VectorXd& lambda0,
                                                const MatrixXd& theta, double mu1) {
  if (!(mu1 > 0.0)) throw NonPositiveMu1("mu1 must be positive, got " + std::to_string(mu1));
  if (lambda0.size() == 0 || lambda0.norm() == 0.0)
    throw InvalidPerturbation("lambda0 must be nonzero");
  if (lambda0.size() != theta.rows())
    throw ShapeMismatch("envelope_single_cos: lambda0 size does not match theta");
  PerturbationEnvelope env;
  env.n = static_cast<int>(theta.rows());
  env.mu1 = mu1;
  env.mu0 = 0.0;
  const MatrixXd base = (theta * lambda0) * lambda0.transpose();
  env.gammas.push_back((2.0 / std::sqrt(mu1)) * base);
  return env;
}

// One additive block of the per-term decomposition, Z_k bounded through
// c_k * Phi_k with constant offset mu0k.
struct EnvelopePart {
  double c = 1.0;
  MatrixXd Phi;
  double mu0k = 0.0;
};

// Per-term envelope blocks for a trigonometric perturbation:
//   Phi_k  = 2 r_k sqrt((1+omega_k)/mu1) Theta lambda_k lambda_k^T
//   mu0k   = 4 r_k^2 phi_k^2 (1+omega_k)/omega_k * |Theta lambda_k|^2
// For phi_k = 0 the omega_k -> 0 limit applies: the amplification factor is
// 1 and mu0k = 0, recovering the single-cosine form.
inline std::vector<EnvelopePart> trig_parts(const TrigPerturbation& terms,
                                            const MatrixXd& theta, double mu1,
                                            const std::vector<double>& omegas) {
  if (!(mu1 > 0.0)) throw NonPositiveMu1("mu1 must be positive, got " + std::to_string(mu1));
  if (omegas.size() < terms.size())
    throw MissingParameter("need one omega per trig term (" + std::to_string(terms.size()) +
                           " terms, " + std::to_string(omegas.size()) + " omegas)");
  std::vector<EnvelopePart> parts;
  parts.reserve(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const TrigTerm& t = terms[k];
    if (t.lambda.size() != theta.rows())
      throw ShapeMismatch("trig_parts: lambda size does not match theta");
    const double omega = omegas[k];
    if (!(omega > 0.0))
      throw InvalidPerturbation("omega(" + std::to_string(k) + ") must be positive");
    EnvelopePart part;
    part.c = 1.0;
    const MatrixXd base = (theta * t.lambda) * t.lambda.transpose();
    if (t.phi == 0.0) {
      part.Phi = (2.0 * t.r / std::sqrt(mu1)) * base;
      part.mu0k = 0.0;
    } else {
      part.Phi = 2.0 * t.r * std::sqrt((1.0 + omega) / mu1) * base;
      part.mu0k = 4.0 * t.r * t.r * t.phi * t.phi * (1.0 + omega) / omega *
                  (theta * t.lambda).squaredNorm();
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

// Combines blocks via sigma_k: Gamma_k = sqrt(sigma_k) c_k Phi_k and
// mu0 = sum_k sigma_k c_k^2 mu0k.
inline PerturbationEnvelope combine_envelopes(const std::vector<EnvelopePart>& parts,
                                              double mu1, const FreeParameters& params) {
  if (!(mu1 > 0.0)) throw NonPositiveMu1("mu1 must be positive, got " + std::to_string(mu1));
  if (parts.empty()) throw MissingParameter("combine_envelopes: no envelope parts");
  const int d = static_cast<int>(parts.size());
  const std::vector<double> sigma = sigma_coefficients(params, d);
  PerturbationEnvelope env;
  env.n = static_cast<int>(parts.front().Phi.rows());
  env.mu1 = mu1;
  env.mu0 = 0.0;
  env.gammas.reserve(parts.size());
  for (int k = 0; k < d; ++k) {
    const EnvelopePart& part = parts[static_cast<std::size_t>(k)];
    if (part.Phi.rows() != env.n || part.Phi.cols() != env.n)
      throw ShapeMismatch("combine_envelopes: inconsistent Phi shapes");
    env.gammas.push_back(std::sqrt(sigma[static_cast<std::size_t>(k)]) * part.c * part.Phi);
    env.mu0 += sigma[static_cast<std::size_t>(k)] * part.c * part.c * part.mu0k;
  }
  return env;
}

// Full envelope for a trigonometric perturbation with c_k = 1.
inline PerturbationEnvelope envelope_trig(const TrigPerturbation& p, const MatrixXd& theta,
                                          double mu1, const FreeParameters& params) {
  const TrigPerturbation terms = sanitize_terms(p);
  if (terms.empty())
    throw InvalidPerturbation("envelope_trig: perturbation has no effective terms");
  const int d = static_cast<int>(terms.size());
  if (params.omegas.size() < static_cast<std::size_t>(d))
    throw MissingParameter("envelope_trig: need " + std::to_string(d) + " omegas, got " +
                           std::to_string(params.omegas.size()));
  return combine_envelopes(trig_parts(terms, theta, mu1, params.omegas), mu1, params);
}

inline PerturbationEnvelope envelope_trig(const TrigPerturbation& p, const MatrixXd& theta,
                                          double mu1) {
  const TrigPerturbation terms = sanitize_terms(p);
  if (terms.empty())
    throw InvalidPerturbation("envelope_trig: perturbation has no effective terms");
  return envelope_trig(terms, theta, mu1,
                       FreeParameters::defaults(static_cast<int>(terms.size())));
}

}  // namespace qrstab

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

// Release acceptance harness. Each criterion prints a single
// [PASS]/[FAIL] line with its measured margins and wall time; the binary
// exits nonzero if any criterion fails. Pass a criterion number as the
// only argument to run just that one.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qrstab/qrstab.hpp"
#include "test_support.hpp"

namespace {

using namespace qrstab;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(2) << v;
  return ss.str();
}

// --------------------------------------------------------------------------
// 1. Realizability identity on random valid systems.

Outcome criterion_realizability() {
  SplitMix64 rng(1001);
  const int dims[3] = {2, 4, 6};
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = dims[rng.next_u64() % 3];
    const int m = dims[rng.next_u64() % 3];
    const QuantumLinearSystem sys = test::random_valid_system(rng, n, m);
    const double resid = (sys.A * sys.theta + sys.theta * sys.A.transpose() +
                          sys.B * sys.J * sys.B.transpose())
                             .norm();
    const double bound = 1e-10 * (1.0 + sys.A.norm() * sys.theta.norm());
    worst = std::max(worst, resid / bound);
  }
  Outcome out;
  out.pass = worst <= 1.0;
  out.detail = "200 systems, worst residual at " + sci(worst) + "x the bound";
  return out;
}

// --------------------------------------------------------------------------
// 2. Steady covariance: Im S = theta and small Lyapunov residual. The
// moments are re-derived here through an independent complex Kronecker
// solve; nominal_steady_covariance is also run so its internal gates fire.

Outcome criterion_theta_consistency() {
  SplitMix64 rng(1002);
  const int dims[3] = {2, 4, 6};
  double worst_im = 0.0;
  double worst_res = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = dims[rng.next_u64() % 3];
    const int m = dims[rng.next_u64() % 3];
    // Moderate coupling and a clean stability margin keep the Sylvester
    // solve far from its conditioning limits.
    const QuantumLinearSystem sys =
        test::random_physical_hurwitz_system(rng, n, m, 0.25);

    const SecondMomentMatrix moments = nominal_steady_covariance(sys);

    const std::complex<double> iu(0.0, 1.0);
    const MatrixXcd omega =
        MatrixXd::Identity(sys.m, sys.m).cast<std::complex<double>>() +
        iu * sys.J.cast<std::complex<double>>();
    const MatrixXcd rhs = sys.B.cast<std::complex<double>>() * omega *
                          sys.B.transpose().cast<std::complex<double>>();
    const MatrixXcd eye = MatrixXcd::Identity(sys.n, sys.n);
    const MatrixXcd ac = sys.A.cast<std::complex<double>>();
    const MatrixXcd op = kron(eye, ac) + kron(ac, eye);
    const VectorXcd svec = op.colPivHouseholderQr().solve(-vec(rhs));
    const MatrixXcd s = unvec(svec, sys.n, sys.n);

    worst_im = std::max(worst_im, (s.imag() - sys.theta).norm());
    worst_res = std::max(
        worst_res, (ac * s + s * ac.transpose() + rhs).norm() / rhs.norm());
    if ((moments.P - s.real()).norm() > 1e-8 * (1.0 + moments.P.norm()))
      return {false, "library and reference real parts disagree"};
  }
  Outcome out;
  out.pass = worst_im <= 1e-8 && worst_res <= 1e-9;
  out.detail = "50 instances, max |Im S - theta| = " + sci(worst_im) +
               ", max relative residual = " + sci(worst_res);
  return out;
}

// --------------------------------------------------------------------------
// 3. Hand-computed certificate chain for the desk instance.

Outcome criterion_desk_chain() {
  const QuantumLinearSystem sys = test::desk_system();
  VectorXd lam(2);
  lam << 1.0 / std::sqrt(2.0), 0.0;
  const PerturbationEnvelope env = envelope_single_cos(lam, sys.theta, 1.0);

  MatrixXd gamma_expected(2, 2);
  gamma_expected << 0.0, 0.0, -1.0, 0.0;
  const double gamma_err = (env.gammas.at(0) - gamma_expected).norm();

  const SylvesterOperatorMatrix op = operator_matrix(sys.A, env);
  Eigen::EigenSolver<MatrixXd> es(op.K);
  double eig_err = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    eig_err = std::max(eig_err,
                       std::abs(es.eigenvalues()(i) - std::complex<double>(-3.0, 0.0)));
  const double margin_err = std::abs(decay_margin(op) - 3.0);

  const StabilityCertificate cert = solve_certificate(sys, env, 2.0);
  MatrixXd pi_expected(2, 2);
  pi_expected << 2.0, 0.0, 0.0, 1.0;
  const double pi_err = (cert.Pi - pi_expected).norm();
  const double ms_err = std::abs(cert.ms_bound - 6.0);

  Outcome out;
  out.pass = gamma_err <= 1e-9 && eig_err <= 1e-9 && margin_err <= 1e-9 &&
             pi_err <= 1e-9 && ms_err <= 1e-9;
  out.detail = "|Gamma err| = " + sci(gamma_err) + ", max |eig(K)+3| = " + sci(eig_err) +
               ", |gamma*-3| = " + sci(margin_err) + ", |Pi-diag(2,1)| = " + sci(pi_err) +
               ", |ms-6| = " + sci(ms_err);
  return out;
}

// --------------------------------------------------------------------------
// 4. Commutator identity against the closed-form drift at cutoff 40.

Outcome criterion_commutator_identity() {
  const fock::FockSpace space(1, 40);
  const std::vector<MatrixXcd> X = fock::build_quadratures(space);
  const MatrixXd theta = fock::canonical_theta(2);
  const auto idx = fock::interior_indices(space, 0.6);

  SplitMix64 rng(1004);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    VectorXd lam(2);
    lam << rng.next_gaussian(), rng.next_gaussian();
    lam *= rng.uniform(0.2, 1.0) / lam.norm();
    const TrigPerturbation p{{1.0, lam, 0.0}};

    const MatrixXcd h1 = fock::operator_of_trig(p, X);
    const std::vector<MatrixXcd> z_comm = fock::commutator_Z(h1, X);
    const std::vector<MatrixXcd> z_closed = fock::z_ops_closed_form(p, theta, X);

    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t j = 0; j < X.size(); ++j) {
      diff += fock::project_interior(z_comm[j] - z_closed[j], idx).squaredNorm();
      ref += fock::project_interior(z_closed[j], idx).squaredNorm();
    }
    worst = std::max(worst, std::sqrt(diff) / (1e-6 * std::sqrt(ref)));
  }
  Outcome out;
  out.pass = worst <= 1.0;
  out.detail = "10 frequencies, worst defect at " + sci(worst) + "x tolerance";
  return out;
}

// --------------------------------------------------------------------------
// 5. Convolution spectrum against the direct operator product at cutoff 40.

Outcome criterion_convolution() {
  const fock::FockSpace space(1, 40);
  const std::vector<MatrixXcd> X = fock::build_quadratures(space);
  const MatrixXd theta = fock::canonical_theta(2);
  const auto idx = fock::interior_indices(space, 0.6);

  SplitMix64 rng(1005);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const double scale = rng.uniform(0.3, 0.8);
    const TrigPerturbation p = test::random_terms(rng, 2, 2, scale);
    const fock::BlockMatrix direct =
        fock::outer_blocks(fock::z_ops_closed_form(p, theta, X));
    const fock::BlockMatrix assembled =
        fock::assemble_zz(zz_spectrum(to_spectrum(p), theta), theta, X);

    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t l = 0; l < 2; ++l) {
        diff += fock::project_interior(assembled[j][l] - direct[j][l], idx).squaredNorm();
        ref += fock::project_interior(direct[j][l], idx).squaredNorm();
      }
    worst = std::max(worst, std::sqrt(diff) / (1e-6 * std::sqrt(ref)));
  }
  Outcome out;
  out.pass = worst <= 1.0;
  out.detail = "5 two-term perturbations, worst defect at " + sci(worst) + "x tolerance";
  return out;
}

// --------------------------------------------------------------------------
// 6. Envelope operator inequality via randomized block positivity, plus the
// corrupted-Gamma negative control.

Outcome criterion_envelope_validity() {
  const fock::FockSpace space(1, 40);
  const std::vector<MatrixXcd> X = fock::build_quadratures(space);
  const MatrixXd theta = fock::canonical_theta(2);

  const auto dominance_blocks = [&](const PerturbationEnvelope& env,
                                    const TrigPerturbation& p) {
    return fock::block_difference(
        fock::envelope_blocks(env, X),
        fock::outer_blocks(fock::z_ops_closed_form(p, theta, X)));
  };

  VectorXd lam1(2);
  lam1 << 1.0 / std::sqrt(2.0), 0.0;
  const TrigPerturbation p1{{1.0, lam1, 0.0}};
  const PerturbationEnvelope env1 = envelope_single_cos(lam1, theta, 1.0);
  const fock::PositivitySample s1 =
      fock::block_positivity_sample(dominance_blocks(env1, p1), space, 1000, 0.6, 42);

  VectorXd lam2(2);
  lam2 << 1.0, 0.0;
  const TrigPerturbation p2{{1.0, lam2, M_PI / 4.0}};
  const PerturbationEnvelope env2 =
      envelope_trig(p2, theta, 1.0, FreeParameters::defaults(1));
  const fock::PositivitySample s2 =
      fock::block_positivity_sample(dominance_blocks(env2, p2), space, 1000, 0.6, 42);

  PerturbationEnvelope corrupted = env1;
  corrupted.gammas[0] *= 0.5;
  const fock::PositivitySample s3 =
      fock::block_positivity_sample(dominance_blocks(corrupted, p1), space, 1000, 0.6, 42);

  Outcome out;
  out.pass = s1.pass && s2.pass && !s3.pass;
  out.detail = "zero-phase min = " + sci(s1.min_value) + ", quarter-pi min = " +
               sci(s2.min_value) + ", corrupted control min = " + sci(s3.min_value) +
               (s3.pass ? " (control not detected)" : "");
  return out;
}

// --------------------------------------------------------------------------
// 7. Trajectory conformance: Gronwall envelope for the perturbed desk
// instance from vacuum, and the first-moment convention on the nominal flow.

Outcome criterion_trajectory() {
  const QuantumLinearSystem sys = test::desk_system();
  VectorXd lam(2);
  lam << 1.0 / std::sqrt(2.0), 0.0;
  const TrigPerturbation p{{1.0, lam, 0.0}};
  const PerturbationEnvelope env = envelope_single_cos(lam, sys.theta, 1.0);
  const StabilityCertificate cert = solve_certificate(sys, env, 2.0);

  const fock::FockSpace space(1, 40);
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(5.0 * i / 50.0);
  fock::EvolveOptions opts;
  opts.Pi = cert.Pi;
  const fock::Trajectory traj =
      fock::lindblad_evolve(sys, p, space, fock::vacuum_state(space), grid, opts);

  const double v0 = traj.V.front();
  const double scale = std::max({v0, cert.ms_bound, 1.0});
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double decay = std::exp(-cert.gamma * grid[i]);
    const double bound = v0 * decay + cert.ms_bound * (1.0 - decay) + 1e-3 * scale;
    worst_gap = std::max(worst_gap, traj.V[i] - bound);
  }

  double tail = 0.0;
  const std::size_t tail_count = traj.V.size() / 5;
  for (std::size_t i = traj.V.size() - tail_count; i < traj.V.size(); ++i)
    tail += traj.V[i];
  tail /= static_cast<double>(tail_count);

  // Nominal first moments: A = -2 I for the desk, so the flow is the scalar
  // contraction exp(-2t).
  std::vector<double> grid2;
  for (int i = 0; i <= 20; ++i) grid2.push_back(2.0 * i / 20.0);
  VectorXcd alpha(1);
  alpha << std::complex<double>(0.5, 0.0);
  const fock::Trajectory nominal = fock::lindblad_evolve(
      sys, {}, space, fock::coherent_state(space, alpha), grid2);
  const VectorXd m0 = nominal.mean.front();
  double worst_rel = 0.0;
  for (std::size_t i = 1; i < grid2.size(); ++i) {
    const VectorXd expected = std::exp(-2.0 * grid2[i]) * m0;
    worst_rel = std::max(worst_rel,
                         (nominal.mean[i] - expected).norm() / expected.norm());
  }

  Outcome out;
  out.pass = worst_gap <= 0.0 && tail <= 6.0 && worst_rel <= 1e-4;
  out.detail = "max envelope gap = " + sci(worst_gap) + ", stationary V = " + sci(tail) +
               ", first-moment relative error = " + sci(worst_rel);
  return out;
}

// --------------------------------------------------------------------------
// 8. Certified set nonemptiness: geometric downscaling of the frequencies
// reaches a feasible certificate.

Outcome criterion_nonemptiness() {
  SplitMix64 rng(1008);
  int worst_halvings = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + 2 * static_cast<int>(rng.next_u64() % 2);
    const int m = 2 + 2 * static_cast<int>(rng.next_u64() % 2);
    const QuantumLinearSystem sys = test::random_hurwitz_system(rng, n, m, 0.1);
    const int d = 1 + static_cast<int>(rng.next_u64() % 3);
    TrigPerturbation terms = test::random_terms(rng, n, d);
    const double mu1 = std::abs(spectral_abscissa(sys.A));

    bool feasible = false;
    int halvings = 0;
    for (; halvings < 30; ++halvings) {
      try {
        const PerturbationEnvelope env = envelope_trig(terms, sys.theta, mu1);
        const double margin = decay_margin(operator_matrix(sys.A, env));
        if (margin > 0.0) {
          const StabilityCertificate cert =
              solve_certificate(sys, env, 0.5 * margin);
          if (cert.min_eig_pi > 0.0) {
            feasible = true;
            break;
          }
        }
      } catch (const Error&) {
      }
      for (TrigTerm& term : terms) term.lambda *= 0.5;
    }
    if (!feasible)
      return {false, "instance " + std::to_string(t) + " (n=" + std::to_string(n) +
                         ", d=" + std::to_string(d) +
                         ") stayed infeasible after 30 halvings"};
    worst_halvings = std::max(worst_halvings, halvings);
  }
  Outcome out;
  out.detail = "20 systems, worst case " + std::to_string(worst_halvings) +
               " halvings to feasibility";
  return out;
}

// --------------------------------------------------------------------------
// 9. sigma_k combination algebra and the single-term reduction.

Outcome criterion_sigma_algebra() {
  SplitMix64 rng(1009);
  double worst_sigma = 0.0;
  for (int d = 1; d <= 5; ++d) {
    for (int rep = 0; rep < 10; ++rep) {
      MatrixXd nus = MatrixXd::Ones(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          nus(i, j) = rng.uniform(0.1, 3.0);
          nus(j, i) = nus(i, j);
        }
      FreeParameters params;
      params.omegas = std::vector<double>(static_cast<std::size_t>(d), 1.0);
      params.nus = nus;
      const std::vector<double> sigma = sigma_coefficients(params, d);
      for (int k = 0; k < d; ++k) {
        double direct = 1.0;
        for (int j = 0; j < k; ++j) direct += nus(j, k);
        for (int j = k + 1; j < d; ++j) direct += 1.0 / nus(j, k);
        worst_sigma =
            std::max(worst_sigma, std::abs(sigma[static_cast<std::size_t>(k)] - direct));
      }
    }
  }

  double worst_env = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + 2 * static_cast<int>(rng.next_u64() % 2);
    const MatrixXd theta = test::random_antisymmetric_nonsingular(rng, n);
    VectorXd lam(n);
    for (int i = 0; i < n; ++i) lam(i) = rng.next_gaussian();
    lam *= rng.uniform(0.3, 1.5) / lam.norm();
    const double mu1 = rng.uniform(0.1, 4.0);

    const TrigPerturbation p{{1.0, lam, 0.0}};
    const PerturbationEnvelope via_trig = envelope_trig(p, theta, mu1);
    const PerturbationEnvelope direct = envelope_single_cos(lam, theta, mu1);
    worst_env = std::max({worst_env,
                          (via_trig.gammas.at(0) - direct.gammas.at(0)).norm(),
                          std::abs(via_trig.mu0 - direct.mu0),
                          std::abs(via_trig.mu1 - direct.mu1)});
  }

  Outcome out;
  out.pass = worst_sigma <= 1e-14 && worst_env <= 1e-14;
  out.detail = "max sigma deviation = " + sci(worst_sigma) +
               ", max single-term reduction gap = " + sci(worst_env);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"realizability identity", criterion_realizability},
      {"steady covariance theta-consistency", criterion_theta_consistency},
      {"desk certificate chain", criterion_desk_chain},
      {"commutator drift identity", criterion_commutator_identity},
      {"convolution spectrum consistency", criterion_convolution},
      {"envelope operator inequality", criterion_envelope_validity},
      {"trajectory conformance", criterion_trajectory},
      {"certificate nonemptiness", criterion_nonemptiness},
      {"sigma combination algebra", criterion_sigma_algebra},
  };

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::cerr << "usage: " << argv[0] << " [criterion 1.."
                << criteria.size() << "]\n";
      return 2;
    }
  }

  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.pass = false;
      result.detail = std::string("unexpected exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1)
              << ": " << criteria[i].first << " (" << result.detail << ") ["
              << std::fixed << std::setprecision(2) << secs << " s]\n";
    all_pass = all_pass && result.pass;
  }
  return all_pass ? 0 : 1;
}

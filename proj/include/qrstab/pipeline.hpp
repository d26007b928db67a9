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
#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qrstab/config.hpp"
#include "qrstab/errors.hpp"
#include "qrstab/fock.hpp"
#include "qrstab/lmi.hpp"
#include "qrstab/perturbation.hpp"
#include "qrstab/report.hpp"
#include "qrstab/system.hpp"

namespace qrstab::cli {

inline bool log_enabled() {
  const char* v = std::getenv("QRSTAB_LOG");
  if (!v || !*v) return false;
  const std::string s(v);
  return s != "0" && s != "off" && s != "quiet";
}

inline void log(const std::string& msg) {
  if (log_enabled()) std::cerr << "[qrstab] " << msg << std::endl;
}

inline const std::vector<double>& default_mu1_grid() {
  static const std::vector<double> grid = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  return grid;
}

struct RunResult {
  int exit_code = 0;
  ordered_json report;
  std::string trajectory_csv;  // populated by simulate
};

// Perturbation description resolved against the system dimension, with the
// free parameters broadcast to their full shapes.
struct EnvelopeInputs {
  TrigPerturbation terms;  // sanitized
  std::optional<ErrorPartConfig> error_part;
  std::vector<double> omegas;  // one per term
  MatrixXd nus;                // d_total x d_total
  int d_total = 1;
  std::vector<std::string> warnings;
};

inline EnvelopeInputs resolve_envelope_inputs(const AnalysisConfig& cfg, int n) {
  EnvelopeInputs in;
  in.terms = sanitize_terms(cfg.perturbation.terms, &in.warnings);
  for (std::size_t k = 0; k < in.terms.size(); ++k)
    if (in.terms[k].lambda.size() != n)
      throw ConfigError("perturbation.terms[" + std::to_string(k) + "].lambda: expected " +
                        std::to_string(n) + " entries");
  in.error_part = cfg.perturbation.error_part;
  if (in.error_part && (in.error_part->Gamma.rows() != n || in.error_part->Gamma.cols() != n))
    throw ConfigError("perturbation.error_part.Gamma: expected a " + std::to_string(n) +
                      "x" + std::to_string(n) + " matrix");

  const int d_trig = static_cast<int>(in.terms.size());
  in.d_total = std::max(1, d_trig + (in.error_part ? 1 : 0));

  if (cfg.parameters.omegas) {
    const std::vector<double>& user = *cfg.parameters.omegas;
    if (d_trig == 0) {
      in.warnings.push_back("parameters.omegas ignored: no effective trig terms");
    } else if (user.size() == 1) {
      in.omegas.assign(static_cast<std::size_t>(d_trig), user.front());
    } else if (static_cast<int>(user.size()) == d_trig) {
      in.omegas = user;
    } else {
      throw ConfigError("parameters.omegas: expected 1 or " + std::to_string(d_trig) +
                        " entries, got " + std::to_string(user.size()));
    }
  }
  if (in.omegas.empty()) in.omegas.assign(static_cast<std::size_t>(std::max(1, d_trig)), 1.0);

  if (cfg.parameters.nus) {
    if (cfg.parameters.nus->rows() != in.d_total || cfg.parameters.nus->cols() != in.d_total)
      throw ConfigError("parameters.nus: expected a " + std::to_string(in.d_total) + "x" +
                        std::to_string(in.d_total) + " matrix");
    in.nus = *cfg.parameters.nus;
  } else if (cfg.parameters.nus_scalar) {
    in.nus = MatrixXd::Constant(in.d_total, in.d_total, *cfg.parameters.nus_scalar);
  } else {
    in.nus = MatrixXd::Ones(in.d_total, in.d_total);
  }
  return in;
}

// Envelope at a given mu1: per-term trig blocks, plus the error block, plus
// a trivial zero block when the perturbation is empty (certifying the
// nominal system through the same machinery).
inline PerturbationEnvelope build_envelope(const EnvelopeInputs& in, const MatrixXd& theta,
                                           double mu1) {
  std::vector<EnvelopePart> parts = trig_parts(in.terms, theta, mu1, in.omegas);
  if (in.error_part) {
    EnvelopePart part;
    part.c = 1.0;
    part.Phi = in.error_part->Gamma;
    part.mu0k = in.error_part->mu;
    parts.push_back(std::move(part));
  }
  if (parts.empty()) {
    EnvelopePart part;
    part.c = 1.0;
    part.Phi = MatrixXd::Zero(theta.rows(), theta.cols());
    part.mu0k = 0.0;
    parts.push_back(std::move(part));
  }
  FreeParameters fp;
  fp.omegas = in.omegas;
  fp.nus = in.nus;
  return combine_envelopes(parts, mu1, fp);
}

struct AnalysisOutcome {
  QuantumLinearSystem sys;
  EnvelopeInputs inputs;
  std::vector<double> grid;
  bool feasible = false;
  ScanResult scan;  // valid when feasible
  double mu1 = 0.0;
  StabilityCertificate cert;       // valid when feasible
  PerturbationEnvelope envelope;   // valid when feasible
  std::string diagnosis;           // set when infeasible
};

namespace detail {

// Coordinate descent over log(omega), log(nu) minimizing ms_bound at fixed
// mu1; gamma follows the configured policy per candidate. Deterministic.
inline void refine_free_parameters(const QuantumLinearSystem& sys, EnvelopeInputs& inputs,
                                   double mu1, std::optional<double> gamma_opt,
                                   StabilityCertificate& cert,
                                   PerturbationEnvelope& envelope) {
  const double inf = std::numeric_limits<double>::infinity();
  auto evaluate = [&](const EnvelopeInputs& in,
                      StabilityCertificate* out) -> double {
    try {
      const PerturbationEnvelope env = build_envelope(in, sys.theta, mu1);
      const SylvesterOperatorMatrix op = operator_matrix(sys.A, env);
      const double margin = decay_margin(op);
      if (margin <= 0.0) return inf;
      const double g = gamma_opt.value_or(0.5 * margin);
      if (!(g > 0.0) || g >= margin) return inf;
      const StabilityCertificate c = solve_certificate(sys, env, g);
      if (out) *out = c;
      return c.ms_bound;
    } catch (const Error&) {
      return inf;
    }
  };

  struct Coord {
    bool is_omega;
    int a;
    int b;
  };
  std::vector<Coord> coords;
  for (std::size_t k = 0; k < inputs.terms.size(); ++k)
    if (inputs.terms[k].phi != 0.0) coords.push_back({true, static_cast<int>(k), 0});
  for (int i = 0; i < inputs.d_total; ++i)
    for (int j = i + 1; j < inputs.d_total; ++j) coords.push_back({false, i, j});
  if (coords.empty()) return;

  double best = evaluate(inputs, nullptr);
  if (!std::isfinite(best)) return;

  auto scaled = [](EnvelopeInputs in, const Coord& c, double f) {
    if (c.is_omega) {
      in.omegas[static_cast<std::size_t>(c.a)] *= f;
    } else {
      in.nus(c.a, c.b) *= f;
      in.nus(c.b, c.a) *= f;
    }
    return in;
  };

  double factor = 4.0;
  for (int sweep = 0; sweep < 60 && factor > 1.0001; ++sweep) {
    bool improved = false;
    for (const Coord& c : coords) {
      for (double f : {factor, 1.0 / factor}) {
        EnvelopeInputs cand = scaled(inputs, c, f);
        const double val = evaluate(cand, nullptr);
        if (val < best * (1.0 - 1e-10)) {
          best = val;
          inputs = std::move(cand);
          improved = true;
        }
      }
    }
    if (!improved) factor = std::sqrt(factor);
  }
  evaluate(inputs, &cert);
  envelope = build_envelope(inputs, sys.theta, mu1);
}

}  // namespace detail

inline AnalysisOutcome analyze_core(const AnalysisConfig& cfg) {
  AnalysisOutcome out;
  log("building system");
  out.sys = build_system(cfg.system.theta, cfg.system.R, cfg.system.M, cfg.system.J);
  out.inputs = resolve_envelope_inputs(cfg, out.sys.n);
  out.grid = cfg.parameters.mu1_grid.empty() ? default_mu1_grid() : cfg.parameters.mu1_grid;

  const auto builder = [&](double mu1) {
    return build_envelope(out.inputs, out.sys.theta, mu1);
  };
  log("scanning mu1 grid (" + std::to_string(out.grid.size()) + " points)");
  try {
    out.scan = scan_mu1(out.sys, builder, out.grid, cfg.parameters.objective,
                        cfg.parameters.gamma);
    out.feasible = true;
    out.mu1 = out.scan.best_mu1();
    out.cert = out.scan.best;
    out.envelope = build_envelope(out.inputs, out.sys.theta, out.mu1);
    if (cfg.parameters.refine) {
      log("refining free parameters");
      detail::refine_free_parameters(out.sys, out.inputs, out.mu1, cfg.parameters.gamma,
                                     out.cert, out.envelope);
    }
  } catch (const AllInfeasible& e) {
    out.feasible = false;
    out.diagnosis = e.what();
  }
  return out;
}

inline ordered_json base_report(const std::string& command, const AnalysisConfig& cfg,
                                const AnalysisOutcome& out) {
  ordered_json report = report_skeleton(command);
  report["seed"] = cfg.parameters.seed;
  if (!out.inputs.warnings.empty()) {
    ordered_json w = ordered_json::array();
    for (const std::string& msg : out.inputs.warnings) w.push_back(msg);
    report["warnings"] = std::move(w);
  }

  const MatrixXd realizability = out.sys.A * out.sys.theta +
                                 out.sys.theta * out.sys.A.transpose() +
                                 out.sys.B * out.sys.J * out.sys.B.transpose();
  const double abscissa = spectral_abscissa(out.sys.A);
  ordered_json system;
  system["n"] = out.sys.n;
  system["m"] = out.sys.m;
  system["spectral_abscissa"] = abscissa;
  system["hurwitz"] = abscissa < 0.0;
  system["realizability_residual"] = realizability.norm();
  system["theta_condition"] = out.sys.theta_condition;
  report["system"] = std::move(system);

  if (out.feasible) {
    FreeParameters fp;
    fp.omegas = out.inputs.omegas;
    fp.nus = out.inputs.nus;
    const std::vector<double> sigma = sigma_coefficients(fp, out.envelope.d());
    report["envelope"] =
        envelope_json(out.envelope, sigma, out.inputs.omegas, out.inputs.nus);
    report["certificate"] = certificate_json(out.cert);
  } else {
    ordered_json cert;
    cert["feasible"] = false;
    cert["diagnosis"] = out.diagnosis;
    report["certificate"] = std::move(cert);
  }
  if (out.feasible && (out.grid.size() > 1 || command == "scan"))
    report["scan"] = scan_json(out.scan, cfg.parameters.objective);
  return report;
}

inline RunResult run_analyze(const AnalysisConfig& cfg) {
  RunResult res;
  const AnalysisOutcome out = analyze_core(cfg);
  res.report = base_report("analyze", cfg, out);
  res.exit_code = out.feasible ? 0 : 2;
  return res;
}

inline RunResult run_scan(const AnalysisConfig& cfg) {
  RunResult res;
  const AnalysisOutcome out = analyze_core(cfg);
  res.report = base_report("scan", cfg, out);
  res.exit_code = out.feasible ? 0 : 2;
  return res;
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  return out;
}

inline RunResult run_simulate(const AnalysisConfig& cfg) {
  RunResult res;
  const AnalysisOutcome out = analyze_core(cfg);
  res.report = base_report("simulate", cfg, out);
  if (!out.feasible) {
    res.exit_code = 2;
    return res;
  }

  fock::require_canonical_theta(out.sys.theta);
  const fock::FockSpace space(out.sys.n / 2, cfg.parameters.cutoff);
  const std::vector<double> t_grid =
      linspace(0.0, cfg.parameters.t_final, cfg.parameters.samples);
  fock::EvolveOptions opts;
  opts.dt = cfg.parameters.dt;
  opts.Pi = out.cert.Pi;

  log("integrating master equation (dim " + std::to_string(space.dim()) + ")");
  fock::Trajectory traj;
  try {
    traj = fock::lindblad_evolve(out.sys, out.inputs.terms, space,
                                 fock::vacuum_state(space), t_grid, opts);
  } catch (const CutoffLeak& e) {
    ordered_json oracle;
    oracle["error"] = e.what();
    res.report["oracle"] = std::move(oracle);
    res.exit_code = 3;
    return res;
  }

  const std::vector<double> envelope = gronwall_envelope(out.cert, traj.V.front(), t_grid);
  double violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.V.size(); ++i)
    violation = std::max(violation, traj.V[i] - envelope[i]);
  const double scale = std::max({traj.V.front(), out.cert.ms_bound, 1.0});

  const std::size_t tail = std::max<std::size_t>(1, traj.V.size() / 5);
  double stationary = 0.0;
  for (std::size_t i = traj.V.size() - tail; i < traj.V.size(); ++i) stationary += traj.V[i];
  stationary /= static_cast<double>(tail);

  double max_trace_error = 0.0;
  for (double e : traj.trace_error) max_trace_error = std::max(max_trace_error, e);

  ordered_json oracle;
  oracle["stationary_V"] = stationary;
  oracle["ms_bound"] = out.cert.ms_bound;
  oracle["stationary_pass"] = stationary <= out.cert.ms_bound + 1e-3 * scale;
  oracle["max_envelope_violation"] = violation;
  oracle["violation_scale"] = scale;
  oracle["violation_pass"] = violation <= 1e-3 * scale;
  oracle["max_trace_error"] = max_trace_error;
  res.report["oracle"] = std::move(oracle);

  std::ostringstream csv;
  fock::write_trajectory_csv(csv, traj, envelope);
  res.trajectory_csv = csv.str();
  res.exit_code = 0;
  return res;
}

inline RunResult run_verify(const AnalysisConfig& cfg) {
  RunResult res;
  res.report = report_skeleton("verify");
  res.report["seed"] = cfg.parameters.seed;

  const QuantumLinearSystem sys =
      build_system(cfg.system.theta, cfg.system.R, cfg.system.M, cfg.system.J);
  const EnvelopeInputs inputs = resolve_envelope_inputs(cfg, sys.n);
  fock::require_canonical_theta(sys.theta);
  const fock::FockSpace space(sys.n / 2, cfg.parameters.cutoff);
  const std::vector<MatrixXcd> X = fock::build_quadratures(space);
  const double mu1 =
      cfg.parameters.mu1_grid.empty() ? 1.0 : cfg.parameters.mu1_grid.front();

  ordered_json checks = ordered_json::array();
  bool all_pass = true;
  const auto add_check = [&](const std::string& name, double value, double tol,
                             bool pass, const std::string& note = "") {
    ordered_json c;
    c["name"] = name;
    c["value"] = value;
    c["tolerance"] = tol;
    c["pass"] = pass;
    if (!note.empty()) c["note"] = note;
    checks.push_back(std::move(c));
    all_pass = all_pass && pass;
  };

  {
    log("checking canonical commutation relations");
    const std::vector<Eigen::Index> half = fock::interior_indices(space, 0.5);
    double worst = 0.0;
    for (int a = 0; a < sys.n; ++a)
      for (int b = a + 1; b < sys.n; ++b) {
        const MatrixXcd comm =
            X[static_cast<std::size_t>(a)] * X[static_cast<std::size_t>(b)] -
            X[static_cast<std::size_t>(b)] * X[static_cast<std::size_t>(a)];
        const MatrixXcd expected = fock::Complex(0.0, 2.0 * sys.theta(a, b)) *
                                   MatrixXcd::Identity(space.dim(), space.dim());
        worst = std::max(worst, fock::project_interior(comm - expected, half).norm());
      }
    add_check("ccr_interior", worst, 1e-8, worst <= 1e-8);
  }

  const std::vector<Eigen::Index> interior =
      fock::interior_indices(space, cfg.parameters.interior_fraction);
  const std::vector<MatrixXcd> z_closed =
      fock::z_ops_closed_form(inputs.terms, sys.theta, X);

  {
    log("checking the commutator identity for Z");
    const MatrixXcd h1 = fock::operator_of_trig(inputs.terms, X);
    const std::vector<MatrixXcd> z_comm = fock::commutator_Z(h1, X);
    double scale = 0.0;
    for (const MatrixXcd& z : z_closed)
      scale = std::max(scale, fock::project_interior(z, interior).norm());
    double worst = 0.0;
    for (std::size_t jj = 0; jj < z_closed.size(); ++jj)
      worst = std::max(
          worst, fock::project_interior(z_comm[jj] - z_closed[jj], interior).norm());
    const double rel = worst / std::max(scale, 1e-300);
    const bool vacuous = inputs.terms.empty();
    add_check("commutator_identity", vacuous ? 0.0 : rel, 1e-6, vacuous || rel <= 1e-6,
              vacuous ? "vacuous: empty perturbation" : "");
  }

  {
    log("checking the convolution spectrum for ZZ^T");
    const AtomicSpectrum h = to_spectrum(inputs.terms);
    const MatrixAtomicSpectrum ms = zz_spectrum(h, sys.theta);
    const fock::BlockMatrix assembled = fock::assemble_zz(ms, sys.theta, X);
    const fock::BlockMatrix direct = fock::outer_blocks(z_closed);
    double scale = 0.0;
    double worst = 0.0;
    for (std::size_t a = 0; a < direct.size(); ++a)
      for (std::size_t b = 0; b < direct.size(); ++b) {
        scale = std::max(scale, fock::project_interior(direct[a][b], interior).norm());
        worst = std::max(
            worst,
            fock::project_interior(assembled[a][b] - direct[a][b], interior).norm());
      }
    const double rel = worst / std::max(scale, 1e-300);
    const bool vacuous = inputs.terms.empty();
    add_check("convolution_spectrum", vacuous ? 0.0 : rel, 1e-6, vacuous || rel <= 1e-6,
              vacuous ? "vacuous: empty perturbation" : "");
  }

  {
    log("sampling block positivity of the envelope");
    const PerturbationEnvelope env = build_envelope(inputs, sys.theta, mu1);
    const fock::BlockMatrix lhs = fock::envelope_blocks(env, X);
    const fock::BlockMatrix blocks = fock::block_difference(lhs, fock::outer_blocks(z_closed));
    const fock::PositivitySample sample = fock::block_positivity_sample(
        blocks, space, cfg.parameters.trials, cfg.parameters.interior_fraction,
        cfg.parameters.seed);
    add_check("envelope_block_positivity", sample.min_value,
              -1e-6 * std::max(sample.scale, 1e-300), sample.pass);
  }

  {
    log("checking the operator function ordering");
    const bool forward = fock::function_order_check(
        [](double z) { const double s = std::sin(z); return s * s; },
        [](double z) { return z * z; }, X.front());
    const bool reversed = fock::function_order_check(
        [](double z) { return z * z; },
        [](double z) { const double s = std::sin(z); return s * s; }, X.front());
    add_check("function_order", forward && !reversed ? 1.0 : 0.0, 1.0,
              forward && !reversed, "sin^2(z) <= z^2 and not conversely");
  }

  ordered_json oracle;
  oracle["checks"] = std::move(checks);
  oracle["all_pass"] = all_pass;
  res.report["oracle"] = std::move(oracle);
  res.exit_code = all_pass ? 0 : 2;
  return res;
}

}  // namespace qrstab::cli

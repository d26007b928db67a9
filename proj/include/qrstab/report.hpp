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

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include <Eigen/Dense>

#include "qrstab/linalg.hpp"
#include "qrstab/lmi.hpp"
#include "qrstab/perturbation.hpp"

namespace qrstab::cli {

// Reports use a fixed key order so identical runs produce byte-identical
// files.
using ordered_json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

inline ordered_json matrix_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ordered_json vector_json(const std::vector<double>& v) {
  ordered_json arr = ordered_json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

inline ordered_json report_skeleton(const std::string& command) {
  ordered_json report;
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = command;
  return report;
}

inline ordered_json certificate_json(const StabilityCertificate& cert) {
  ordered_json c;
  c["feasible"] = true;
  c["gamma"] = cert.gamma;
  c["gamma_star"] = cert.decay_margin;
  c["ms_bound"] = cert.ms_bound;
  c["min_eig_pi"] = cert.min_eig_pi;
  c["lmi_residual"] = cert.lmi_residual;
  c["pi"] = matrix_json(cert.Pi);
  return c;
}

inline ordered_json envelope_json(const PerturbationEnvelope& env,
                                  const std::vector<double>& sigma,
                                  const std::vector<double>& omegas,
                                  const MatrixXd& nus) {
  ordered_json e;
  e["mu1"] = env.mu1;
  e["mu0"] = env.mu0;
  e["d"] = env.d();
  e["sigma"] = vector_json(sigma);
  e["omegas"] = vector_json(omegas);
  e["nus"] = matrix_json(nus);
  ordered_json gammas = ordered_json::array();
  for (const MatrixXd& g : env.gammas) gammas.push_back(matrix_json(g));
  e["gammas"] = std::move(gammas);
  return e;
}

inline ordered_json scan_json(const ScanResult& scan, ScanObjective objective) {
  ordered_json s;
  s["objective"] = objective == ScanObjective::max_gamma_star ? "max_gamma_star"
                                                              : "min_ms_bound";
  s["best_index"] = scan.best_index;
  s["best_mu1"] = scan.best_mu1();
  ordered_json points = ordered_json::array();
  for (const ScanPoint& pt : scan.points) {
    ordered_json p;
    p["mu1"] = pt.mu1;
    p["decay_margin"] = pt.decay_margin;
    p["feasible"] = pt.feasible;
    if (pt.feasible) {
      p["gamma"] = pt.gamma;
      p["ms_bound"] = pt.ms_bound;
    }
    if (!pt.note.empty()) p["note"] = pt.note;
    points.push_back(std::move(p));
  }
  s["points"] = std::move(points);
  return s;
}

inline void write_report(std::ostream& os, const ordered_json& report) {
  os << report.dump(2) << '\n';
}

}  // namespace qrstab::cli

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

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include <Eigen/Dense>

#include "qrstab/errors.hpp"
#include "qrstab/linalg.hpp"
#include "qrstab/lmi.hpp"
#include "qrstab/perturbation.hpp"

namespace qrstab::cli {

using json = nlohmann::json;

struct SystemConfig {
  MatrixXd theta;
  MatrixXd R;
  MatrixXd M;
  MatrixXd J;
};

// Example 3 style additive error block: Z gains a component bounded through
// Gamma with constant offset mu.
struct ErrorPartConfig {
  MatrixXd Gamma;
  double mu = 0.0;
};

struct PerturbationConfig {
  TrigPerturbation terms;
  std::optional<ErrorPartConfig> error_part;
};

struct ParametersConfig {
  std::vector<double> mu1_grid;  // empty: unset; one entry: scalar mu1
  std::optional<double> gamma;
  std::optional<std::vector<double>> omegas;
  std::optional<MatrixXd> nus;  // full matrix; scalars broadcast at parse
  std::optional<double> nus_scalar;
  std::uint64_t seed = 42;
  int cutoff = 40;
  int trials = 1000;
  double interior_fraction = 0.6;
  double t_final = 5.0;
  double dt = 1e-3;
  int samples = 101;
  ScanObjective objective = ScanObjective::min_ms_bound;
  bool refine = false;
};

struct OutputsConfig {
  std::string report_path;      // empty: stdout
  std::string trajectory_path;  // empty: trajectory.csv (simulate only)
};

struct AnalysisConfig {
  SystemConfig system;
  PerturbationConfig perturbation;
  ParametersConfig parameters;
  OutputsConfig outputs;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline void check_keys(const json& j, const std::string& path,
                       const std::set<std::string>& allowed,
                       const std::set<std::string>& required) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& item : j.items())
    if (allowed.count(item.key()) == 0) fail(path + "." + item.key(), "unknown key");
  for (const std::string& key : required)
    if (!j.contains(key)) fail(path, "missing required key '" + key + "'");
}

inline double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline std::int64_t integer_at(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline bool boolean_at(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline VectorXd vector_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty numeric array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number_at(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// Row-major nested arrays.
inline MatrixXd matrix_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  MatrixXd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) fail(row_path, "expected a nonempty numeric row");
    if (r == 0) {
      cols = row.size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      fail(row_path, "ragged matrix: expected " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number_at(row[c], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

}  // namespace detail

inline AnalysisConfig parse_config(const json& j) {
  using namespace detail;
  AnalysisConfig cfg;
  check_keys(j, "config", {"system", "perturbation", "parameters", "outputs"}, {"system"});

  {
    const json& sys = j.at("system");
    check_keys(sys, "system", {"theta", "R", "M", "J"}, {"theta", "R", "M", "J"});
    cfg.system.theta = matrix_at(sys.at("theta"), "system.theta");
    cfg.system.R = matrix_at(sys.at("R"), "system.R");
    cfg.system.M = matrix_at(sys.at("M"), "system.M");
    cfg.system.J = matrix_at(sys.at("J"), "system.J");
  }

  if (j.contains("perturbation")) {
    const json& pert = j.at("perturbation");
    check_keys(pert, "perturbation", {"terms", "error_part"}, {});
    if (pert.contains("terms")) {
      const json& terms = pert.at("terms");
      if (!terms.is_array()) fail("perturbation.terms", "expected an array");
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const std::string path = "perturbation.terms[" + std::to_string(k) + "]";
        check_keys(terms[k], path, {"r", "lambda", "phi"}, {"r", "lambda"});
        TrigTerm term;
        term.r = number_at(terms[k].at("r"), path + ".r");
        term.lambda = vector_at(terms[k].at("lambda"), path + ".lambda");
        term.phi = terms[k].contains("phi") ? number_at(terms[k].at("phi"), path + ".phi") : 0.0;
        cfg.perturbation.terms.push_back(std::move(term));
      }
    }
    if (pert.contains("error_part")) {
      const json& ep = pert.at("error_part");
      check_keys(ep, "perturbation.error_part", {"Gamma", "mu"}, {"Gamma", "mu"});
      ErrorPartConfig part;
      part.Gamma = matrix_at(ep.at("Gamma"), "perturbation.error_part.Gamma");
      part.mu = number_at(ep.at("mu"), "perturbation.error_part.mu");
      if (part.mu < 0.0) fail("perturbation.error_part.mu", "must be nonnegative");
      cfg.perturbation.error_part = std::move(part);
    }
  }

  if (j.contains("parameters")) {
    const json& par = j.at("parameters");
    check_keys(par, "parameters",
               {"mu1", "gamma", "omegas", "nus", "seed", "cutoff", "trials",
                "interior_fraction", "t_final", "dt", "samples", "objective", "refine"},
               {});
    if (par.contains("mu1")) {
      const json& mu1 = par.at("mu1");
      if (mu1.is_array()) {
        const VectorXd grid = vector_at(mu1, "parameters.mu1");
        cfg.parameters.mu1_grid.assign(grid.data(), grid.data() + grid.size());
      } else {
        cfg.parameters.mu1_grid = {number_at(mu1, "parameters.mu1")};
      }
      for (double v : cfg.parameters.mu1_grid)
        if (!(v > 0.0)) fail("parameters.mu1", "entries must be positive");
    }
    if (par.contains("gamma")) {
      cfg.parameters.gamma = number_at(par.at("gamma"), "parameters.gamma");
      if (!(*cfg.parameters.gamma > 0.0)) fail("parameters.gamma", "must be positive");
    }
    if (par.contains("omegas")) {
      const json& om = par.at("omegas");
      if (om.is_array()) {
        const VectorXd v = vector_at(om, "parameters.omegas");
        cfg.parameters.omegas.emplace(v.data(), v.data() + v.size());
      } else {
        cfg.parameters.omegas.emplace(1, number_at(om, "parameters.omegas"));
      }
      for (double v : *cfg.parameters.omegas)
        if (!(v > 0.0)) fail("parameters.omegas", "entries must be positive");
    }
    if (par.contains("nus")) {
      const json& nus = par.at("nus");
      if (nus.is_array()) {
        cfg.parameters.nus = matrix_at(nus, "parameters.nus");
      } else {
        cfg.parameters.nus_scalar = number_at(nus, "parameters.nus");
        if (!(*cfg.parameters.nus_scalar > 0.0)) fail("parameters.nus", "must be positive");
      }
    }
    if (par.contains("seed")) {
      const std::int64_t s = integer_at(par.at("seed"), "parameters.seed");
      if (s < 0) fail("parameters.seed", "must be nonnegative");
      cfg.parameters.seed = static_cast<std::uint64_t>(s);
    }
    if (par.contains("cutoff")) {
      cfg.parameters.cutoff = static_cast<int>(integer_at(par.at("cutoff"), "parameters.cutoff"));
      if (cfg.parameters.cutoff < 8) fail("parameters.cutoff", "must be at least 8");
    }
    if (par.contains("trials")) {
      cfg.parameters.trials = static_cast<int>(integer_at(par.at("trials"), "parameters.trials"));
      if (cfg.parameters.trials < 1) fail("parameters.trials", "must be positive");
    }
    if (par.contains("interior_fraction")) {
      cfg.parameters.interior_fraction =
          number_at(par.at("interior_fraction"), "parameters.interior_fraction");
      if (!(cfg.parameters.interior_fraction > 0.0) || cfg.parameters.interior_fraction > 1.0)
        fail("parameters.interior_fraction", "must lie in (0, 1]");
    }
    if (par.contains("t_final")) {
      cfg.parameters.t_final = number_at(par.at("t_final"), "parameters.t_final");
      if (!(cfg.parameters.t_final > 0.0)) fail("parameters.t_final", "must be positive");
    }
    if (par.contains("dt")) {
      cfg.parameters.dt = number_at(par.at("dt"), "parameters.dt");
      if (!(cfg.parameters.dt > 0.0)) fail("parameters.dt", "must be positive");
    }
    if (par.contains("samples")) {
      cfg.parameters.samples = static_cast<int>(integer_at(par.at("samples"), "parameters.samples"));
      if (cfg.parameters.samples < 3) fail("parameters.samples", "must be at least 3");
    }
    if (par.contains("objective")) {
      const std::string obj = string_at(par.at("objective"), "parameters.objective");
      if (obj == "max_gamma_star") {
        cfg.parameters.objective = ScanObjective::max_gamma_star;
      } else if (obj == "min_ms_bound") {
        cfg.parameters.objective = ScanObjective::min_ms_bound;
      } else {
        fail("parameters.objective", "expected 'max_gamma_star' or 'min_ms_bound'");
      }
    }
    if (par.contains("refine"))
      cfg.parameters.refine = boolean_at(par.at("refine"), "parameters.refine");
  }

  if (j.contains("outputs")) {
    const json& out = j.at("outputs");
    check_keys(out, "outputs", {"report_path", "trajectory_path"}, {});
    if (out.contains("report_path"))
      cfg.outputs.report_path = string_at(out.at("report_path"), "outputs.report_path");
    if (out.contains("trajectory_path"))
      cfg.outputs.trajectory_path =
          string_at(out.at("trajectory_path"), "outputs.trajectory_path");
  }

  return cfg;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace qrstab::cli

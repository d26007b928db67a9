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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qrstab/qrstab.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> cutoff;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("config", flags.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "override parameters.seed");
  cmd->add_option("--cutoff", flags.cutoff, "override parameters.cutoff");
  cmd->add_option("--out", flags.out, "override outputs.report_path");
}

qrstab::cli::AnalysisConfig load(const CommonFlags& flags) {
  qrstab::cli::AnalysisConfig cfg = qrstab::cli::load_config(flags.config_path);
  if (flags.seed) cfg.parameters.seed = *flags.seed;
  if (flags.cutoff) {
    if (*flags.cutoff < 8) throw qrstab::ConfigError("--cutoff: must be at least 8");
    cfg.parameters.cutoff = *flags.cutoff;
  }
  if (flags.out) cfg.outputs.report_path = *flags.out;
  return cfg;
}

void emit(const qrstab::cli::AnalysisConfig& cfg, const qrstab::cli::RunResult& res,
          bool write_trajectory) {
  if (cfg.outputs.report_path.empty()) {
    qrstab::cli::write_report(std::cout, res.report);
  } else {
    std::ofstream out(cfg.outputs.report_path);
    if (!out)
      throw qrstab::ConfigError("cannot write report to '" + cfg.outputs.report_path + "'");
    qrstab::cli::write_report(out, res.report);
    qrstab::cli::log("report written to " + cfg.outputs.report_path);
  }
  if (write_trajectory && !res.trajectory_csv.empty()) {
    const std::string path = cfg.outputs.trajectory_path.empty()
                                 ? "trajectory.csv"
                                 : cfg.outputs.trajectory_path;
    std::ofstream out(path);
    if (!out) throw qrstab::ConfigError("cannot write trajectory to '" + path + "'");
    out << res.trajectory_csv;
    qrstab::cli::log("trajectory written to " + path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrstab: robust mean-square stability certificates for open quantum "
               "harmonic oscillators under trigonometric Hamiltonian perturbations"};
  app.require_subcommand(1);

  CommonFlags analyze_flags, simulate_flags, verify_flags, scan_flags;
  CLI::App* analyze = app.add_subcommand("analyze", "derive an envelope and certificate");
  add_common(analyze, analyze_flags);
  CLI::App* simulate =
      app.add_subcommand("simulate", "certify, then integrate the master equation");
  add_common(simulate, simulate_flags);
  CLI::App* verify =
      app.add_subcommand("verify", "run the operator-level identity and positivity checks");
  add_common(verify, verify_flags);
  CLI::App* scan = app.add_subcommand("scan", "tabulate certificates over a mu1 grid");
  add_common(scan, scan_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    qrstab::cli::RunResult res;
    if (analyze->parsed()) {
      const auto cfg = load(analyze_flags);
      res = qrstab::cli::run_analyze(cfg);
      emit(cfg, res, false);
    } else if (simulate->parsed()) {
      const auto cfg = load(simulate_flags);
      res = qrstab::cli::run_simulate(cfg);
      emit(cfg, res, true);
    } else if (verify->parsed()) {
      const auto cfg = load(verify_flags);
      res = qrstab::cli::run_verify(cfg);
      emit(cfg, res, false);
    } else {
      const auto cfg = load(scan_flags);
      res = qrstab::cli::run_scan(cfg);
      emit(cfg, res, false);
    }
    return res.exit_code;
  } catch (const qrstab::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << std::endl;
    return 1;
  }
}

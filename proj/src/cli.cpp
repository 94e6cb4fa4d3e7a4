// Copyright 2026 The rareis Authors.
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

#include "rareis/cli.hpp"

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rareis/errors.hpp"
#include "rareis/estimators.hpp"
#include "rareis/result_io.hpp"

namespace rareis {

namespace {

struct CliOverrides {
  std::string config_path;
  std::string method;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = 0;
};

RunConfig load_with_overrides(const CliOverrides& opt) {
  RunConfig config = load_run_config(opt.config_path);
  if (!opt.method.empty()) {
    config.method = opt.method;
    if (config.method != "mc" && config.method != "ce" && config.method != "ice" &&
        config.method != "icered")
      throw std::runtime_error("unknown method '" + config.method + "'");
  }
  if (opt.seed_set) config.solver.seed = opt.seed;
  if (!opt.out.empty()) config.output = opt.out;
  if (opt.runs > 0) config.runs = opt.runs;
  return config;
}

EstimationResult run_once(const RunConfig& config, const LimitStateProblem& problem,
                          std::uint64_t seed) {
  SolverConfig solver = config.solver;
  solver.seed = seed;
  NormalRng rng(seed);
  if (config.method == "mc") return run_mc(problem, solver.n_per_level, rng);
  if (config.method == "ce") return run_ce(problem, solver, rng);
  if (config.method == "ice") return run_ice(problem, solver, rng);
  if (!problem.gradient)
    throw MissingGradient("method icered requires a problem with gradients");
  return run_icered(problem, solver, rng);
}

int cmd_run(const CliOverrides& opt) {
  const RunConfig config = load_with_overrides(opt);
  const LimitStateProblem problem = build_problem(config.problem);
  const EstimationResult result = run_once(config, problem, config.solver.seed);
  std::printf("p_hat=%s cv_hat=%s n_levels=%d lsf_calls=%ld grad_calls=%ld converged=%s\n",
              format_double(result.p_hat).c_str(), format_double(result.cv_hat).c_str(),
              result.n_levels, result.lsf_calls, result.grad_calls,
              result.converged ? "true" : "false");
  if (!config.output.empty()) write_text_file(config.output, result_to_json(result));
  return result.converged ? 0 : 1;
}

int cmd_study(const CliOverrides& opt) {
  const RunConfig config = load_with_overrides(opt);
  const LimitStateProblem problem = build_problem(config.problem);
  std::vector<StudyRow> rows;
  rows.reserve(config.runs);
  bool all_converged = true;
  for (int run = 0; run < config.runs; ++run) {
    StudyRow row;
    row.run = run + 1;
    row.seed = config.solver.seed + static_cast<std::uint64_t>(run);
    try {
      row.result = run_once(config, problem, row.seed);
    } catch (const std::runtime_error& e) {
      // A failed row is recorded as non-converged; the study continues.
      std::fprintf(stderr, "run %d failed: %s\n", row.run, e.what());
      row.result = EstimationResult{};
    }
    all_converged = all_converged && row.result.converged;
    rows.push_back(std::move(row));
  }
  const std::string csv = study_csv(rows);
  if (!config.output.empty())
    write_text_file(config.output, csv);
  else
    std::fputs(csv.c_str(), stdout);
  return all_converged ? 0 : 1;
}

int cmd_spectrum(const CliOverrides& opt) {
  const RunConfig config = load_with_overrides(opt);
  if (config.method != "icered")
    throw std::runtime_error("spectrum requires method icered");
  std::shared_ptr<BarProblem> bar;
  const LimitStateProblem problem = build_problem(config.problem, &bar);
  const EstimationResult result = run_once(config, problem, config.solver.seed);
  const std::string out_path = config.output.empty() ? "spectrum.csv" : config.output;
  write_text_file(out_path, spectrum_csv(result, config.solver.eps));
  write_text_file(out_path + ".modes.csv", modes_csv(result));
  if (bar) write_text_file(out_path + ".kl.csv", kl_spectrum_csv(bar->kl));
  std::printf("wrote %s (levels=%d, final rank=%d)\n", out_path.c_str(), result.n_levels,
              result.per_level.empty() ? 0 : result.per_level.back().rank);
  return result.converged ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"rare-event probability estimation toolkit"};
  app.require_subcommand(1);

  CliOverrides opt;
  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "JSON run configuration")->required();
    cmd->add_option("--seed", opt.seed, "override the config seed")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--method", opt.method, "override the method (mc | ce | ice | icered)");
    cmd->add_option("--out", opt.out, "override the output path");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "single estimation run, JSON output");
  add_common(run_cmd);
  CLI::App* study_cmd = app.add_subcommand("study", "repeated runs, CSV output");
  add_common(study_cmd);
  study_cmd->add_option("--runs", opt.runs, "override the repetition count");
  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "per-level eigenvalue dump");
  add_common(spectrum_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2; --help exits 0
  }

  try {
    if (run_cmd->parsed()) return cmd_run(opt);
    if (study_cmd->parsed()) return cmd_study(opt);
    return cmd_spectrum(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace rareis

// giff: sweep, allocate, verify and gen-data entry points.
//
// Exit codes: 0 success, 1 error, 2 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "giff/allocation.hpp"
#include "giff/errors.hpp"
#include "giff/intervention.hpp"
#include "giff/sweep.hpp"
#include "giff/theory.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

struct SweepArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string output;
  std::string beta_grid;
  std::string delta_grid;
  std::string seeds;
  int workers = -1;
};

int run_sweep_command(const SweepArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (!args.output.empty()) overrides.push_back("output_path=\"" + args.output + "\"");
  if (!args.beta_grid.empty()) overrides.push_back("beta_grid=\"" + args.beta_grid + "\"");
  if (!args.delta_grid.empty()) overrides.push_back("delta_grid=\"" + args.delta_grid + "\"");
  if (!args.seeds.empty()) overrides.push_back("seeds=\"" + args.seeds + "\"");
  if (args.workers >= 0) overrides.push_back("workers=" + std::to_string(args.workers));
  const giff::SweepConfig config =
      args.config.empty() ? giff::parse_sweep_config("{}", overrides) : giff::load_sweep_config(args.config, overrides);
  const giff::SweepOutcome outcome = giff::run_sweep(config);
  giff::write_sweep_outputs(config, outcome);
  std::cerr << "wrote " << outcome.results.size() << " rows to " << config.output_path << "\n";
  if (!outcome.errors.empty()) {
    std::cerr << outcome.errors.size() << " grid points failed; see " << config.output_path << ".errors.json\n";
    return kExitError;
  }
  return 0;
}

int run_allocate_command(const std::string& problem_path, const std::string& solver) {
  const giff::AllocationProblem problem = giff::load_allocation_problem(problem_path);
  const giff::Allocation allocation = giff::solve(problem, giff::parse_solver_kind(solver));
  std::cout << giff::to_json(allocation) << "\n";
  return 0;
}

json slack_json(const giff::SlackReport& r) {
  return {{"joint", r.joint}, {"surrogate", r.surrogate}, {"slack", r.slack}, {"bound", r.bound}};
}

struct VerifyArgs {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics;
  std::uint64_t monotone_problems = 20;
  std::size_t monotone_grid = 21;
  std::string out;
};

int run_verify_command(const VerifyArgs& args) {
  std::vector<giff::TrialMetric> metrics;
  for (const auto& m : args.metrics) metrics.push_back(giff::parse_trial_metric(m));
  if (metrics.empty()) metrics = giff::default_trial_metrics();

  bool passed = true;
  json bound_reports = json::array();
  for (const auto& metric : metrics) {
    const giff::TrialSummary s = giff::run_bound_trials(metric, args.trials, args.seed);
    passed = passed && s.passed();
    json examples = json::array();
    for (const auto& c : s.counterexamples) {
      examples.push_back({{"trial", c.trial},
                          {"kind", c.kind},
                          {"z", c.instance.z},
                          {"y", c.instance.y},
                          {"report", slack_json(c.report)}});
    }
    bound_reports.push_back({{"metric", s.metric},
                             {"trials", s.trials},
                             {"lower_bound_violations", s.lower_bound_violations},
                             {"sandwich_violations", s.sandwich_violations},
                             {"max_slack", s.max_slack},
                             {"passed", s.passed()},
                             {"counterexamples", examples}});
  }

  std::vector<double> grid;
  for (std::size_t k = 0; k < args.monotone_grid; ++k) {
    grid.push_back(args.monotone_grid == 1 ? 0.0
                                           : 0.99 * static_cast<double>(k) / static_cast<double>(args.monotone_grid - 1));
  }
  json monotone_failures = json::array();
  for (std::uint64_t p = 0; p < args.monotone_problems; ++p) {
    const giff::MonotoneReport r = giff::analyze_monotone(giff::random_single_round(args.seed, p), grid);
    if (!r.ok()) {
      passed = false;
      monotone_failures.push_back({{"problem", p}, {"violation", r.violation}, {"surrogates", r.surrogates}});
    }
  }

  const json report = {{"passed", passed},
                       {"seed", args.seed},
                       {"lower_bound", bound_reports},
                       {"monotone",
                        {{"problems", args.monotone_problems},
                         {"grid_points", args.monotone_grid},
                         {"failures", monotone_failures}}}};
  if (args.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream(args.out) << report.dump(2) << "\n";
  }
  return passed ? 0 : kExitViolation;
}

int run_gen_data_command(const giff::SyntheticHouseholdConfig& config, const std::string& out) {
  if (out.empty() || out == "-") {
    giff::write_synthetic_households(std::cout, config);
    return 0;
  }
  std::ofstream file(out);
  if (!file) throw giff::ConfigError("cannot write '" + out + "'");
  giff::write_synthetic_households(file, config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware multi-agent allocation with GIFF"};
  app.require_subcommand(1);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a beta/delta grid sweep and write CSV results");
  sweep_cmd->add_option("--config", sweep.config, "JSON config file")->check(CLI::ExistingFile);
  sweep_cmd->add_option("--set", sweep.overrides, "Override a config key, e.g. env.job.horizon=50");
  sweep_cmd->add_option("--output", sweep.output, "CSV output path");
  sweep_cmd->add_option("--beta-grid", sweep.beta_grid, "\"lo:hi:step\" or comma list");
  sweep_cmd->add_option("--delta-grid", sweep.delta_grid, "\"lo:hi:step\" or comma list");
  sweep_cmd->add_option("--seeds", sweep.seeds, "\"lo:hi:1\" or comma list");
  sweep_cmd->add_option("--workers", sweep.workers, "Worker threads (0: all cores)");

  std::string problem_path;
  std::string solver = "auto";
  auto* allocate_cmd = app.add_subcommand("allocate", "Solve an allocation problem given as JSON");
  allocate_cmd->add_option("--problem", problem_path, "Problem file")->required()->check(CLI::ExistingFile);
  allocate_cmd->add_option("--solver", solver, "auto, brute, bnb or bipartite");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check the local-gain lower bound and surrogate monotonicity");
  verify_cmd->add_option("--trials", verify.trials, "Random instances per metric");
  verify_cmd->add_option("--seed", verify.seed, "Base seed");
  verify_cmd->add_option("--metric", verify.metrics, "Metric name, repeatable (default: all)");
  verify_cmd->add_option("--monotone-problems", verify.monotone_problems, "Random single-round problems");
  verify_cmd->add_option("--monotone-grid", verify.monotone_grid, "Beta grid points on [0, 0.99]")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", verify.out, "Write the JSON report here instead of stdout");

  giff::SyntheticHouseholdConfig gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic household CSV");
  gen_cmd->add_option("--households", gen.households, "Number of households");
  gen_cmd->add_option("--features", gen.features, "Feature columns including 'group'")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--group-gap", gen.group_gap, "Extra base re-entry probability of group B");
  gen_cmd->add_option("--out", gen_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (*sweep_cmd) return run_sweep_command(sweep);
    if (*allocate_cmd) return run_allocate_command(problem_path, solver);
    if (*verify_cmd) return run_verify_command(verify);
    if (*gen_cmd) return run_gen_data_command(gen, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

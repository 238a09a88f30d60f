#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "giff/fairness.hpp"
#include "giff/giff.hpp"
#include "giff/intervention.hpp"
#include "giff/job_env.hpp"
#include "giff/matching_env.hpp"

namespace giff {

enum class EnvironmentKind { kJob, kMatching, kIntervention };
// kConvex uses (1 - beta) Q + beta F. kAdditive reads each grid value as a
// weight lambda on Q + lambda F and runs GIFF at beta = lambda / (1 + lambda).
enum class WeightingMode { kConvex, kAdditive };

// FairnessSpec whose GGF weights may be left empty, meaning linear weights
// sized to however many agents or groups the environment has.
struct FairnessConfig {
  FairnessKind kind = FairnessKind::kGgf;
  double alpha = 1.0;
  std::vector<double> weights;
  double epsilon_floor = 0.0;

  FairnessSpec resolve(std::size_t n) const;
};

struct InterventionEnvConfig {
  std::string data_path;  // empty: synthetic households generated from the row seed
  std::size_t households = 2000;
  std::size_t features = 3;
  double group_gap = 0.15;
  std::string feature = "group";
  InterventionMethod method = InterventionMethod::kGiff;
  InterventionOptions options;
};

struct SweepConfig {
  EnvironmentKind environment = EnvironmentKind::kJob;
  FairnessConfig fairness;
  std::vector<double> beta_grid;
  std::vector<double> delta_grid;
  std::vector<std::uint64_t> seeds{0};
  CounterfactualMode counterfactual = CounterfactualMode::kExact;
  BaselineMode baseline = BaselineMode::kMean;
  WeightingMode weighting = WeightingMode::kConvex;
  // Score one allocation round from `initial_payoffs` instead of running an
  // episode, and report the surrogate of the chosen allocation.
  bool single_round = false;
  std::vector<double> initial_payoffs;
  JobEnvConfig job;
  MatchingEnvConfig matching;
  InterventionEnvConfig intervention;
  std::string output_path = "sweep.csv";
  unsigned workers = 0;  // 0: one per hardware thread

  // Throws ConfigError.
  void validate() const;
};

// `text` is a JSON document; `overrides` are "dotted.key=value" strings
// applied before parsing, where value is read as JSON if it parses and as a
// string otherwise. Throws ConfigError.
SweepConfig parse_sweep_config(std::string_view text, const std::vector<std::string>& overrides = {});
SweepConfig load_sweep_config(const std::string& path, const std::vector<std::string>& overrides = {});
std::string to_json(const SweepConfig& config);

// "a:b:step" (inclusive range) or "a,b,c". Throws ConfigError.
std::vector<double> parse_grid(std::string_view text);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

struct SweepResult {
  double beta = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double utility = 0.0;
  double fairness = 0.0;
  double pof = 1.0;
  double bof = 0.0;
  std::vector<double> per_agent;
  std::optional<double> surrogate;
};

struct SweepError {
  double beta = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepOutcome {
  std::vector<SweepResult> results;  // sorted by (beta, delta, seed)
  std::vector<SweepError> errors;
};

// Throws DivideByZero when the denominator is <= 0.
double compute_pof(double total_new, double total_base);
double compute_bof(double gini_new, double gini_base);

SweepOutcome run_sweep(const SweepConfig& config);

std::string format_results_csv(const std::vector<SweepResult>& results);
// Writes the CSV to config.output_path, the resolved config beside it as
// <output_path>.config.json and, when errors exist, <output_path>.errors.json.
void write_sweep_outputs(const SweepConfig& config, const SweepOutcome& outcome);

}  // namespace giff

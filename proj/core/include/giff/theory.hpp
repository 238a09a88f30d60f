#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "giff/allocation.hpp"
#include "giff/fairness.hpp"

namespace giff {

// F(Z + y) - F(Z).
double joint_gain(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y);
double joint_gain(const FairnessSpec& spec, const PayoffVector& z, std::span<const double> y);
// Sum over i of F(Z + y_i e_i) - F(Z).
double surrogate(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y);
double surrogate(const FairnessSpec& spec, const PayoffVector& z, std::span<const double> y);
// Upper bound on joint_gain - surrogate for y >= 0. Throws UnsupportedMetric
// for NegGini.
double slack_bound(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y);

struct SlackReport {
  double joint = 0.0;
  double surrogate = 0.0;
  double slack = 0.0;
  double bound = 0.0;
  FairnessKind metric = FairnessKind::kNegVariance;
};

inline constexpr double kBoundTolerance = 1e-9;

SlackReport slack_report(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y);
// As slack_report, but throws BoundViolation when slack < -tol or
// slack > bound + tol.
SlackReport verify_lower_bound(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y);

// --- Monotone surrogate -------------------------------------------------

// A single allocation round: `problem.scores` are the fairness-unaware
// utilities U and `fairness` (same shape) the per-entry fairness parts whose
// sum is the surrogate S.
struct SingleRound {
  AllocationProblem problem;
  std::vector<std::vector<double>> fairness;
};

// Fairness part = local gain F(Z + Q e_i) - F(Z) of each entry.
SingleRound make_single_round(AllocationProblem problem, const FairnessSpec& spec, const PayoffVector& z);

struct RoundChoice {
  std::vector<ActionId> assignment;
  double utility = 0.0;
  double surrogate = 0.0;
};

// Every feasible joint action with its U and S, in lexicographic order.
// Throws CapExceeded beyond `cap` joint actions.
std::vector<RoundChoice> enumerate_round(const SingleRound& round, std::uint64_t cap = kDefaultBruteForceCap);

// argmax of (1 - beta) U + beta S, preferring larger S, then larger U, then
// the lexicographically first assignment among near-maximisers.
const RoundChoice& select_choice(std::span<const RoundChoice> choices, double beta);

struct MonotoneReport {
  std::vector<double> betas;
  std::vector<double> surrogates;
  std::vector<double> utilities;
  std::vector<std::vector<ActionId>> assignments;
  std::vector<std::size_t> switches;  // grid index where the allocation changes
  bool monotone = true;
  bool strict_at_switches = true;
  std::string violation;  // empty when both checks hold

  bool ok() const { return monotone && strict_at_switches; }
};

MonotoneReport analyze_monotone(const SingleRound& round, std::span<const double> betas);
// Throws MonotoneViolation naming the offending beta pair.
MonotoneReport verify_monotone(const SingleRound& round, std::span<const double> betas);

// Small random round: 2..4 agents, each with a noop plus one or two of three
// shared actions, 1..2 resources, scores uniform on [0, 5] and payoffs
// uniform on [0, 5]. The metric cycles through NegVariance, linear GGF and
// alpha-fair(0.5) with the index.
SingleRound random_single_round(std::uint64_t seed, std::uint64_t index);

// --- Randomised bound trials --------------------------------------------

// A metric family usable at any n (GGF uses linear weights for that n).
struct TrialMetric {
  FairnessKind kind = FairnessKind::kNegVariance;
  double alpha = 1.0;

  std::string name() const;
  FairnessSpec spec_for(std::size_t n) const;
};

// alpha in {0, 0.5, 1, 2}, GGF, NegVariance, Maximin.
std::vector<TrialMetric> default_trial_metrics();
// Accepts the names produced by TrialMetric::name and the fairness kinds.
TrialMetric parse_trial_metric(const std::string& name);

struct TrialInstance {
  std::vector<double> z;
  std::vector<double> y;
};

// n uniform on 2..8, z_i uniform on [0.1, 10], y_i = 0 with probability 0.3
// and uniform on [0, 5] otherwise. Each index has its own stream.
TrialInstance random_trial(std::uint64_t seed, std::uint64_t index);

struct Counterexample {
  std::uint64_t trial = 0;
  std::string kind;  // "lower_bound" or "sandwich"
  TrialInstance instance;
  SlackReport report;
};

struct TrialSummary {
  std::string metric;
  std::uint64_t trials = 0;
  std::uint64_t lower_bound_violations = 0;
  std::uint64_t sandwich_violations = 0;
  double max_slack = 0.0;
  std::vector<Counterexample> counterexamples;  // ascending trial, at most 10

  bool passed() const { return lower_bound_violations == 0 && sandwich_violations == 0; }
};

TrialSummary run_bound_trials(const TrialMetric& metric, std::uint64_t trials, std::uint64_t seed);

}  // namespace giff

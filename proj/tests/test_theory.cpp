#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "giff/errors.hpp"
#include "giff/job_env.hpp"
#include "giff/theory.hpp"
#include "oracles.hpp"

using namespace giff;
using doctest::Approx;

namespace {

using Vec = std::vector<double>;

double pairwise_synergy(const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = i + 1; j < y.size(); ++j) s += y[i] * y[j];
  }
  const double n = static_cast<double>(y.size());
  return 2.0 / (n * n) * s;
}

Vec plus(Vec z, const Vec& y) {
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += y[i];
  return z;
}

// The job game's first round from a given payoff vector, as a single round.
SingleRound job_round(const Vec& z) {
  const JobEnvConfig c;
  JobEnvState s = job_env_reset(c);
  AllocationProblem p;
  p.n_agents = 4;
  p.capacities = {1.0};
  p.consumption = {{ActionId(0), {1.0}}, {ActionId(2), {0.0}}};
  for (int i = 0; i < 4; ++i) {
    p.action_sets.push_back({ActionId(0), ActionId(2)});
    double take = 0.0;
    for (const auto& av : job_env_q(c, s, AgentId(i))) {
      if (av.action == ActionId(0)) take = av.q;
    }
    p.scores.push_back({take, 0.0});
  }
  return make_single_round(std::move(p), FairnessSpec::neg_variance(), PayoffVector(z, PayoffMode::kCumulative));
}

}  // namespace

TEST_CASE("joint gain and surrogate examples") {
  const auto var = FairnessSpec::neg_variance();
  const Vec zero{0, 0}, ones{1, 1};
  CHECK(joint_gain(var, zero, ones) == Approx(oracle::neg_variance({1, 1}) - oracle::neg_variance({0, 0})));
  CHECK(joint_gain(var, zero, ones) == 0.0);
  CHECK(joint_gain(var, Vec{3, 1}, Vec{0, 0}) == 0.0);
  CHECK(joint_gain(FairnessSpec::maximin(), Vec{0, 1}, Vec{2, 0}) == Approx(1.0));

  const double local = oracle::neg_variance({1, 0}) - oracle::neg_variance({0, 0});
  CHECK(surrogate(var, zero, ones) == Approx(2 * local));
  CHECK(surrogate(var, zero, ones) == Approx(-0.5));
  CHECK(surrogate(var, Vec{2, 5}, Vec{0, 0}) == 0.0);
  CHECK_THROWS_AS(joint_gain(var, Vec{1, 2}, Vec{1}), LengthMismatch);
}

TEST_CASE("slack bound examples") {
  CHECK(slack_bound(FairnessSpec::neg_variance(), Vec{0, 0}, Vec{1, 1}) == Approx(2.0 / 4.0 * 1.0));
  CHECK(slack_bound(FairnessSpec::alpha_fair(0.5), Vec{1, 2}, Vec{3, 4}) == 0.0);
  CHECK(slack_bound(FairnessSpec::maximin(), Vec{0, 1}, Vec{2, 0}) == Approx(0.0));
  CHECK_THROWS_AS(slack_bound(FairnessSpec::neg_gini(), Vec{1, 2}, Vec{1, 1}), UnsupportedMetric);

  const SlackReport r = verify_lower_bound(FairnessSpec::neg_variance(), Vec{0, 0}, Vec{1, 1});
  CHECK(r.joint == Approx(0.0));
  CHECK(r.surrogate == Approx(-0.5));
  CHECK(r.slack == Approx(0.5));
  CHECK(r.bound == Approx(0.5));

  const SlackReport a = verify_lower_bound(FairnessSpec::alpha_fair(1.0), Vec{1, 2}, Vec{1, 1});
  CHECK(std::abs(a.slack) <= 1e-12);
  CHECK_THROWS_AS(verify_lower_bound(FairnessSpec::neg_variance(), Vec{0, 0}, Vec{-1, 1}), Error);
}

TEST_CASE("random trials: lower bound, sandwich, exactness") {
  for (const TrialMetric& metric : default_trial_metrics()) {
    const TrialSummary s = run_bound_trials(metric, 2000, 99);
    CHECK_MESSAGE(s.passed(), metric.name());
    CHECK(s.trials == 2000);
    CHECK(s.counterexamples.empty());
  }
  for (std::uint64_t t = 0; t < 2000; ++t) {
    const TrialInstance inst = random_trial(5, t);
    REQUIRE(inst.z.size() >= 2);
    REQUIRE(inst.z.size() <= 8);
    const std::size_t n = inst.z.size();
    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
      const auto spec = FairnessSpec::alpha_fair(alpha);
      CHECK(std::abs(joint_gain(spec, inst.z, inst.y) - surrogate(spec, inst.z, inst.y)) <= 1e-9);
    }
    const auto var = slack_report(FairnessSpec::neg_variance(), inst.z, inst.y);
    CHECK(std::abs(var.slack - pairwise_synergy(inst.y)) <= 1e-9);
    const auto positive = std::count_if(inst.y.begin(), inst.y.end(), [](double v) { return v > 0.0; });
    CHECK((var.slack <= 1e-9) == (positive <= 1));

    // Independent recomputation of the surrogate.
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += oracle::gain(oracle::neg_variance, inst.z, i, inst.y[i]);
    CHECK(var.surrogate == Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("GGF slack vanishes when the ranking is preserved") {
  std::mt19937_64 gen(59);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + gen() % 7;
    Vec z(n), y(n);
    double level = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      level += 1.0 + std::uniform_real_distribution<double>(0.0, 3.0)(gen);
      z[i] = level;
    }
    // Small increments never let one agent overtake the next.
    for (std::size_t i = 0; i < n; ++i) y[i] = std::uniform_real_distribution<double>(0.0, 0.9)(gen);
    std::shuffle(z.begin(), z.end(), gen);
    const auto r = slack_report(FairnessSpec::ggf(linear_ggf_weights(n)), z, y);
    CHECK(r.slack <= 1e-9);
    CHECK(r.slack >= -1e-9);
  }
}

TEST_CASE("maximin with several minimisers") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 3 + gen() % 6;
    const double m = u(gen);
    Vec z(n), y(n, 0.0);
    const std::size_t ties = 2 + gen() % (n - 2);
    for (std::size_t i = 0; i < n; ++i) z[i] = i < ties ? m : m + 0.5 + u(gen);
    for (std::size_t i = 0; i < n; ++i) y[i] = gen() % 4 == 0 ? 0.0 : u(gen);
    const auto spec = FairnessSpec::maximin();
    const double s = surrogate(spec, z, y);
    CHECK(std::abs(s) <= 1e-12);

    double min_s = 1e300, sigma = 1e300;
    for (std::size_t i = 0; i < ties; ++i) min_s = std::min(min_s, y[i]);
    for (std::size_t i = ties; i < n; ++i) sigma = std::min(sigma, z[i]);
    double floor_after = 1e300;
    for (std::size_t i = ties; i < n; ++i) floor_after = std::min(floor_after, z[i] + y[i]);
    const double joint = joint_gain(spec, z, y);
    CHECK(std::abs(joint - std::min(min_s, floor_after - m)) <= 1e-9);
    CHECK(std::abs(slack_bound(spec, z, y) - std::min(min_s, floor_after - m)) <= 1e-9);

    // With no increments outside the tie, the closed form uses sigma itself.
    Vec y_tie = y;
    for (std::size_t i = ties; i < n; ++i) y_tie[i] = 0.0;
    CHECK(std::abs(joint_gain(spec, z, y_tie) - std::min(min_s, sigma - m)) <= 1e-9);
  }
}

TEST_CASE("sandwich holds for every supported metric") {
  for (std::uint64_t t = 0; t < 3000; ++t) {
    const TrialInstance inst = random_trial(17, t);
    for (const TrialMetric& metric : default_trial_metrics()) {
      const auto r = slack_report(metric.spec_for(inst.z.size()), inst.z, inst.y);
      CHECK(r.surrogate <= r.joint + 1e-9);
      CHECK(r.joint <= r.surrogate + r.bound + 1e-9);
      CHECK(std::abs(r.slack - (r.joint - r.surrogate)) <= 1e-9);
      CHECK(std::abs(r.joint - (evaluate(metric.spec_for(inst.z.size()), plus(inst.z, inst.y)) -
                                evaluate(metric.spec_for(inst.z.size()), inst.z))) <= 1e-9);
    }
  }
}

TEST_CASE("monotone surrogate on the job round") {
  const SingleRound round = job_round({3, 0, 1, 2});
  const std::vector<double> grid{0, 0.25, 0.5, 0.75, 0.99};
  const MonotoneReport r = verify_monotone(round, grid);
  CHECK(r.monotone);
  CHECK(r.strict_at_switches);
  for (std::size_t k = 1; k < r.surrogates.size(); ++k) CHECK(r.surrogates[k] >= r.surrogates[k - 1] - 1e-9);

  // Every taker ties on U at beta 0; the surrogate breaks the tie toward agent 1.
  CHECK(r.assignments.front() == std::vector<ActionId>{ActionId(2), ActionId(0), ActionId(2), ActionId(2)});
  // The pure-S endpoint maximises the surrogate outright.
  const auto choices = enumerate_round(round);
  const RoundChoice& pure = select_choice(choices, 1.0);
  for (const RoundChoice& c : choices) CHECK(c.surrogate <= pure.surrogate + 1e-9);
}

TEST_CASE("degenerate monotone grids") {
  AllocationProblem p;
  p.n_agents = 2;
  p.action_sets = {{ActionId(0), ActionId(1)}, {ActionId(0)}};
  p.scores = {{0.0, 1.0}, {0.0}};
  p.consumption = {{ActionId(0), {}}, {ActionId(1), {}}};
  SingleRound flat;
  flat.problem = p;
  flat.fairness = {{2.0, 2.0}, {0.0}};
  const MonotoneReport r = analyze_monotone(flat, std::vector<double>{0, 0.3, 0.6, 0.9});
  CHECK(r.ok());
  CHECK(r.switches.empty());

  const MonotoneReport one = analyze_monotone(job_round({1, 1, 1, 1}), std::vector<double>{0.4});
  CHECK(one.ok());
  CHECK_THROWS(analyze_monotone(flat, std::vector<double>{0.5, 0.2}));
}

TEST_CASE("random single rounds are monotone") {
  for (std::uint64_t i = 0; i < 40; ++i) {
    const SingleRound round = random_single_round(3, i);
    CHECK(round.problem.n_agents <= 4);
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(0.99 * k / 20.0);
    CHECK(analyze_monotone(round, grid).ok());
  }
}

TEST_CASE("trial metric names") {
  CHECK(default_trial_metrics().size() == 7);
  for (const TrialMetric& m : default_trial_metrics()) CHECK(parse_trial_metric(m.name()).name() == m.name());
  CHECK_THROWS(parse_trial_metric("jain"));
}

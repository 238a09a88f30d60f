// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "giff/allocation.hpp"
#include "giff/job_env.hpp"
#include "giff/sweep.hpp"
#include "giff/theory.hpp"

using namespace giff;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::uint64_t kTrials = 10000;
constexpr std::uint64_t kSeed = 20240601;

Outcome theorem_one() {
  Timer t;
  Outcome o;
  std::uint64_t lower = 0, sandwich = 0;
  for (const TrialMetric& m : default_trial_metrics()) {
    const TrialSummary s = run_bound_trials(m, kTrials, kSeed);
    lower += s.lower_bound_violations;
    sandwich += s.sandwich_violations;
    if (!s.passed()) o.detail += " " + m.name() + " failed;";
  }
  const double secs = t.seconds();
  o.pass = lower == 0 && sandwich == 0 && secs < 30.0;
  o.detail = fmt("7 metrics x %llu trials, %llu lower-bound and %llu sandwich violations, %.1fs",
                 static_cast<unsigned long long>(kTrials), static_cast<unsigned long long>(lower),
                 static_cast<unsigned long long>(sandwich), secs) +
             o.detail;
  return o;
}

Outcome alpha_exactness() {
  double worst = 0.0;
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    const auto spec = FairnessSpec::alpha_fair(alpha);
    for (std::uint64_t i = 0; i < kTrials; ++i) {
      const TrialInstance inst = random_trial(kSeed, i);
      worst = std::max(worst, std::abs(joint_gain(spec, inst.z, inst.y) - surrogate(spec, inst.z, inst.y)));
    }
  }
  return {worst <= 1e-9, fmt("max |joint - surrogate| = %.3g over 4 x %llu trials", worst,
                             static_cast<unsigned long long>(kTrials))};
}

Outcome variance_slack() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < kTrials; ++i) {
    const TrialInstance inst = random_trial(kSeed, i);
    const std::size_t n = inst.y.size();
    double pairs = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) pairs += inst.y[a] * inst.y[b];
    }
    const double expect = 2.0 * pairs / static_cast<double>(n * n);
    const auto spec = FairnessSpec::neg_variance();
    const double slack = joint_gain(spec, inst.z, inst.y) - surrogate(spec, inst.z, inst.y);
    worst = std::max(worst, std::abs(slack - expect));
  }
  return {worst <= 1e-9, fmt("max |slack - 2/n^2 sum y_i y_j| = %.3g", worst)};
}

Outcome monotone() {
  Timer t;
  constexpr std::uint64_t kProblems = 50;
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(0.05 * k);
  grid.push_back(0.99);
  std::uint64_t failures = 0, switches = 0, endpoint_failures = 0;
  std::size_t max_agents = 0, max_actions = 0;
  for (std::uint64_t p = 0; p < kProblems; ++p) {
    const SingleRound round = random_single_round(kSeed, p);
    max_agents = std::max(max_agents, round.problem.n_agents);
    for (const auto& set : round.problem.action_sets) max_actions = std::max(max_actions, set.size());
    const MonotoneReport r = analyze_monotone(round, grid);
    if (!r.ok()) ++failures;
    switches += r.switches.size();
    // At beta = 1 the choice maximises S outright.
    const auto choices = enumerate_round(round);
    const double s_end = select_choice(choices, 1.0).surrogate;
    for (const RoundChoice& c : choices) {
      if (c.surrogate > s_end + 1e-9) {
        ++endpoint_failures;
        break;
      }
    }
    if (s_end < r.surrogates.back() - 1e-9) ++endpoint_failures;
  }
  const double secs = t.seconds();
  return {failures == 0 && endpoint_failures == 0 && max_agents <= 4 && max_actions <= 3 && secs < 10.0,
          fmt("%llu problems (n <= %zu, m <= %zu), 21-point grid, %llu switches, %llu non-monotone, "
              "%llu endpoint failures, %.2fs",
              static_cast<unsigned long long>(kProblems), max_agents, max_actions,
              static_cast<unsigned long long>(switches), static_cast<unsigned long long>(failures),
              static_cast<unsigned long long>(endpoint_failures), secs)};
}

AllocationProblem random_problem(std::mt19937_64& gen, bool unit_demand) {
  const std::size_t n = 1 + gen() % 6, m = 1 + gen() % 5, k = 1 + gen() % 3;
  std::uniform_real_distribution<double> score(-2.0, 5.0);
  AllocationProblem p;
  p.n_agents = n;
  for (std::size_t r = 0; r < k; ++r) p.capacities.push_back(static_cast<double>(gen() % 3));
  const std::size_t n_actions = unit_demand ? std::min(m, k + 1) : m;
  p.consumption[ActionId(0)] = std::vector<double>(k, 0.0);
  for (std::size_t a = 1; a < n_actions; ++a) {
    std::vector<double> use(k, 0.0);
    if (unit_demand) {
      use[a - 1] = 1.0;
    } else {
      for (auto& u : use) u = static_cast<double>(gen() % 3) * 0.5;
    }
    p.consumption[ActionId(static_cast<int>(a))] = use;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ActionId> set;
    std::vector<double> scores;
    for (std::size_t a = 0; a < n_actions; ++a) {
      if (a == 0 || gen() % 4 != 0) {
        set.emplace_back(static_cast<int>(a));
        scores.push_back(gen() % 3 == 0 ? static_cast<double>(gen() % 3) : score(gen));
      }
    }
    p.action_sets.push_back(set);
    p.scores.push_back(scores);
  }
  return p;
}

Outcome solver_equivalence() {
  Timer t;
  std::mt19937_64 gen(kSeed);
  int mismatches = 0, bipartite = 0, bipartite_mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    const AllocationProblem p = random_problem(gen, i % 2 == 0);
    const Allocation brute = solve_brute_force(p);
    const Allocation bnb = solve_bnb(p);
    if (std::abs(brute.objective - bnb.objective) > 1e-9 || !is_feasible(p, bnb.assignment)) ++mismatches;
    if (detect_bipartite(p)) {
      ++bipartite;
      const Allocation bip = solve_bipartite(p);
      if (std::abs(brute.objective - bip.objective) > 1e-9 || !is_feasible(p, bip.assignment)) {
        ++bipartite_mismatches;
      }
    }
  }
  const double secs = t.seconds();
  return {mismatches == 0 && bipartite_mismatches == 0 && bipartite > 0 && secs < 60.0,
          fmt("500 problems, %d BnB mismatches, %d bipartite-shaped with %d mismatches, %.2fs", mismatches,
              bipartite, bipartite_mismatches, secs)};
}

std::vector<double> sorted(const PayoffVector& z) {
  std::vector<double> v(z.values().begin(), z.values().end());
  std::sort(v.begin(), v.end());
  return v;
}

Outcome job_reproduction() {
  Timer t;
  const JobEnvConfig c;
  const auto ggf = FairnessSpec::ggf(linear_ggf_weights(4));
  const EpisodeResult greedy = run_job_episode(c, ggf, GiffParams{0.0, 0.0});
  const bool a = greedy.utility == 100.0 && sorted(greedy.final_payoffs) == std::vector<double>{0, 0, 0, 100};
  const EpisodeResult rr = run_job_scripted(c, ggf, JobScript::kRoundRobin);
  const bool b = rr.utility == 96.0 && sorted(rr.final_payoffs) == std::vector<double>{24, 24, 24, 24};

  SweepConfig sweep = parse_sweep_config(R"({"beta_grid": "0:1:0.1", "delta_grid": "0:1:0.1"})");
  const SweepOutcome grid = run_sweep(sweep);
  bool c_ok = false;
  double best_u = 0.0, best_min = 0.0, best_beta = 0.0, best_delta = 0.0;
  for (const SweepResult& r : grid.results) {
    const double lo = *std::min_element(r.per_agent.begin(), r.per_agent.end());
    if (r.delta <= 0.5 && r.utility >= 90.0 && lo >= 20.0 && (!c_ok || r.utility > best_u)) {
      c_ok = true;
      best_u = r.utility;
      best_min = lo;
      best_beta = r.beta;
      best_delta = r.delta;
    }
  }
  const double secs = t.seconds();
  return {a && b && c_ok && grid.errors.empty() && secs < 120.0,
          fmt("(a) greedy U=%g %s; (b) round-robin U=%g %s; (c) %s at beta=%g delta=%g with U=%g, min=%g; "
              "121-point grid in %.2fs",
              greedy.utility, a ? "monopoly" : "NOT a monopoly", rr.utility, b ? "24 each" : "uneven",
              c_ok ? "found" : "not found", best_beta, best_delta, best_u, best_min, secs)};
}

Outcome advantage_necessity() {
  const JobEnvConfig c;
  std::string detail;
  bool any = false;
  const std::vector<std::pair<std::string, FairnessSpec>> specs = {
      {"GGF", FairnessSpec::ggf(linear_ggf_weights(4))},
      {"alpha-fair(1, floor 1)", FairnessSpec::alpha_fair(1.0, 1.0)}};
  for (const auto& [name, spec] : specs) {
    const EpisodeResult greedy = run_job_episode(c, spec, GiffParams{0.0, 0.0});
    const EpisodeResult pure = run_job_episode(c, spec, GiffParams{1.0, 0.0});
    const auto spread = [](const EpisodeResult& r) {
      const auto v = sorted(r.final_payoffs);
      return v.back() - v.front();
    };
    const bool same = sorted(greedy.final_payoffs) == sorted(pure.final_payoffs);
    double best_spread = spread(pure), best_delta = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double delta = 0.1 * k;
      const double s = spread(run_job_episode(c, spec, GiffParams{1.0, delta}));
      if (s < best_spread) best_spread = s, best_delta = delta;
    }
    const bool ok = same && best_spread < spread(pure);
    any = any || ok;
    detail += fmt("%s%s: beta=1,delta=0 spread %g (%s beta=0), best delta=%g spread %g", detail.empty() ? "" : "; ",
                  name.c_str(), spread(pure), same ? "same as" : "differs from", best_delta, best_spread);
  }
  return {any, detail};
}

std::vector<double> giff_beta_grid() {
  std::vector<double> out{0.0};
  for (int k = 0; k < 33; ++k) out.push_back(1.0 - std::pow(10.0, -(0.5 + 4.0 * k / 32.0)));
  out.push_back(1.0);
  return out;
}

std::vector<double> six_lambda_grid() {
  std::vector<double> out{0.0};
  for (int k = 0; k < 33; ++k) out.push_back(std::pow(10.0, -0.5 + 2.8 * k / 32.0));
  return out;
}

Outcome homelessness() {
  Timer t;
  const std::string base = R"({"environment": "intervention", "fairness": {"kind": "gini"}, "delta_grid": [0],
                               "seeds": [0], "env": {"intervention": {"households": 2000}}})";
  SweepConfig giff_cfg = parse_sweep_config(base);
  giff_cfg.beta_grid = giff_beta_grid();
  SweepConfig six_cfg = parse_sweep_config(base, {"env.intervention.method=six"});
  six_cfg.beta_grid = six_lambda_grid();
  const SweepOutcome giff_out = run_sweep(giff_cfg);
  const SweepOutcome six_out = run_sweep(six_cfg);

  const auto best_bof = [](const std::vector<SweepResult>& rows, double threshold) {
    double best = 0.0;
    for (const SweepResult& r : rows) {
      if (r.pof <= threshold && !std::isnan(r.bof)) best = std::max(best, r.bof);
    }
    return best;
  };
  std::vector<double> thresholds{1.10};
  for (const auto* rows : {&giff_out.results, &six_out.results}) {
    for (const SweepResult& r : *rows) {
      if (r.pof <= 1.10) thresholds.push_back(r.pof);
    }
  }
  int below = 0;
  double worst_gap = 1e300;
  for (double th : thresholds) {
    const double gap = best_bof(giff_out.results, th) - best_bof(six_out.results, th);
    worst_gap = std::min(worst_gap, gap);
    if (gap < -0.05) ++below;
  }
  const double giff_best = best_bof(giff_out.results, 1.10);
  const double six_best = best_bof(six_out.results, 1.10);
  const double secs = t.seconds();
  const bool ok = giff_out.errors.empty() && six_out.errors.empty() && giff_best >= 0.5 && below == 0 && secs < 120.0;
  return {ok, fmt("2000 households; best BoF at PoF <= 1.10: GIFF %.3f, SI-X %.3f; %zu thresholds, "
                  "min(GIFF - SI-X) = %.3f; %.1fs",
                  giff_best, six_best, thresholds.size(), worst_gap, secs)};
}

Outcome determinism() {
  const std::vector<std::string> configs = {
      R"({"beta_grid": "0:1:0.2", "delta_grid": "0:0.5:0.25", "seeds": [0, 1]})",
      R"({"environment": "matching", "beta_grid": "0:1:0.25", "delta_grid": [0, 0.3], "seeds": [0, 1, 2]})",
      R"({"environment": "intervention", "fairness": {"kind": "gini"}, "beta_grid": [0, 0.99, 0.999],
          "delta_grid": [0, 0.2], "env": {"intervention": {"households": 500}}})",
      R"({"single_round": true, "fairness": {"kind": "variance"}, "initial_payoffs": [3, 0, 1, 2],
          "beta_grid": "0:0.95:0.05", "delta_grid": [0]})"};
  int differing = 0;
  std::size_t rows = 0;
  for (const auto& text : configs) {
    SweepConfig serial = parse_sweep_config(text, {"workers=1"});
    SweepConfig parallel = parse_sweep_config(text, {"workers=4"});
    const std::string a = format_results_csv(run_sweep(serial).results);
    const std::string b = format_results_csv(run_sweep(parallel).results);
    const std::string c = format_results_csv(run_sweep(parallel).results);
    if (a != b || a != c) ++differing;
    rows += static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n')) - 1;
  }
  return {differing == 0,
          fmt("%zu sweep configs (%zu rows) rerun serially and with 4 workers, %d differing CSV bodies",
              configs.size(), rows, differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 local-gain lower bound and sandwich", theorem_one},
      {"2 alpha-fair surrogate exactness", alpha_exactness},
      {"3 variance slack formula", variance_slack},
      {"4 monotone surrogate", monotone},
      {"5 solver oracle equivalence", solver_equivalence},
      {"6 job allocation reproduction", job_reproduction},
      {"7 advantage correction necessity", advantage_necessity},
      {"8 intervention pipeline BoF/PoF", homelessness},
      {"9 sweep determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

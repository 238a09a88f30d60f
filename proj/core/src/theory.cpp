#include "giff/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "giff/errors.hpp"
#include "giff/random.hpp"

namespace giff {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_length(std::span<const double> z, std::span<const double> y) {
  if (z.size() != y.size()) {
    throw LengthMismatch("increment vector has " + std::to_string(y.size()) + " entries, payoffs have " +
                         std::to_string(z.size()));
  }
}

double variance_bound(std::span<const double> y) {
  const auto n = static_cast<double>(y.size());
  double pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = i + 1; j < y.size(); ++j) pairs += y[i] * y[j];
  }
  return 2.0 * pairs / (n * n);
}

double ggf_cap(std::span<const double> weights, std::span<const double> y) {
  double total = 0.0;
  double y_max = 0.0;
  std::size_t positive = 0;
  for (double v : y) {
    total += v;
    y_max = std::max(y_max, v);
    if (v > 0.0) ++positive;
  }
  if (y_max == 0.0) return 0.0;
  const auto q = std::min(positive, static_cast<std::size_t>(std::floor(total / y_max)));
  const double r = total - static_cast<double>(q) * y_max;
  double cap = 0.0;
  for (std::size_t k = 0; k < q; ++k) cap += weights[k];
  cap *= y_max;
  if (q < weights.size()) cap += r * weights[q];
  return cap;
}

double maximin_bound(std::span<const double> z, std::span<const double> y) {
  const double m = *std::min_element(z.begin(), z.end());
  std::vector<std::size_t> minimisers;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == m) minimisers.push_back(i);
  }
  if (minimisers.size() >= 2) {
    // Every local gain is zero, so the slack is the joint gain itself. The
    // non-minimisers' post-update floor replaces their baseline floor so the
    // bound stays valid when they also receive increments.
    double min_y = kInf;
    for (std::size_t i : minimisers) min_y = std::min(min_y, y[i]);
    double floor = kInf;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (z[j] != m) floor = std::min(floor, z[j] + y[j]);
    }
    return std::min(min_y, floor - m);
  }
  const std::size_t star = minimisers.front();
  double sigma = kInf;
  double sigma_after = kInf;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j == star) continue;
    sigma = std::min(sigma, z[j]);
    sigma_after = std::min(sigma_after, z[j] + y[j]);
  }
  if (sigma == kInf) return 0.0;
  return std::min(y[star], sigma_after - sigma);
}

std::string format_vector(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

}  // namespace

double joint_gain(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y) {
  require_same_length(z, y);
  std::vector<double> next(z.begin(), z.end());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += y[i];
  return evaluate(spec, next) - evaluate(spec, z);
}

double joint_gain(const FairnessSpec& spec, const PayoffVector& z, std::span<const double> y) {
  return joint_gain(spec, z.values(), y);
}

double surrogate(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y) {
  require_same_length(z, y);
  const double base = evaluate(spec, z);
  std::vector<double> next(z.begin(), z.end());
  double total = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = z[i] + y[i];
    total += evaluate(spec, next) - base;
    next[i] = z[i];
  }
  return total;
}

double surrogate(const FairnessSpec& spec, const PayoffVector& z, std::span<const double> y) {
  return surrogate(spec, z.values(), y);
}

double slack_bound(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y) {
  require_same_length(z, y);
  switch (spec.kind) {
    case FairnessKind::kAlphaFair:
      return 0.0;
    case FairnessKind::kNegVariance:
      return variance_bound(y);
    case FairnessKind::kGgf:
      if (spec.weights.size() != z.size()) throw SpecError("GGF weight count differs from the payoff length");
      return ggf_cap(spec.weights, y) - surrogate(spec, z, y);
    case FairnessKind::kMaximin:
      return maximin_bound(z, y);
    case FairnessKind::kNegGini:
      break;
  }
  throw UnsupportedMetric("no slack bound is available for " + std::string(to_string(spec.kind)));
}

SlackReport slack_report(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y) {
  SlackReport r;
  r.metric = spec.kind;
  r.bound = slack_bound(spec, z, y);
  r.joint = joint_gain(spec, z, y);
  r.surrogate = surrogate(spec, z, y);
  r.slack = r.joint - r.surrogate;
  return r;
}

SlackReport verify_lower_bound(const FairnessSpec& spec, std::span<const double> z, std::span<const double> y) {
  for (double v : y) {
    if (v < 0.0) throw DomainError("increments must be nonnegative");
  }
  const SlackReport r = slack_report(spec, z, y);
  if (r.slack < -kBoundTolerance || r.slack > r.bound + kBoundTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << to_string(spec.kind) << ": joint " << r.joint << ", surrogate " << r.surrogate << ", bound "
        << r.bound << " at z=" << format_vector(z) << " y=" << format_vector(y);
    throw BoundViolation(msg.str());
  }
  return r;
}

SingleRound make_single_round(AllocationProblem problem, const FairnessSpec& spec, const PayoffVector& z) {
  problem.validate();
  if (z.size() < problem.n_agents) throw ShapeError("payoff vector is shorter than the agent count");
  const double base = evaluate(spec, z);
  std::vector<double> next(z.values().begin(), z.values().end());
  SingleRound round;
  for (std::size_t i = 0; i < problem.n_agents; ++i) {
    std::vector<double> row;
    for (double q : problem.scores[i]) {
      next[i] = z[i] + q;
      row.push_back(evaluate(spec, next) - base);
      next[i] = z[i];
    }
    round.fairness.push_back(std::move(row));
  }
  round.problem = std::move(problem);
  return round;
}

std::vector<RoundChoice> enumerate_round(const SingleRound& round, std::uint64_t cap) {
  const AllocationProblem& p = round.problem;
  p.validate();
  const std::size_t n = p.n_agents;
  std::uint64_t space = 1;
  for (const auto& set : p.action_sets) {
    if (space > cap / set.size()) throw CapExceeded("single-round enumeration exceeds the cap");
    space *= set.size();
  }
  std::vector<RoundChoice> out;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> used(p.n_resources());
  for (std::uint64_t step = 0; step < space; ++step) {
    std::fill(used.begin(), used.end(), 0.0);
    RoundChoice c;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const ActionId a = p.action_sets[i][idx[i]];
      const auto& use = p.consumption_of(a);
      for (std::size_t r = 0; r < used.size(); ++r) {
        used[r] += use[r];
        if (used[r] > p.capacities[r] + kCapacityTolerance) ok = false;
      }
      c.assignment.push_back(a);
      c.utility += p.scores[i][idx[i]];
      c.surrogate += round.fairness[i][idx[i]];
    }
    if (ok) out.push_back(std::move(c));
    for (std::size_t i = n; i-- > 0;) {
      if (++idx[i] < p.action_sets[i].size()) break;
      idx[i] = 0;
    }
  }
  if (out.empty()) throw Infeasible("no joint action satisfies the capacities");
  return out;
}

const RoundChoice& select_choice(std::span<const RoundChoice> choices, double beta) {
  if (choices.empty()) throw Infeasible("no candidate allocations");
  auto value = [beta](const RoundChoice& c) { return (1.0 - beta) * c.utility + beta * c.surrogate; };
  double best = -kInf;
  for (const auto& c : choices) best = std::max(best, value(c));
  const RoundChoice* pick = nullptr;
  for (const auto& c : choices) {
    if (value(c) < best - kObjectiveTolerance) continue;
    if (!pick || c.surrogate > pick->surrogate ||
        (c.surrogate == pick->surrogate && c.utility > pick->utility)) {
      pick = &c;
    }
  }
  return *pick;
}

MonotoneReport analyze_monotone(const SingleRound& round, std::span<const double> betas) {
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (!(betas[k] >= 0.0 && betas[k] <= 1.0)) throw SpecError("beta grid values must lie in [0, 1]");
    if (k > 0 && !(betas[k] > betas[k - 1])) throw SpecError("beta grid must be strictly ascending");
  }
  const auto choices = enumerate_round(round);
  MonotoneReport report;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const RoundChoice& c = select_choice(choices, betas[k]);
    report.betas.push_back(betas[k]);
    report.surrogates.push_back(c.surrogate);
    report.utilities.push_back(c.utility);
    report.assignments.push_back(c.assignment);
    if (k == 0) continue;
    const double prev = report.surrogates[k - 1];
    std::ostringstream msg;
    msg.precision(17);
    if (c.surrogate < prev - kObjectiveTolerance && report.monotone) {
      report.monotone = false;
      msg << "surrogate fell from " << prev << " to " << c.surrogate << " between beta " << betas[k - 1]
          << " and " << betas[k];
    }
    if (c.assignment != report.assignments[k - 1]) {
      report.switches.push_back(k);
      if (!(c.surrogate > prev) && report.strict_at_switches) {
        report.strict_at_switches = false;
        if (msg.str().empty()) {
          msg << "allocation switched between beta " << betas[k - 1] << " and " << betas[k]
              << " without a strict surrogate increase";
        }
      }
    }
    if (report.violation.empty()) report.violation = msg.str();
  }
  return report;
}

MonotoneReport verify_monotone(const SingleRound& round, std::span<const double> betas) {
  MonotoneReport report = analyze_monotone(round, betas);
  if (!report.ok()) throw MonotoneViolation(report.violation);
  return report;
}

std::string TrialMetric::name() const {
  if (kind != FairnessKind::kAlphaFair) return std::string(to_string(kind));
  std::ostringstream os;
  os << "alpha_fair(" << alpha << ")";
  return os.str();
}

FairnessSpec TrialMetric::spec_for(std::size_t n) const {
  switch (kind) {
    case FairnessKind::kAlphaFair: return FairnessSpec::alpha_fair(alpha);
    case FairnessKind::kGgf: return FairnessSpec::ggf(linear_ggf_weights(n));
    case FairnessKind::kNegVariance: return FairnessSpec::neg_variance();
    case FairnessKind::kNegGini: return FairnessSpec::neg_gini();
    case FairnessKind::kMaximin: return FairnessSpec::maximin();
  }
  throw SpecError("unknown metric");
}

std::vector<TrialMetric> default_trial_metrics() {
  return {{FairnessKind::kAlphaFair, 0.0}, {FairnessKind::kAlphaFair, 0.5}, {FairnessKind::kAlphaFair, 1.0},
          {FairnessKind::kAlphaFair, 2.0}, {FairnessKind::kGgf},            {FairnessKind::kNegVariance},
          {FairnessKind::kMaximin}};
}

TrialMetric parse_trial_metric(const std::string& name) {
  for (const TrialMetric& m : default_trial_metrics()) {
    if (m.name() == name) return m;
  }
  const auto open = name.find('(');
  if (open != std::string::npos && name.back() == ')') {
    TrialMetric m{parse_fairness_kind(name.substr(0, open))};
    if (m.kind != FairnessKind::kAlphaFair) throw SpecError("only alpha_fair takes a parameter");
    try {
      m.alpha = std::stod(name.substr(open + 1, name.size() - open - 2));
    } catch (const std::exception&) {
      throw SpecError("bad alpha in metric '" + name + "'");
    }
    return m;
  }
  return TrialMetric{parse_fairness_kind(name)};
}

TrialInstance random_trial(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::derive(seed, index);
  const auto n = static_cast<std::size_t>(rng.uniform_int(2, 8));
  TrialInstance t;
  for (std::size_t i = 0; i < n; ++i) t.z.push_back(rng.uniform(0.1, 10.0));
  for (std::size_t i = 0; i < n; ++i) t.y.push_back(rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 5.0));
  return t;
}

SingleRound random_single_round(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::derive(seed, index);
  const auto n = static_cast<std::size_t>(rng.uniform_int(2, 4));
  const auto k = static_cast<std::size_t>(rng.uniform_int(1, 2));
  AllocationProblem p;
  p.n_agents = n;
  for (std::size_t r = 0; r < k; ++r) p.capacities.push_back(static_cast<double>(rng.uniform_int(1, 2)));
  p.consumption[ActionId(0)] = std::vector<double>(k, 0.0);
  for (int a = 1; a <= 3; ++a) {
    std::vector<double> use(k, 0.0);
    use[rng.below(k)] = 1.0;
    for (std::size_t r = 0; r < k; ++r) {
      if (rng.bernoulli(0.3)) use[r] += 1.0;
    }
    p.consumption[ActionId(a)] = std::move(use);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ActionId> set{ActionId(0)};
    const auto extra = rng.uniform_int(1, 2);
    while (static_cast<std::int64_t>(set.size()) <= extra) {
      const ActionId a(static_cast<ActionId::value_type>(rng.uniform_int(1, 3)));
      if (std::find(set.begin(), set.end(), a) == set.end()) set.push_back(a);
    }
    std::sort(set.begin(), set.end());
    std::vector<double> scores;
    for (ActionId a : set) scores.push_back(a == ActionId(0) ? 0.0 : rng.uniform(0.0, 5.0));
    p.action_sets.push_back(std::move(set));
    p.scores.push_back(std::move(scores));
  }
  std::vector<double> z;
  for (std::size_t i = 0; i < n; ++i) z.push_back(rng.uniform(0.0, 5.0));
  FairnessSpec spec;
  switch (index % 3) {
    case 0: spec = FairnessSpec::neg_variance(); break;
    case 1: spec = FairnessSpec::ggf(linear_ggf_weights(n)); break;
    default: spec = FairnessSpec::alpha_fair(0.5); break;
  }
  return make_single_round(std::move(p), spec, PayoffVector(std::move(z), PayoffMode::kCumulative));
}

TrialSummary run_bound_trials(const TrialMetric& metric, std::uint64_t trials, std::uint64_t seed) {
  TrialSummary summary;
  summary.metric = metric.name();
  summary.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    TrialInstance inst = random_trial(seed, t);
    const SlackReport r = slack_report(metric.spec_for(inst.z.size()), inst.z, inst.y);
    summary.max_slack = std::max(summary.max_slack, r.slack);
    const char* kind = nullptr;
    if (r.slack < -kBoundTolerance) {
      ++summary.lower_bound_violations;
      kind = "lower_bound";
    } else if (r.slack > r.bound + kBoundTolerance) {
      ++summary.sandwich_violations;
      kind = "sandwich";
    }
    if (kind && summary.counterexamples.size() < 10) {
      summary.counterexamples.push_back({t, kind, std::move(inst), r});
    }
  }
  return summary;
}

}  // namespace giff

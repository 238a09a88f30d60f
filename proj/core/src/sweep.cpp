#include "giff/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"
#include "giff/theory.hpp"
#include "json.hpp"

namespace giff {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- enums

template <typename E>
using NameTable = std::vector<std::pair<const char*, E>>;

const NameTable<EnvironmentKind> kEnvironmentNames = {
    {"job", EnvironmentKind::kJob},
    {"matching", EnvironmentKind::kMatching},
    {"intervention", EnvironmentKind::kIntervention}};
const NameTable<CounterfactualMode> kCounterfactualNames = {
    {"exact", CounterfactualMode::kExact}, {"self_approx", CounterfactualMode::kSelfApprox}};
const NameTable<BaselineMode> kBaselineNames = {{"mean", BaselineMode::kMean}, {"max", BaselineMode::kMax}};
const NameTable<WeightingMode> kWeightingNames = {{"convex", WeightingMode::kConvex},
                                                  {"additive", WeightingMode::kAdditive}};
const NameTable<PayoffMode> kPayoffNames = {{"cumulative", PayoffMode::kCumulative},
                                            {"average", PayoffMode::kAverage}};
const NameTable<InterventionMethod> kMethodNames = {{"baseline", InterventionMethod::kBaseline},
                                                    {"giff", InterventionMethod::kGiff},
                                                    {"six", InterventionMethod::kSiX}};

template <typename E>
E from_name(const NameTable<E>& table, const std::string& name, const char* what) {
  for (const auto& [n, e] : table) {
    if (name == n) return e;
  }
  std::string allowed;
  for (const auto& entry : table) allowed += std::string(allowed.empty() ? "" : ", ") + entry.first;
  throw ConfigError(std::string("unknown ") + what + " '" + name + "' (expected one of " + allowed + ")");
}

template <typename E>
std::string to_name(const NameTable<E>& table, E value) {
  for (const auto& [n, e] : table) {
    if (e == value) return n;
  }
  return "unknown";
}

// ---------------------------------------------------------------- JSON

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::vector<double> read_grid(const json& value) {
  if (value.is_string()) return parse_grid(value.get<std::string>());
  if (value.is_number()) return {value.get<double>()};
  return value.get<std::vector<double>>();
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

json job_to_json(const JobEnvConfig& c) {
  return {{"n_agents", c.n_agents},
          {"horizon", c.horizon},
          {"hold_reward", c.hold_reward},
          {"gamma", c.gamma},
          {"payoff_mode", to_name(kPayoffNames, c.payoff_mode)}};
}

json matching_to_json(const MatchingEnvConfig& c) {
  return {{"n_agents", c.n_agents},       {"horizon", c.horizon},         {"line_length", c.line_length},
          {"max_requests", c.max_requests}, {"value_min", c.value_min},   {"value_max", c.value_max},
          {"travel_cost", c.travel_cost}, {"payoff_mode", to_name(kPayoffNames, c.payoff_mode)}};
}

json intervention_to_json(const InterventionEnvConfig& c) {
  return {{"data_path", c.data_path},
          {"households", c.households},
          {"features", c.features},
          {"group_gap", c.group_gap},
          {"feature", c.feature},
          {"method", to_name(kMethodNames, c.method)},
          {"window_days", c.options.window_days},
          {"allow_overflow", c.options.allow_overflow},
          {"overflow_penalty", c.options.overflow_penalty},
          {"prior_weight", c.options.prior_weight}};
}

void job_from_json(const json& j, JobEnvConfig& c) {
  check_keys(j, {"n_agents", "horizon", "hold_reward", "gamma", "payoff_mode"}, "env.job");
  read(j, "n_agents", c.n_agents);
  read(j, "horizon", c.horizon);
  read(j, "hold_reward", c.hold_reward);
  read(j, "gamma", c.gamma);
  if (j.contains("payoff_mode")) c.payoff_mode = from_name(kPayoffNames, j.at("payoff_mode"), "payoff_mode");
}

void matching_from_json(const json& j, MatchingEnvConfig& c) {
  check_keys(j,
             {"n_agents", "horizon", "line_length", "max_requests", "value_min", "value_max", "travel_cost",
              "payoff_mode"},
             "env.matching");
  read(j, "n_agents", c.n_agents);
  read(j, "horizon", c.horizon);
  read(j, "line_length", c.line_length);
  read(j, "max_requests", c.max_requests);
  read(j, "value_min", c.value_min);
  read(j, "value_max", c.value_max);
  read(j, "travel_cost", c.travel_cost);
  if (j.contains("payoff_mode")) c.payoff_mode = from_name(kPayoffNames, j.at("payoff_mode"), "payoff_mode");
}

void intervention_from_json(const json& j, InterventionEnvConfig& c) {
  check_keys(j,
             {"data_path", "households", "features", "group_gap", "feature", "method", "window_days",
              "allow_overflow", "overflow_penalty", "prior_weight"},
             "env.intervention");
  read(j, "data_path", c.data_path);
  read(j, "households", c.households);
  read(j, "features", c.features);
  read(j, "group_gap", c.group_gap);
  read(j, "feature", c.feature);
  if (j.contains("method")) c.method = from_name(kMethodNames, j.at("method"), "intervention method");
  read(j, "window_days", c.options.window_days);
  read(j, "allow_overflow", c.options.allow_overflow);
  read(j, "overflow_penalty", c.options.overflow_penalty);
  read(j, "prior_weight", c.options.prior_weight);
}

SweepConfig config_from_json(const json& doc) {
  check_keys(doc,
             {"environment", "fairness", "beta_grid", "delta_grid", "seeds", "giff", "single_round",
              "initial_payoffs", "env", "output_path", "workers"},
             "config");
  SweepConfig c;
  if (doc.contains("environment")) c.environment = from_name(kEnvironmentNames, doc.at("environment"), "environment");
  if (doc.contains("fairness")) {
    const json& f = doc.at("fairness");
    check_keys(f, {"kind", "alpha", "weights", "epsilon_floor"}, "fairness");
    if (f.contains("kind")) {
      try {
        c.fairness.kind = parse_fairness_kind(f.at("kind").get<std::string>());
      } catch (const SpecError& e) {
        throw ConfigError(e.what());
      }
    }
    read(f, "alpha", c.fairness.alpha);
    read(f, "weights", c.fairness.weights);
    read(f, "epsilon_floor", c.fairness.epsilon_floor);
  }
  c.beta_grid = doc.contains("beta_grid") ? read_grid(doc.at("beta_grid")) : parse_grid("0:1:0.05");
  c.delta_grid = doc.contains("delta_grid") ? read_grid(doc.at("delta_grid")) : parse_grid("0:1:0.05");
  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    c.seeds = s.is_string() ? parse_seed_list(s.get<std::string>())
              : s.is_number() ? std::vector<std::uint64_t>{s.get<std::uint64_t>()}
                              : s.get<std::vector<std::uint64_t>>();
  }
  if (doc.contains("giff")) {
    const json& g = doc.at("giff");
    check_keys(g, {"counterfactual", "baseline", "weighting"}, "giff");
    if (g.contains("counterfactual")) {
      c.counterfactual = from_name(kCounterfactualNames, g.at("counterfactual"), "counterfactual mode");
    }
    if (g.contains("baseline")) c.baseline = from_name(kBaselineNames, g.at("baseline"), "baseline mode");
    if (g.contains("weighting")) c.weighting = from_name(kWeightingNames, g.at("weighting"), "weighting");
  }
  read(doc, "single_round", c.single_round);
  read(doc, "initial_payoffs", c.initial_payoffs);
  if (doc.contains("env")) {
    const json& e = doc.at("env");
    check_keys(e, {"job", "matching", "intervention"}, "env");
    if (e.contains("job")) job_from_json(e.at("job"), c.job);
    if (e.contains("matching")) matching_from_json(e.at("matching"), c.matching);
    if (e.contains("intervention")) intervention_from_json(e.at("intervention"), c.intervention);
  }
  read(doc, "output_path", c.output_path);
  read(doc, "workers", c.workers);
  c.intervention.options.counterfactual = c.counterfactual;
  c.intervention.options.baseline = c.baseline;
  return c;
}

// ---------------------------------------------------------------- running

struct PointOutcome {
  double utility = 0.0;
  double fairness = 0.0;
  double gini = kNaN;
  std::vector<double> per_agent;
  std::optional<double> surrogate;
};

double gini_or_nan(std::span<const double> z) {
  double total = 0.0;
  for (double v : z) total += v;
  return total > 0.0 ? gini_index(z) : kNaN;
}

AgentId agent_at(std::size_t i) { return AgentId(static_cast<AgentId::value_type>(i)); }

// Problem scored by raw Q plus the matching fairness parts (GIFF at beta 1).
PointOutcome single_round_point(const AllocationProblem& raw_problem, const QTable& raw, const FairnessSpec& spec,
                                const PayoffVector& z, const GiffParams& params) {
  GiffParams fair = params;
  fair.beta = 1.0;
  const QTable parts = giff_q(spec, z, raw, fair);
  SingleRound round;
  round.problem = raw_problem;
  for (std::size_t i = 0; i < raw_problem.n_agents; ++i) {
    std::vector<double> row;
    for (ActionId a : raw_problem.action_sets[i]) row.push_back(parts.q(agent_at(i), a));
    round.fairness.push_back(std::move(row));
  }
  const auto choices = enumerate_round(round);
  const RoundChoice& pick = select_choice(choices, params.beta);
  PointOutcome out;
  out.per_agent.assign(z.values().begin(), z.values().end());
  for (std::size_t i = 0; i < pick.assignment.size(); ++i) out.per_agent[i] += raw.q(agent_at(i), pick.assignment[i]);
  out.utility = pick.utility;
  out.fairness = evaluate(spec, out.per_agent);
  out.gini = gini_or_nan(out.per_agent);
  out.surrogate = pick.surrogate;
  return out;
}

PayoffVector initial_payoffs(const SweepConfig& config, std::size_t n, PayoffMode mode) {
  if (config.initial_payoffs.empty()) return PayoffVector(n, mode);
  if (config.initial_payoffs.size() != n) throw ConfigError("initial_payoffs must have one entry per agent");
  return PayoffVector(config.initial_payoffs, mode, 0);
}

PointOutcome job_single_round(const SweepConfig& config, const FairnessSpec& spec, const GiffParams& params) {
  JobEnvState state = job_env_reset(config.job);
  state.payoffs = initial_payoffs(config, static_cast<std::size_t>(config.job.n_agents), config.job.payoff_mode);
  const auto n = static_cast<std::size_t>(config.job.n_agents);
  QTable raw(n);
  AllocationProblem problem;
  problem.n_agents = n;
  problem.capacities = {1.0};
  problem.consumption[action_id(JobAction::kHoldOrTake)] = {1.0};
  problem.consumption[action_id(JobAction::kForfeit)] = {0.0};
  problem.consumption[action_id(JobAction::kIdle)] = {0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (const ActionValue& av : job_env_q(config.job, state, agent_at(i))) raw.set(agent_at(i), av.action, av.q);
    std::vector<ActionId> ids;
    std::vector<double> scores;
    for (JobAction a : job_legal_actions(state, agent_at(i))) {
      ids.push_back(action_id(a));
      scores.push_back(raw.q(agent_at(i), action_id(a)));
    }
    problem.action_sets.push_back(std::move(ids));
    problem.scores.push_back(std::move(scores));
  }
  return single_round_point(problem, raw, spec, state.payoffs, params);
}

PointOutcome matching_single_round(const SweepConfig& config, const FairnessSpec& spec, const GiffParams& params,
                                   std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(config.matching.n_agents);
  const PayoffVector z = initial_payoffs(config, n, config.matching.payoff_mode);
  const auto requests = matching_requests(config.matching, seed, 0);
  const QTable raw = matching_qtable(config.matching, requests);
  AllocationProblem problem;
  problem.n_agents = n;
  problem.capacities.assign(requests.size(), 1.0);
  problem.consumption[ActionId(0)] = std::vector<double>(requests.size(), 0.0);
  for (std::size_t r = 0; r < requests.size(); ++r) {
    std::vector<double> use(requests.size(), 0.0);
    use[r] = 1.0;
    problem.consumption[ActionId(static_cast<int>(r + 1))] = std::move(use);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ActionId> ids;
    std::vector<double> scores;
    for (const ActionValue& av : raw.actions(agent_at(i))) {
      ids.push_back(av.action);
      scores.push_back(av.q);
    }
    problem.action_sets.push_back(std::move(ids));
    problem.scores.push_back(std::move(scores));
  }
  return single_round_point(problem, raw, spec, z, params);
}

PointOutcome from_episode(const EpisodeResult& e) {
  PointOutcome out;
  out.utility = e.utility;
  out.fairness = e.fairness;
  out.per_agent.assign(e.final_payoffs.values().begin(), e.final_payoffs.values().end());
  out.gini = gini_or_nan(out.per_agent);
  return out;
}

class PointRunner {
 public:
  explicit PointRunner(const SweepConfig& config) : config_(config) {}

  // Loads or generates the household data for each seed up front so that
  // the parallel phase only reads shared state.
  void prepare(std::uint64_t seed) {
    if (config_.environment != EnvironmentKind::kIntervention) return;
    const auto& ic = config_.intervention;
    if (!ic.data_path.empty()) {
      if (!shared_) shared_ = load_household_csv(ic.data_path);
      return;
    }
    if (datasets_.contains(seed)) return;
    datasets_[seed] = make_synthetic_dataset({ic.households, ic.features, seed, ic.group_gap});
  }

  PointOutcome run(double grid_beta, double delta, std::uint64_t seed) const {
    const double beta = config_.weighting == WeightingMode::kAdditive ? grid_beta / (1.0 + grid_beta) : grid_beta;
    const GiffParams params{beta, delta, config_.counterfactual, config_.baseline};
    switch (config_.environment) {
      case EnvironmentKind::kJob: {
        const FairnessSpec spec = config_.fairness.resolve(static_cast<std::size_t>(config_.job.n_agents));
        if (config_.single_round) return job_single_round(config_, spec, params);
        return from_episode(run_job_episode(config_.job, spec, params));
      }
      case EnvironmentKind::kMatching: {
        const FairnessSpec spec = config_.fairness.resolve(static_cast<std::size_t>(config_.matching.n_agents));
        if (config_.single_round) return matching_single_round(config_, spec, params, seed);
        return from_episode(run_matching_episode(config_.matching, spec, params, seed));
      }
      case EnvironmentKind::kIntervention:
        return intervention(grid_beta, beta, delta, seed);
    }
    throw ConfigError("unknown environment");
  }

 private:
  PointOutcome intervention(double grid_beta, double beta, double delta, std::uint64_t seed) const {
    const auto& ic = config_.intervention;
    const InterventionDataset& data = shared_ ? *shared_ : datasets_.at(seed);
    std::size_t groups = 0;
    {
      std::vector<std::string> values;
      for (const Household& h : data.households) values.push_back(h.features.at(ic.feature));
      std::sort(values.begin(), values.end());
      groups = static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
    }
    const FairnessSpec spec = config_.fairness.resolve(groups);
    InterventionMethod method = ic.method;
    double weight = beta;
    if (grid_beta == 0.0 && delta == 0.0) method = InterventionMethod::kBaseline;
    if (method == InterventionMethod::kSiX) weight = grid_beta;
    const InterventionResult r = run_intervention_allocation(data, ic.feature, method, spec, weight, delta, ic.options);
    PointOutcome out;
    for (const auto& [name, mean] : r.group_means) out.per_agent.push_back(mean);
    out.utility = r.total_prob;
    out.fairness = evaluate(spec, out.per_agent);
    out.gini = r.gini;
    return out;
  }

  const SweepConfig& config_;
  std::optional<InterventionDataset> shared_;
  std::map<std::uint64_t, InterventionDataset> datasets_;
};

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

}  // namespace

FairnessSpec FairnessConfig::resolve(std::size_t n) const {
  FairnessSpec spec;
  spec.kind = kind;
  spec.alpha = alpha;
  spec.epsilon_floor = epsilon_floor;
  if (kind == FairnessKind::kGgf) spec.weights = weights.empty() ? linear_ggf_weights(n) : weights;
  spec.validate();
  return spec;
}

void SweepConfig::validate() const {
  if (beta_grid.empty() || delta_grid.empty()) throw ConfigError("beta_grid and delta_grid must be nonempty");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  // SI-X reads the grid value as its additive weight directly.
  const bool additive = weighting == WeightingMode::kAdditive ||
                        (environment == EnvironmentKind::kIntervention && intervention.method == InterventionMethod::kSiX);
  for (std::size_t k = 0; k < beta_grid.size(); ++k) {
    const double b = beta_grid[k];
    if (!additive && !(b >= 0.0 && b <= 1.0)) {
      throw ConfigError("convex weighting needs betas in [0, 1]");
    }
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("betas must be finite and >= 0");
    if (k > 0 && !(b > beta_grid[k - 1])) throw ConfigError("beta_grid must be strictly ascending");
  }
  for (std::size_t k = 0; k < delta_grid.size(); ++k) {
    if (!(delta_grid[k] >= 0.0) || !std::isfinite(delta_grid[k])) throw ConfigError("deltas must be >= 0");
    if (k > 0 && !(delta_grid[k] > delta_grid[k - 1])) throw ConfigError("delta_grid must be strictly ascending");
  }
  if (output_path.empty()) throw ConfigError("output_path must be set");
  if (single_round && environment == EnvironmentKind::kIntervention) {
    throw ConfigError("single_round mode supports the job and matching environments");
  }
  try {
    FairnessConfig probe = fairness;
    if (probe.kind == FairnessKind::kGgf && probe.weights.empty()) probe.weights = {1.0};
    probe.resolve(probe.weights.size());
    job.validate();
    matching.validate();
  } catch (const SpecError& e) {
    throw ConfigError(e.what());
  }
}

SweepConfig parse_sweep_config(std::string_view text, const std::vector<std::string>& overrides) {
  try {
    json doc = json::parse(text);
    for (const auto& o : overrides) apply_override(doc, o);
    SweepConfig c = config_from_json(doc);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

SweepConfig load_sweep_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_sweep_config(text.str(), overrides);
}

std::string to_json(const SweepConfig& c) {
  json fairness = {{"kind", std::string(to_string(c.fairness.kind))},
                   {"alpha", c.fairness.alpha},
                   {"weights", c.fairness.weights},
                   {"epsilon_floor", c.fairness.epsilon_floor}};
  json doc = {{"environment", to_name(kEnvironmentNames, c.environment)},
              {"fairness", fairness},
              {"beta_grid", c.beta_grid},
              {"delta_grid", c.delta_grid},
              {"seeds", c.seeds},
              {"giff",
               {{"counterfactual", to_name(kCounterfactualNames, c.counterfactual)},
                {"baseline", to_name(kBaselineNames, c.baseline)},
                {"weighting", to_name(kWeightingNames, c.weighting)}}},
              {"single_round", c.single_round},
              {"initial_payoffs", c.initial_payoffs},
              {"env",
               {{"job", job_to_json(c.job)},
                {"matching", matching_to_json(c.matching)},
                {"intervention", intervention_to_json(c.intervention)}}},
              {"output_path", c.output_path},
              {"workers", c.workers}};
  return doc.dump(2);
}

std::vector<double> parse_grid(std::string_view text) {
  const std::string s(text);
  std::vector<double> out;
  auto number = [&](const std::string& part) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("grid '" + s + "' has a bad number '" + part + "'");
    }
  };
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 + 1);
    const double lo = number(s.substr(0, c1));
    const double hi = number(s.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(s.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) throw ConfigError("grid '" + s + "' needs lo <= hi and step > 0");
    const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::int64_t k = 0; k <= count; ++k) {
      // Snap to 12 decimals so 0.1 * 3 prints and compares as 0.3.
      out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
    }
    return out;
  }
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(number(part));
  }
  if (out.empty()) throw ConfigError("grid '" + s + "' is empty");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (double v : parse_grid(text)) {
    if (v < 0.0 || v != std::floor(v)) throw ConfigError("seeds must be nonnegative integers");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

double compute_pof(double total_new, double total_base) {
  if (!(total_base > 0.0)) throw DivideByZero("PoF needs a positive baseline total");
  return total_new / total_base;
}

double compute_bof(double gini_new, double gini_base) {
  if (!(gini_base > 0.0)) throw DivideByZero("BoF needs a positive baseline Gini");
  return 1.0 - gini_new / gini_base;
}

SweepOutcome run_sweep(const SweepConfig& config) {
  config.validate();
  PointRunner runner(config);
  for (std::uint64_t seed : config.seeds) runner.prepare(seed);

  const std::size_t n_seeds = config.seeds.size();
  std::vector<std::optional<PointOutcome>> baselines(n_seeds);
  std::vector<std::string> baseline_errors(n_seeds);
  parallel_for(n_seeds, config.workers, [&](std::size_t s) {
    try {
      baselines[s] = runner.run(0.0, 0.0, config.seeds[s]);
    } catch (const std::exception& e) {
      baseline_errors[s] = std::string("baseline failed: ") + e.what();
    }
  });

  struct Point {
    double beta, delta;
    std::size_t seed_index;
  };
  std::vector<Point> points;
  for (double b : config.beta_grid) {
    for (double d : config.delta_grid) {
      for (std::size_t s = 0; s < n_seeds; ++s) points.push_back({b, d, s});
    }
  }
  const bool cost_style = config.environment == EnvironmentKind::kIntervention;
  std::vector<std::optional<SweepResult>> rows(points.size());
  std::vector<std::string> errors(points.size());
  parallel_for(points.size(), config.workers, [&](std::size_t k) {
    const Point& p = points[k];
    const std::uint64_t seed = config.seeds[p.seed_index];
    if (!baselines[p.seed_index]) {
      errors[k] = baseline_errors[p.seed_index];
      return;
    }
    try {
      const PointOutcome& base = *baselines[p.seed_index];
      const bool is_baseline = p.beta == 0.0 && p.delta == 0.0;
      const PointOutcome out = is_baseline ? base : runner.run(p.beta, p.delta, seed);
      SweepResult r;
      r.beta = p.beta;
      r.delta = p.delta;
      r.seed = seed;
      r.utility = out.utility;
      r.fairness = out.fairness;
      r.per_agent = out.per_agent;
      r.surrogate = out.surrogate;
      if (cost_style) {
        r.pof = compute_pof(out.utility, base.utility);
      } else {
        // Reward-style: larger is better, so invert to keep PoF > 1 meaning a loss.
        r.pof = out.utility > 0.0 ? base.utility / out.utility : std::numeric_limits<double>::infinity();
      }
      if (is_baseline) {
        r.pof = 1.0;
        r.bof = 0.0;
      } else {
        r.bof = base.gini > 0.0 && !std::isnan(out.gini) ? compute_bof(out.gini, base.gini) : kNaN;
      }
      rows[k] = std::move(r);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });

  SweepOutcome outcome;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (rows[k]) {
      outcome.results.push_back(std::move(*rows[k]));
    } else {
      outcome.errors.push_back({points[k].beta, points[k].delta, config.seeds[points[k].seed_index], errors[k]});
    }
  }
  std::stable_sort(outcome.results.begin(), outcome.results.end(), [](const SweepResult& a, const SweepResult& b) {
    return std::tie(a.beta, a.delta, a.seed) < std::tie(b.beta, b.delta, b.seed);
  });
  return outcome;
}

std::string format_results_csv(const std::vector<SweepResult>& results) {
  const bool with_surrogate =
      std::any_of(results.begin(), results.end(), [](const SweepResult& r) { return r.surrogate.has_value(); });
  std::string out = "beta,delta,seed,U_T,F_T,pof,bof,per_agent";
  if (with_surrogate) out += ",surrogate";
  out += '\n';
  for (const SweepResult& r : results) {
    out += format_number(r.beta) + ',' + format_number(r.delta) + ',' + std::to_string(r.seed) + ',' +
           format_number(r.utility) + ',' + format_number(r.fairness) + ',' + format_number(r.pof) + ',' +
           format_number(r.bof) + ',';
    for (std::size_t i = 0; i < r.per_agent.size(); ++i) out += (i ? ";" : "") + format_number(r.per_agent[i]);
    if (with_surrogate) out += ',' + (r.surrogate ? format_number(*r.surrogate) : std::string());
    out += '\n';
  }
  return out;
}

void write_sweep_outputs(const SweepConfig& config, const SweepOutcome& outcome) {
  write_file(config.output_path, format_results_csv(outcome.results));
  json sidecar = json::parse(to_json(config));
  sidecar["pof_convention"] = config.environment == EnvironmentKind::kIntervention
                                  ? "total_new / total_base (cost-style)"
                                  : "U_base / U_new (reward-style; > 1 means utility sacrificed)";
  write_file(config.output_path + ".config.json", sidecar.dump(2) + "\n");
  const std::string errors_path = config.output_path + ".errors.json";
  if (outcome.errors.empty()) {
    std::remove(errors_path.c_str());
    return;
  }
  json errs = json::array();
  for (const SweepError& e : outcome.errors) {
    errs.push_back({{"beta", e.beta}, {"delta", e.delta}, {"seed", e.seed}, {"message", e.message}});
  }
  write_file(errors_path, errs.dump(2) + "\n");
}

}  // namespace giff

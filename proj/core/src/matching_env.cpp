#include "giff/matching_env.hpp"

#include <cmath>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"
#include "giff/random.hpp"
#include "giff/theory.hpp"

namespace giff {
namespace {

AgentId agent_at(std::size_t i) { return AgentId(static_cast<AgentId::value_type>(i)); }

}  // namespace

void MatchingEnvConfig::validate() const {
  if (n_agents < 1) throw SpecError("matching environment needs at least one agent");
  if (horizon < 1) throw SpecError("matching environment horizon must be >= 1");
  if (max_requests < 0) throw SpecError("max_requests must be >= 0");
  if (!(line_length > 0.0)) throw SpecError("line_length must be positive");
  if (!(value_min >= 0.0 && value_max >= value_min)) throw SpecError("need 0 <= value_min <= value_max");
  if (!(travel_cost >= 0.0)) throw SpecError("travel_cost must be >= 0");
}

std::vector<double> matching_agent_positions(const MatchingEnvConfig& config) {
  std::vector<double> pos;
  for (int i = 0; i < config.n_agents; ++i) {
    pos.push_back(config.n_agents == 1 ? 0.0 : config.line_length * i / (config.n_agents - 1));
  }
  return pos;
}

std::vector<Request> matching_requests(const MatchingEnvConfig& config, std::uint64_t seed, int step) {
  Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(step));
  const auto count = rng.uniform_int(0, config.max_requests);
  std::vector<Request> out;
  for (std::int64_t r = 0; r < count; ++r) {
    const double u = rng.uniform();
    out.push_back({config.line_length * u * u, rng.uniform(config.value_min, config.value_max)});
  }
  return out;
}

double matching_q(const MatchingEnvConfig& config, double position, const Request& request) {
  return request.value - config.travel_cost * std::abs(position - request.position);
}

QTable matching_qtable(const MatchingEnvConfig& config, const std::vector<Request>& requests) {
  const auto positions = matching_agent_positions(config);
  QTable table(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    table.set(agent_at(i), ActionId(0), 0.0);
    for (std::size_t r = 0; r < requests.size(); ++r) {
      const double q = matching_q(config, positions[i], requests[r]);
      if (q > 0.0) table.set(agent_at(i), ActionId(static_cast<int>(r + 1)), q);
    }
  }
  return table;
}

EpisodeResult run_matching_episode(const MatchingEnvConfig& config, const FairnessSpec& spec,
                                   const GiffParams& params, std::uint64_t seed) {
  config.validate();
  spec.validate();
  params.validate();
  const auto n = static_cast<std::size_t>(config.n_agents);
  PayoffVector z(n, config.payoff_mode);
  EpisodeResult result;
  for (int t = 0; t < config.horizon; ++t) {
    const auto requests = matching_requests(config, seed, t);
    const QTable raw = matching_qtable(config, requests);
    const QTable scored = giff_q(spec, z, raw, params);

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
      for (const ActionValue& av : scored.actions(agent_at(i))) {
        ids.push_back(av.action);
        scores.push_back(av.q);
      }
      problem.action_sets.push_back(std::move(ids));
      problem.scores.push_back(std::move(scores));
    }
    const Allocation chosen = solve(problem);

    StepRecord rec;
    rec.step = t;
    rec.joint_action = chosen.assignment;
    for (std::size_t i = 0; i < n; ++i) rec.rewards.push_back(raw.q(agent_at(i), chosen.assignment[i]));
    PayoffVector next = update_payoffs(z, rec.rewards);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = next[i] - z[i];
    rec.surrogate = surrogate(spec, z, y);
    result.trajectory.push_back(std::move(rec));
    z = std::move(next);
  }
  result.final_payoffs = z;
  result.utility = z.total();
  result.fairness = evaluate(spec, z);
  return result;
}

}  // namespace giff

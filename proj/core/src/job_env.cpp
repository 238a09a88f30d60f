#include "giff/job_env.hpp"

#include <string>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"
#include "giff/theory.hpp"

namespace giff {
namespace {

AgentId agent_at(std::size_t i) { return AgentId(static_cast<AgentId::value_type>(i)); }

std::string describe(AgentId agent) { return "agent " + std::to_string(agent.value()); }

double discounted_hold_value(const JobEnvConfig& config, int remaining) {
  double total = 0.0;
  double discount = 1.0;
  for (int k = 0; k < remaining; ++k) {
    total += discount * config.hold_reward;
    discount *= config.gamma;
  }
  return total;
}

EpisodeResult finish(const FairnessSpec& spec, const JobEnvState& state, std::vector<StepRecord> trajectory) {
  EpisodeResult result;
  result.final_payoffs = state.payoffs;
  result.utility = state.payoffs.total();
  result.fairness = evaluate(spec, state.payoffs);
  result.trajectory = std::move(trajectory);
  return result;
}

StepRecord record(const FairnessSpec& spec, const JobEnvState& before, const JobStep& after,
                  const std::vector<JobAction>& joint) {
  StepRecord r;
  r.step = before.step;
  for (JobAction a : joint) r.joint_action.push_back(action_id(a));
  r.rewards = after.rewards;
  std::vector<double> y(before.payoffs.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = after.state.payoffs[i] - before.payoffs[i];
  r.surrogate = surrogate(spec, before.payoffs, y);
  return r;
}

}  // namespace

void JobEnvConfig::validate() const {
  if (n_agents < 1) throw SpecError("job environment needs at least one agent");
  if (horizon < 1) throw SpecError("job environment horizon must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw SpecError("gamma must lie in [0, 1)");
}

JobAction job_action(ActionId id) {
  switch (id.value()) {
    case 0: return JobAction::kHoldOrTake;
    case 1: return JobAction::kForfeit;
    case 2: return JobAction::kIdle;
    default: throw SpecError("unknown job action id " + std::to_string(id.value()));
  }
}

JobEnvState job_env_reset(const JobEnvConfig& config) {
  config.validate();
  JobEnvState s;
  s.payoffs = PayoffVector(static_cast<std::size_t>(config.n_agents), config.payoff_mode);
  return s;
}

JobStep job_env_step(const JobEnvConfig& config, const JobEnvState& state,
                     const std::vector<JobAction>& joint_action) {
  const auto n = static_cast<std::size_t>(config.n_agents);
  if (joint_action.size() != n) throw ProtocolError("joint action must name one action per agent");
  if (state.step >= config.horizon) throw ProtocolError("episode is already past its horizon");

  JobStep out;
  out.rewards.assign(n, 0.0);
  out.state.holder = state.holder;
  out.state.step = state.step + 1;

  std::optional<AgentId> taker;
  for (std::size_t i = 0; i < n; ++i) {
    const AgentId agent = agent_at(i);
    const JobAction a = joint_action[i];
    const bool holds = state.holder && *state.holder == agent;
    if (holds) {
      if (a == JobAction::kIdle) throw ProtocolError(describe(agent) + " holds the job but played idle");
      if (a == JobAction::kHoldOrTake) {
        out.rewards[i] = config.hold_reward;
      } else {
        out.state.holder.reset();
      }
      continue;
    }
    if (a == JobAction::kForfeit) throw ProtocolError(describe(agent) + " forfeited a job it does not hold");
    if (a != JobAction::kHoldOrTake) continue;
    if (state.holder) throw ProtocolError(describe(agent) + " took the job while it was held");
    if (taker) throw ProtocolError("two agents were assigned the job in one step");
    taker = agent;
  }
  if (taker) {
    out.state.holder = taker;
    out.rewards[taker->index()] = config.hold_reward;
  }
  out.state.payoffs = update_payoffs(state.payoffs, out.rewards);
  return out;
}

std::vector<ActionValue> job_env_q(const JobEnvConfig& config, const JobEnvState& state, AgentId agent) {
  const double keep = discounted_hold_value(config, config.horizon - state.step);
  const bool holds = state.holder && *state.holder == agent;
  if (holds) return {{action_id(JobAction::kHoldOrTake), keep}, {action_id(JobAction::kForfeit), 0.0}};
  return {{action_id(JobAction::kHoldOrTake), keep}, {action_id(JobAction::kIdle), 0.0}};
}

std::vector<JobAction> job_legal_actions(const JobEnvState& state, AgentId agent) {
  if (!state.holder) return {JobAction::kHoldOrTake, JobAction::kIdle};
  if (*state.holder == agent) return {JobAction::kHoldOrTake, JobAction::kForfeit};
  return {JobAction::kIdle};
}

std::vector<JobAction> job_arbitrate(const JobEnvConfig& config, const JobEnvState& state,
                                     const FairnessSpec& spec, const GiffParams& params) {
  const auto n = static_cast<std::size_t>(config.n_agents);
  QTable table(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const ActionValue& av : job_env_q(config, state, agent_at(i))) table.set(agent_at(i), av.action, av.q);
  }
  const QTable scored = giff_q(spec, state.payoffs, table, params);

  AllocationProblem problem;
  problem.n_agents = n;
  problem.capacities = {1.0};
  problem.consumption[action_id(JobAction::kHoldOrTake)] = {1.0};
  problem.consumption[action_id(JobAction::kForfeit)] = {0.0};
  problem.consumption[action_id(JobAction::kIdle)] = {0.0};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ActionId> ids;
    std::vector<double> scores;
    for (JobAction a : job_legal_actions(state, agent_at(i))) {
      ids.push_back(action_id(a));
      scores.push_back(scored.q(agent_at(i), action_id(a)));
    }
    problem.action_sets.push_back(std::move(ids));
    problem.scores.push_back(std::move(scores));
  }
  const Allocation chosen = solve_bnb(problem);
  std::vector<JobAction> joint;
  for (ActionId a : chosen.assignment) joint.push_back(job_action(a));
  return joint;
}

EpisodeResult run_job_episode(const JobEnvConfig& config, const FairnessSpec& spec, const GiffParams& params) {
  spec.validate();
  params.validate();
  JobEnvState state = job_env_reset(config);
  std::vector<StepRecord> trajectory;
  while (state.step < config.horizon) {
    const auto joint = job_arbitrate(config, state, spec, params);
    JobStep next = job_env_step(config, state, joint);
    trajectory.push_back(record(spec, state, next, joint));
    state = std::move(next.state);
  }
  return finish(spec, state, std::move(trajectory));
}

EpisodeResult run_job_scripted(const JobEnvConfig& config, const FairnessSpec& spec, JobScript script,
                               int turn_length) {
  if (turn_length < 2) throw SpecError("turn_length must be >= 2");
  JobEnvState state = job_env_reset(config);
  const auto n = static_cast<std::size_t>(config.n_agents);
  std::vector<StepRecord> trajectory;
  while (state.step < config.horizon) {
    std::vector<JobAction> joint(n, JobAction::kIdle);
    const int period = script == JobScript::kRoundRobin ? turn_length : 2;
    const auto turn_owner = static_cast<std::size_t>((state.step / period) % config.n_agents);
    const int phase = state.step % period;
    if (!state.holder) {
      joint[turn_owner] = JobAction::kHoldOrTake;
    } else {
      joint[state.holder->index()] = phase == period - 1 ? JobAction::kForfeit : JobAction::kHoldOrTake;
    }
    JobStep next = job_env_step(config, state, joint);
    trajectory.push_back(record(spec, state, next, joint));
    state = std::move(next.state);
  }
  return finish(spec, state, std::move(trajectory));
}

}  // namespace giff

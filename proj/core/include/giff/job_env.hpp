#pragma once

#include <optional>
#include <vector>

#include "giff/episode.hpp"
#include "giff/fairness.hpp"
#include "giff/giff.hpp"
#include "giff/ids.hpp"

namespace giff {

// Several agents compete for one job. The holder earns hold_reward per step
// and can only hand the job over by forfeiting, which earns nothing.
struct JobEnvConfig {
  int n_agents = 4;
  int horizon = 100;
  double hold_reward = 1.0;
  double gamma = 0.95;
  PayoffMode payoff_mode = PayoffMode::kCumulative;

  // Throws SpecError unless n_agents >= 1, horizon >= 1 and 0 <= gamma < 1.
  void validate() const;
};

// The holder plays kHoldOrTake to keep the job; a non-holder plays it to take
// a vacant job.
enum class JobAction { kHoldOrTake = 0, kForfeit = 1, kIdle = 2 };

inline ActionId action_id(JobAction a) { return ActionId(static_cast<ActionId::value_type>(a)); }
JobAction job_action(ActionId id);

struct JobEnvState {
  std::optional<AgentId> holder;
  int step = 0;
  PayoffVector payoffs;
};

struct JobStep {
  JobEnvState state;
  std::vector<double> rewards;
};

JobEnvState job_env_reset(const JobEnvConfig& config);

// Throws ProtocolError for an illegal joint action (two takers, a take while
// the job is held, an idle holder, a forfeit by a non-holder) or a step past
// the horizon.
JobStep job_env_step(const JobEnvConfig& config, const JobEnvState& state,
                     const std::vector<JobAction>& joint_action);

// Fairness-unaware analytic values: taking or keeping the job is worth the
// discounted reward over the remaining horizon, everything else 0. A
// non-holder values the take action even while the job is held; that entry
// feeds the counterfactual baseline but the arbiter cannot grant it.
std::vector<ActionValue> job_env_q(const JobEnvConfig& config, const JobEnvState& state, AgentId agent);

// Actions the arbiter may grant to `agent` in `state`, ascending.
std::vector<JobAction> job_legal_actions(const JobEnvState& state, AgentId agent);

// One step of GIFF arbitration: Q-table, GIFF modification, allocation.
std::vector<JobAction> job_arbitrate(const JobEnvConfig& config, const JobEnvState& state,
                                     const FairnessSpec& spec, const GiffParams& params);

EpisodeResult run_job_episode(const JobEnvConfig& config, const FairnessSpec& spec,
                              const GiffParams& params);

enum class JobScript {
  kRoundRobin,  // each agent holds for a turn, then forfeits to the next
  kAlternate,   // take one step, forfeit the next, rotating takers
};

// Diagnostic episodes driven by a fixed schedule instead of arbitration.
EpisodeResult run_job_scripted(const JobEnvConfig& config, const FairnessSpec& spec, JobScript script,
                               int turn_length = 25);

}  // namespace giff

#include "giff/giff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "giff/errors.hpp"

namespace giff {
namespace {

bool by_action(const ActionValue& lhs, ActionId rhs) { return lhs.action < rhs; }

struct Candidate {
  AgentId agent;
  double q;
  double own_gain;
};

// Per-action list of agents that can take it, ascending by agent id.
using CandidateIndex = std::unordered_map<ActionId, std::vector<Candidate>>;

void require_agent_range(const QTable& qtable, std::size_t z_size) {
  if (z_size < qtable.n_agents()) {
    throw ShapeError("payoff vector has " + std::to_string(z_size) + " entries but the Q-table has " +
                     std::to_string(qtable.n_agents()) + " agents");
  }
}

GainEvaluator make_evaluator(const FairnessSpec& spec, const PayoffVector& z) {
  return GainEvaluator(make_fairness_function(spec),
                       std::vector<double>(z.values().begin(), z.values().end()));
}

double baseline_gain(const GainEvaluator& eval, std::span<const Candidate> candidates, AgentId acting,
                     double acting_q, double acting_gain, const GiffParams& params) {
  double acc = params.baseline == BaselineMode::kMax ? -std::numeric_limits<double>::infinity() : 0.0;
  std::size_t count = 0;
  for (const Candidate& c : candidates) {
    if (c.agent == acting) continue;
    const double g = params.counterfactual == CounterfactualMode::kExact ? c.own_gain
                                                                          : eval.gain(c.agent, acting_q);
    if (params.baseline == BaselineMode::kMax) {
      acc = std::max(acc, g);
    } else {
      acc += g;
    }
    ++count;
  }
  if (count == 0) return acting_gain;
  return params.baseline == BaselineMode::kMax ? acc : acc / static_cast<double>(count);
}

std::vector<Candidate> candidates_for(const GainEvaluator& eval, ActionId action, const QTable& qtable,
                                      bool need_gain) {
  std::vector<Candidate> out;
  for (std::size_t j = 0; j < qtable.n_agents(); ++j) {
    const AgentId agent(static_cast<AgentId::value_type>(j));
    if (auto q = qtable.find(agent, action)) {
      out.push_back({agent, *q, need_gain ? eval.gain(agent, *q) : 0.0});
    }
  }
  return out;
}

}  // namespace

void QTable::set(AgentId agent, ActionId action, double q) {
  if (agent.value() < 0 || agent.index() >= rows_.size()) {
    throw SpecError("QTable: agent id " + std::to_string(agent.value()) + " out of range");
  }
  if (!std::isfinite(q)) throw SpecError("QTable: Q-values must be finite");
  auto& r = rows_[agent.index()];
  auto it = std::lower_bound(r.begin(), r.end(), action, by_action);
  if (it != r.end() && it->action == action) {
    it->q = q;
  } else {
    r.insert(it, ActionValue{action, q});
  }
}

std::size_t QTable::n_entries() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

const std::vector<ActionValue>& QTable::row(AgentId agent) const {
  if (agent.value() < 0 || agent.index() >= rows_.size()) {
    throw SpecError("QTable: agent id " + std::to_string(agent.value()) + " out of range");
  }
  return rows_[agent.index()];
}

std::span<const ActionValue> QTable::actions(AgentId agent) const { return row(agent); }

std::optional<double> QTable::find(AgentId agent, ActionId action) const {
  const auto& r = row(agent);
  auto it = std::lower_bound(r.begin(), r.end(), action, by_action);
  if (it == r.end() || it->action != action) return std::nullopt;
  return it->q;
}

bool QTable::has_action(AgentId agent, ActionId action) const { return find(agent, action).has_value(); }

double QTable::q(AgentId agent, ActionId action) const {
  if (auto v = find(agent, action)) return *v;
  throw SpecError("QTable: agent " + std::to_string(agent.value()) + " has no action " +
                  std::to_string(action.value()));
}

double QTable::min_q(AgentId agent) const {
  const auto& r = row(agent);
  if (r.empty()) throw SpecError("QTable: agent " + std::to_string(agent.value()) + " has no actions");
  double m = r.front().q;
  for (const auto& av : r) m = std::min(m, av.q);
  return m;
}

void QTable::validate() const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].empty()) throw SpecError("QTable: agent " + std::to_string(i) + " has no actions");
  }
}

bool QTable::same_shape(const QTable& other) const {
  if (rows_.size() != other.rows_.size()) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != other.rows_[i].size()) return false;
    for (std::size_t k = 0; k < rows_[i].size(); ++k) {
      if (rows_[i][k].action != other.rows_[i][k].action) return false;
    }
  }
  return true;
}

void GiffParams::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw SpecError("beta must lie in [0, 1]");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw SpecError("delta must be >= 0");
}

GainEvaluator::GainEvaluator(FairnessFunction f, std::vector<double> z, Credit credit)
    : f_(std::move(f)), z_(std::move(z)), credit_(std::move(credit)) {
  if (!f_) throw SpecError("GainEvaluator needs a fairness function");
  if (!credit_) {
    credit_ = [](std::vector<double>& v, AgentId agent, double q) {
      if (agent.value() < 0 || agent.index() >= v.size()) {
        throw ShapeError("agent " + std::to_string(agent.value()) + " outside the payoff vector");
      }
      v[agent.index()] += q;
    };
  }
  base_ = f_(z_);
}

double GainEvaluator::gain(AgentId agent, double q) const {
  std::vector<double> next = z_;
  credit_(next, agent, q);
  return f_(next) - base_;
}

double fairness_gain(const FairnessSpec& spec, const PayoffVector& z, AgentId agent, double q) {
  if (agent.value() < 0 || agent.index() >= z.size()) {
    throw ShapeError("fairness_gain: agent " + std::to_string(agent.value()) + " out of range");
  }
  return make_evaluator(spec, z).gain(agent, q);
}

double counterfactual_avg(const GainEvaluator& eval, ActionId action, AgentId acting_agent,
                          const QTable& qtable, const GiffParams& params) {
  const double acting_q = qtable.q(acting_agent, action);
  const bool exact = params.counterfactual == CounterfactualMode::kExact;
  const auto candidates = candidates_for(eval, action, qtable, exact);
  const bool contested = std::any_of(candidates.begin(), candidates.end(),
                                     [&](const Candidate& c) { return c.agent != acting_agent; });
  const double own = contested ? 0.0 : eval.gain(acting_agent, acting_q);
  return baseline_gain(eval, candidates, acting_agent, acting_q, own, params);
}

double counterfactual_avg(const FairnessSpec& spec, const PayoffVector& z, ActionId action,
                          AgentId acting_agent, const QTable& qtable, const GiffParams& params) {
  require_agent_range(qtable, z.size());
  return counterfactual_avg(make_evaluator(spec, z), action, acting_agent, qtable, params);
}

double advantage_correction(const GainEvaluator& eval, AgentId acting_agent, ActionId action,
                            const QTable& qtable, const GiffParams& params) {
  const double q = qtable.q(acting_agent, action);
  const double dq = q - qtable.min_q(acting_agent);
  if (dq == 0.0) return 0.0;
  const double own = eval.gain(acting_agent, q);
  return (own - counterfactual_avg(eval, action, acting_agent, qtable, params)) * dq;
}

double advantage_correction(const FairnessSpec& spec, const PayoffVector& z, AgentId acting_agent,
                            ActionId action, const QTable& qtable, const GiffParams& params) {
  require_agent_range(qtable, z.size());
  return advantage_correction(make_evaluator(spec, z), acting_agent, action, qtable, params);
}

QTable giff_q(const GainEvaluator& eval, const QTable& qtable, const GiffParams& params) {
  params.validate();
  qtable.validate();
  if (params.beta == 0.0) return qtable;

  // Own gains dF(j, Q(j,a)) are needed for every entry, and in exact mode they
  // are also the counterfactual gains, so compute each once.
  CandidateIndex index;
  std::vector<std::vector<double>> own(qtable.n_agents());
  for (std::size_t i = 0; i < qtable.n_agents(); ++i) {
    const AgentId agent(static_cast<AgentId::value_type>(i));
    for (const ActionValue& av : qtable.actions(agent)) {
      const double g = eval.gain(agent, av.q);
      own[i].push_back(g);
      if (params.delta != 0.0) index[av.action].push_back({agent, av.q, g});
    }
  }

  QTable out(qtable.n_agents());
  for (std::size_t i = 0; i < qtable.n_agents(); ++i) {
    const AgentId agent(static_cast<AgentId::value_type>(i));
    const auto row = qtable.actions(agent);
    const double min_q = params.delta != 0.0 ? qtable.min_q(agent) : 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const ActionValue& av = row[k];
      double fair = own[i][k];
      if (params.delta != 0.0) {
        const double dq = av.q - min_q;
        if (dq != 0.0) {
          const double avg = baseline_gain(eval, index.at(av.action), agent, av.q, own[i][k], params);
          fair += params.delta * (own[i][k] - avg) * dq;
        }
      }
      out.set(agent, av.action, (1.0 - params.beta) * av.q + params.beta * fair);
    }
  }
  return out;
}

QTable giff_q(const FairnessSpec& spec, const PayoffVector& z, const QTable& qtable,
              const GiffParams& params) {
  require_agent_range(qtable, z.size());
  return giff_q(make_evaluator(spec, z), qtable, params);
}

}  // namespace giff

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "giff/fairness.hpp"
#include "giff/ids.hpp"

namespace giff {

struct ActionValue {
  ActionId action;
  double q = 0.0;

  friend bool operator==(const ActionValue&, const ActionValue&) = default;
};

// Q-value bids keyed by (agent, action). Each agent's row is kept sorted by
// action id, so iteration order is deterministic.
class QTable {
 public:
  QTable() = default;
  explicit QTable(std::size_t n_agents) : rows_(n_agents) {}

  // Inserts or overwrites. Throws SpecError on a non-finite value or an
  // agent id outside [0, n_agents).
  void set(AgentId agent, ActionId action, double q);

  std::size_t n_agents() const { return rows_.size(); }
  std::size_t n_entries() const;
  std::span<const ActionValue> actions(AgentId agent) const;
  bool has_action(AgentId agent, ActionId action) const;
  std::optional<double> find(AgentId agent, ActionId action) const;
  // Throws SpecError when the entry is missing.
  double q(AgentId agent, ActionId action) const;
  double min_q(AgentId agent) const;

  // Throws SpecError if some agent has no actions.
  void validate() const;
  bool same_shape(const QTable& other) const;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  const std::vector<ActionValue>& row(AgentId agent) const;

  std::vector<std::vector<ActionValue>> rows_;
};

enum class CounterfactualMode { kExact, kSelfApprox };
enum class BaselineMode { kMean, kMax };

struct GiffParams {
  double beta = 0.0;
  double delta = 0.0;
  CounterfactualMode counterfactual = CounterfactualMode::kExact;
  BaselineMode baseline = BaselineMode::kMean;

  // Throws SpecError unless 0 <= beta <= 1 and delta >= 0.
  void validate() const;
};

// Evaluates fairness gains F(credit(Z, i, q)) - F(Z) against a fixed
// baseline Z. The default credit adds q to z_i. Domains where agents map
// onto groups (or where crediting is not additive) supply their own.
class GainEvaluator {
 public:
  using Credit = std::function<void(std::vector<double>& z, AgentId agent, double q)>;

  GainEvaluator(FairnessFunction f, std::vector<double> z, Credit credit = {});

  double gain(AgentId agent, double q) const;
  double base_value() const { return base_; }
  std::span<const double> payoffs() const { return z_; }

 private:
  FairnessFunction f_;
  std::vector<double> z_;
  Credit credit_;
  double base_;
};

double fairness_gain(const FairnessSpec& spec, const PayoffVector& z, AgentId agent, double q);

// Mean (or max) of the gains competitors j != acting_agent would realise from
// `action`. Falls back to the acting agent's own gain when nobody else can
// take the action.
double counterfactual_avg(const GainEvaluator& eval, ActionId action, AgentId acting_agent,
                          const QTable& qtable, const GiffParams& params);
double counterfactual_avg(const FairnessSpec& spec, const PayoffVector& z, ActionId action,
                          AgentId acting_agent, const QTable& qtable, const GiffParams& params);

// (dF(a) - dF_avg(a)) * (Q(i,a) - min_a' Q(i,a')).
double advantage_correction(const GainEvaluator& eval, AgentId acting_agent, ActionId action,
                            const QTable& qtable, const GiffParams& params);
double advantage_correction(const FairnessSpec& spec, const PayoffVector& z, AgentId acting_agent,
                            ActionId action, const QTable& qtable, const GiffParams& params);

// (1 - beta) Q + beta (dF + delta dQ_adv) for every entry of `qtable`.
QTable giff_q(const GainEvaluator& eval, const QTable& qtable, const GiffParams& params);
// Throws ShapeError when z has fewer entries than qtable has agents.
QTable giff_q(const FairnessSpec& spec, const PayoffVector& z, const QTable& qtable,
              const GiffParams& params);

}  // namespace giff

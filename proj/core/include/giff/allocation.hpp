#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "giff/ids.hpp"

namespace giff {

// One action per agent, sum of consumption <= capacity, maximise total score.
//
// `action_sets[i]` lists agent i's action ids in strictly ascending order and
// `scores[i][k]` is the score of `action_sets[i][k]`. Consumption is keyed by
// action id, so two agents naming the same action compete for the same
// resources.
struct AllocationProblem {
  std::size_t n_agents = 0;
  std::vector<std::vector<ActionId>> action_sets;
  std::vector<std::vector<double>> scores;
  std::map<ActionId, std::vector<double>> consumption;
  std::vector<double> capacities;

  std::size_t n_resources() const { return capacities.size(); }
  const std::vector<double>& consumption_of(ActionId action) const;
  double score(std::size_t agent, ActionId action) const;

  // Throws SpecError when a type invariant is broken.
  void validate() const;
};

struct Allocation {
  std::vector<ActionId> assignment;
  double objective = 0.0;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

inline constexpr double kCapacityTolerance = 1e-9;
inline constexpr double kObjectiveTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultBruteForceCap = 10'000'000;

// Every solver returns the lexicographically first assignment (agent 0's
// action id most significant) whose objective is within kObjectiveTolerance
// of the optimum, so results agree exactly across solvers.
Allocation solve_brute_force(const AllocationProblem& problem,
                             std::uint64_t cap = kDefaultBruteForceCap);
Allocation solve_bnb(const AllocationProblem& problem);
Allocation solve_bipartite(const AllocationProblem& problem);
bool detect_bipartite(const AllocationProblem& problem);

enum class SolverKind { kAuto, kBruteForce, kBnb, kBipartite };
SolverKind parse_solver_kind(std::string_view name);
std::string_view to_string(SolverKind kind);
// kAuto picks the bipartite solver when the structure allows, else BnB.
Allocation solve(const AllocationProblem& problem, SolverKind kind = SolverKind::kAuto);

// Scores summed in agent order. Throws SpecError for an action outside the
// agent's set.
double allocation_objective(const AllocationProblem& problem, const std::vector<ActionId>& assignment);
bool is_feasible(const AllocationProblem& problem, const std::vector<ActionId>& assignment);

AllocationProblem parse_allocation_problem(std::string_view json_text);
AllocationProblem load_allocation_problem(const std::string& path);
std::string to_json(const AllocationProblem& problem);
std::string to_json(const Allocation& allocation);

}  // namespace giff

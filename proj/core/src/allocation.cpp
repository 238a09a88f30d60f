#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"

namespace giff {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Option {
  ActionId action;
  double score;
  const std::vector<double>* use;
};

// Flattened view of a validated problem used by the search solvers.
struct Flat {
  std::vector<std::vector<Option>> options;  // ascending action id
  std::vector<double> limit;                 // capacity + tolerance
  std::size_t k = 0;
};

Flat flatten(const AllocationProblem& p) {
  p.validate();
  Flat f;
  f.k = p.n_resources();
  f.limit.resize(f.k);
  for (std::size_t r = 0; r < f.k; ++r) f.limit[r] = p.capacities[r] + kCapacityTolerance;
  f.options.resize(p.n_agents);
  for (std::size_t i = 0; i < p.n_agents; ++i) {
    for (std::size_t a = 0; a < p.action_sets[i].size(); ++a) {
      const ActionId id = p.action_sets[i][a];
      f.options[i].push_back({id, p.scores[i][a], &p.consumption.at(id)});
    }
  }
  return f;
}

bool fits(const std::vector<double>& used, const std::vector<double>& use, const std::vector<double>& limit) {
  for (std::size_t r = 0; r < used.size(); ++r) {
    if (used[r] + use[r] > limit[r]) return false;
  }
  return true;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const Flat& f) : f_(f), n_(f.options.size()) {
    suffix_max_.assign(n_ + 1, 0.0);
    suffix_min_use_.assign(n_ + 1, std::vector<double>(f.k, 0.0));
    for (std::size_t i = n_; i-- > 0;) {
      double best = -kInf;
      std::vector<double> min_use(f.k, kInf);
      for (const Option& o : f.options[i]) {
        best = std::max(best, o.score);
        for (std::size_t r = 0; r < f.k; ++r) min_use[r] = std::min(min_use[r], (*o.use)[r]);
      }
      suffix_max_[i] = suffix_max_[i + 1] + best;
      for (std::size_t r = 0; r < f.k; ++r) suffix_min_use_[i][r] = suffix_min_use_[i + 1][r] + min_use[r];
    }
    // Phase one visits high scores first to tighten the incumbent early.
    by_score_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      by_score_[i].resize(f.options[i].size());
      std::iota(by_score_[i].begin(), by_score_[i].end(), 0);
      std::stable_sort(by_score_[i].begin(), by_score_[i].end(), [&](std::size_t a, std::size_t b) {
        return f.options[i][a].score > f.options[i][b].score;
      });
    }
    used_.assign(n_ + 1, std::vector<double>(f.k, 0.0));
    choice_.assign(n_, 0);
  }

  Allocation run() {
    best_ = -kInf;
    find_optimum(0, 0.0);
    if (best_ == -kInf) throw Infeasible("no joint action satisfies the capacities");
    threshold_ = best_ - kObjectiveTolerance;
    if (!find_canonical(0, 0.0)) throw Infeasible("branch and bound lost the optimum");
    Allocation out;
    out.objective = canonical_score_;
    for (std::size_t i = 0; i < n_; ++i) out.assignment.push_back(f_.options[i][choice_[i]].action);
    return out;
  }

 private:
  bool completable(std::size_t depth) const {
    for (std::size_t r = 0; r < f_.k; ++r) {
      if (used_[depth][r] + suffix_min_use_[depth][r] > f_.limit[r]) return false;
    }
    return true;
  }

  void find_optimum(std::size_t depth, double partial) {
    if (depth == n_) {
      best_ = std::max(best_, partial);
      return;
    }
    if (partial + suffix_max_[depth] < best_ - 1e-12 * std::max(1.0, std::abs(best_))) return;
    if (!completable(depth)) return;
    for (std::size_t a : by_score_[depth]) {
      const Option& o = f_.options[depth][a];
      if (!fits(used_[depth], *o.use, f_.limit)) continue;
      for (std::size_t r = 0; r < f_.k; ++r) used_[depth + 1][r] = used_[depth][r] + (*o.use)[r];
      find_optimum(depth + 1, partial + o.score);
    }
  }

  bool find_canonical(std::size_t depth, double partial) {
    if (depth == n_) {
      if (partial < threshold_) return false;
      canonical_score_ = partial;
      return true;
    }
    if (partial + suffix_max_[depth] < threshold_ - kObjectiveTolerance) return false;
    if (!completable(depth)) return false;
    for (std::size_t a = 0; a < f_.options[depth].size(); ++a) {
      const Option& o = f_.options[depth][a];
      if (!fits(used_[depth], *o.use, f_.limit)) continue;
      for (std::size_t r = 0; r < f_.k; ++r) used_[depth + 1][r] = used_[depth][r] + (*o.use)[r];
      choice_[depth] = a;
      if (find_canonical(depth + 1, partial + o.score)) return true;
    }
    return false;
  }

  const Flat& f_;
  std::size_t n_;
  std::vector<double> suffix_max_;
  std::vector<std::vector<double>> suffix_min_use_;
  std::vector<std::vector<std::size_t>> by_score_;
  std::vector<std::vector<double>> used_;
  std::vector<std::size_t> choice_;
  double best_ = -kInf;
  double threshold_ = 0.0;
  double canonical_score_ = 0.0;
};

}  // namespace

const std::vector<double>& AllocationProblem::consumption_of(ActionId action) const {
  auto it = consumption.find(action);
  if (it == consumption.end()) {
    throw SpecError("no consumption vector for action " + std::to_string(action.value()));
  }
  return it->second;
}

double AllocationProblem::score(std::size_t agent, ActionId action) const {
  if (agent >= action_sets.size()) throw SpecError("agent index out of range");
  const auto& set = action_sets[agent];
  auto it = std::lower_bound(set.begin(), set.end(), action);
  if (it == set.end() || *it != action) {
    throw SpecError("action " + std::to_string(action.value()) + " not available to agent " +
                    std::to_string(agent));
  }
  return scores[agent][static_cast<std::size_t>(it - set.begin())];
}

void AllocationProblem::validate() const {
  if (n_agents == 0) throw SpecError("an allocation problem needs at least one agent");
  if (action_sets.size() != n_agents || scores.size() != n_agents) {
    throw SpecError("action_sets and scores must have one row per agent");
  }
  for (double c : capacities) {
    if (!std::isfinite(c) || c < 0.0) throw SpecError("capacities must be finite and >= 0");
  }
  for (const auto& [action, use] : consumption) {
    if (use.size() != capacities.size()) {
      throw SpecError("consumption of action " + std::to_string(action.value()) + " has " +
                      std::to_string(use.size()) + " entries, expected " +
                      std::to_string(capacities.size()));
    }
    for (double c : use) {
      if (!std::isfinite(c) || c < 0.0) throw SpecError("consumption entries must be finite and >= 0");
    }
  }
  for (std::size_t i = 0; i < n_agents; ++i) {
    const auto& set = action_sets[i];
    if (set.empty()) throw SpecError("agent " + std::to_string(i) + " has an empty action set");
    if (scores[i].size() != set.size()) {
      throw SpecError("agent " + std::to_string(i) + " has a score count different from its action count");
    }
    for (std::size_t a = 0; a < set.size(); ++a) {
      if (a > 0 && !(set[a - 1] < set[a])) {
        throw SpecError("agent " + std::to_string(i) + " action ids must be strictly ascending");
      }
      if (!consumption.contains(set[a])) {
        throw SpecError("no consumption vector for action " + std::to_string(set[a].value()));
      }
      if (!std::isfinite(scores[i][a])) throw SpecError("scores must be finite");
    }
  }
}

double allocation_objective(const AllocationProblem& problem, const std::vector<ActionId>& assignment) {
  if (assignment.size() != problem.n_agents) throw SpecError("assignment length differs from n_agents");
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) total += problem.score(i, assignment[i]);
  return total;
}

bool is_feasible(const AllocationProblem& problem, const std::vector<ActionId>& assignment) {
  if (assignment.size() != problem.n_agents) return false;
  std::vector<double> used(problem.n_resources(), 0.0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto& set = problem.action_sets[i];
    if (!std::binary_search(set.begin(), set.end(), assignment[i])) return false;
    const auto& use = problem.consumption_of(assignment[i]);
    for (std::size_t r = 0; r < used.size(); ++r) used[r] += use[r];
  }
  for (std::size_t r = 0; r < used.size(); ++r) {
    if (used[r] > problem.capacities[r] + kCapacityTolerance) return false;
  }
  return true;
}

Allocation solve_brute_force(const AllocationProblem& problem, std::uint64_t cap) {
  const Flat f = flatten(problem);
  const std::size_t n = f.options.size();
  std::uint64_t space = 1;
  for (const auto& o : f.options) {
    if (space > cap / o.size()) {
      throw CapExceeded("joint action space exceeds the brute-force cap of " + std::to_string(cap));
    }
    space *= o.size();
  }

  std::vector<std::size_t> idx(n, 0);
  std::vector<double> used(f.k);
  auto visit = [&](auto&& on_feasible) {
    std::fill(idx.begin(), idx.end(), 0);
    for (std::uint64_t step = 0; step < space; ++step) {
      std::fill(used.begin(), used.end(), 0.0);
      double total = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        const Option& o = f.options[i][idx[i]];
        for (std::size_t r = 0; r < f.k; ++r) {
          used[r] += (*o.use)[r];
          if (used[r] > f.limit[r]) ok = false;
        }
        total += o.score;
      }
      if (ok && on_feasible(total)) return;
      // Odometer with the last agent varying fastest gives lexicographic order.
      for (std::size_t i = n; i-- > 0;) {
        if (++idx[i] < f.options[i].size()) break;
        idx[i] = 0;
      }
    }
  };

  double best = -kInf;
  visit([&](double total) {
    best = std::max(best, total);
    return false;
  });
  if (best == -kInf) throw Infeasible("no joint action satisfies the capacities");

  Allocation out;
  visit([&](double total) {
    if (total < best - kObjectiveTolerance) return false;
    out.objective = total;
    for (std::size_t i = 0; i < n; ++i) out.assignment.push_back(f.options[i][idx[i]].action);
    return true;
  });
  return out;
}

Allocation solve_bnb(const AllocationProblem& problem) {
  const Flat f = flatten(problem);
  return BranchAndBound(f).run();
}

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "auto") return SolverKind::kAuto;
  if (name == "brute" || name == "brute_force") return SolverKind::kBruteForce;
  if (name == "bnb") return SolverKind::kBnb;
  if (name == "bipartite" || name == "hungarian") return SolverKind::kBipartite;
  throw SpecError("unknown solver '" + std::string(name) + "'");
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kAuto: return "auto";
    case SolverKind::kBruteForce: return "brute";
    case SolverKind::kBnb: return "bnb";
    case SolverKind::kBipartite: return "bipartite";
  }
  return "unknown";
}

Allocation solve(const AllocationProblem& problem, SolverKind kind) {
  switch (kind) {
    case SolverKind::kBruteForce: return solve_brute_force(problem);
    case SolverKind::kBnb: return solve_bnb(problem);
    case SolverKind::kBipartite: return solve_bipartite(problem);
    case SolverKind::kAuto: break;
  }
  return detect_bipartite(problem) ? solve_bipartite(problem) : solve_bnb(problem);
}

}  // namespace giff

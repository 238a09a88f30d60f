#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"

namespace giff {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_noop(const std::vector<double>& use) {
  return std::all_of(use.begin(), use.end(), [](double c) { return c == 0.0; });
}

// Index of the single resource a unit-demand action uses, if it is one.
std::optional<std::size_t> unit_resource(const std::vector<double>& use) {
  std::optional<std::size_t> found;
  for (std::size_t r = 0; r < use.size(); ++r) {
    if (use[r] == 0.0) continue;
    if (use[r] != 1.0 || found) return std::nullopt;
    found = r;
  }
  return found;
}

// Square min-cost assignment with row and column potentials (the classic
// O(n^3) shortest augmenting path formulation). Entries may be +inf.
struct Assignment {
  std::vector<double> u, v;
  std::vector<std::size_t> col_of_row, row_of_col;
};

Assignment hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (delta == kInf) throw Infeasible("some agent cannot be matched to any resource or noop");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.u.assign(u.begin() + 1, u.end());
  a.v.assign(v.begin() + 1, v.end());
  a.row_of_col.resize(n);
  a.col_of_row.resize(n);
  for (std::size_t j = 1; j <= n; ++j) {
    a.row_of_col[j - 1] = p[j] - 1;
    a.col_of_row[p[j] - 1] = j - 1;
  }
  return a;
}

}  // namespace

bool detect_bipartite(const AllocationProblem& problem) {
  try {
    problem.validate();
  } catch (const SpecError&) {
    return false;
  }
  for (double c : problem.capacities) {
    if (c != std::floor(c)) return false;
  }
  for (std::size_t i = 0; i < problem.n_agents; ++i) {
    std::vector<char> seen(problem.n_resources(), 0);
    for (ActionId a : problem.action_sets[i]) {
      const auto& use = problem.consumption_of(a);
      if (is_noop(use)) continue;
      const auto r = unit_resource(use);
      if (!r || seen[*r]) return false;
      seen[*r] = 1;
    }
  }
  return true;
}

Allocation solve_bipartite(const AllocationProblem& problem) {
  if (!detect_bipartite(problem)) {
    throw NotBipartite("problem is not a unit-demand matching with integral capacities");
  }
  const std::size_t n = problem.n_agents;

  // Columns: min(capacity, n) copies per resource, then one private noop
  // column per agent that owns a zero-consumption action.
  std::vector<std::size_t> col_resource;
  std::vector<std::size_t> noop_owner;
  for (std::size_t r = 0; r < problem.n_resources(); ++r) {
    const auto copies = static_cast<std::size_t>(std::min<double>(problem.capacities[r], static_cast<double>(n)));
    col_resource.insert(col_resource.end(), copies, r);
  }
  const std::size_t n_resource_cols = col_resource.size();
  std::vector<std::optional<std::size_t>> noop_col(n);
  std::vector<double> best_noop(n, -kInf);
  std::vector<std::vector<std::optional<std::size_t>>> action_of_resource(
      n, std::vector<std::optional<std::size_t>>(problem.n_resources()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& set = problem.action_sets[i];
    for (std::size_t a = 0; a < set.size(); ++a) {
      const auto& use = problem.consumption_of(set[a]);
      if (is_noop(use)) {
        best_noop[i] = std::max(best_noop[i], problem.scores[i][a]);
      } else {
        action_of_resource[i][*unit_resource(use)] = a;
      }
    }
    if (best_noop[i] > -kInf) {
      noop_col[i] = n_resource_cols + noop_owner.size();
      noop_owner.push_back(i);
    }
  }
  const std::size_t size = n_resource_cols + noop_owner.size();
  if (size < n) throw Infeasible("agents outnumber resource units and noop actions");

  // Rows beyond n are dummies that absorb unused columns at zero cost.
  std::vector<std::vector<double>> cost(size, std::vector<double>(size, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      if (j < n_resource_cols) {
        const auto a = action_of_resource[i][col_resource[j]];
        cost[i][j] = a ? -problem.scores[i][*a] : kInf;
      } else {
        cost[i][j] = noop_owner[j - n_resource_cols] == i ? -best_noop[i] : kInf;
      }
    }
  }
  Assignment m = hungarian(cost);

  double scale = 1.0;
  for (const auto& row : problem.scores) {
    for (double s : row) scale = std::max(scale, std::abs(s));
  }
  const double tight_tol =
      kObjectiveTolerance / (4.0 * static_cast<double>(size)) + 1e-13 * scale * static_cast<double>(size);
  auto tight = [&](std::size_t row, std::size_t col) {
    const double c = cost[row][col];
    return c != kInf && c - m.u[row] - m.v[col] <= tight_tol;
  };

  // Walk agents in order and move each onto its lowest-id action that some
  // optimal matching can still give it. Every optimal matching lives on the
  // tight edges of the optimal duals, so moving agent i to column c is
  // possible iff an alternating path over tight edges leads from the current
  // holder of c back to i's column without touching already fixed agents.
  auto reroute = [&](std::size_t agent, const std::vector<std::size_t>& targets) -> bool {
    const std::size_t home = m.col_of_row[agent];
    std::vector<char> seen_row(size, 0);
    // via_row[r] is the row that takes over r's column; `agent` marks the
    // holders of the target columns.
    std::vector<std::size_t> via_row(size, size);
    std::deque<std::size_t> queue;
    seen_row[agent] = 1;
    for (std::size_t c : targets) {
      if (!tight(agent, c)) continue;
      const std::size_t holder = m.row_of_col[c];
      if (holder < agent || seen_row[holder]) continue;
      seen_row[holder] = 1;
      via_row[holder] = agent;
      queue.push_back(holder);
    }
    while (!queue.empty()) {
      const std::size_t r = queue.front();
      queue.pop_front();
      for (std::size_t c = 0; c < size; ++c) {
        if (c == m.col_of_row[r] || !tight(r, c)) continue;
        if (c == home) {
          std::size_t row = r, col = c;
          while (true) {
            const std::size_t prev_col = m.col_of_row[row];
            m.col_of_row[row] = col;
            m.row_of_col[col] = row;
            if (via_row[row] == agent) {
              m.col_of_row[agent] = prev_col;
              m.row_of_col[prev_col] = agent;
              return true;
            }
            col = prev_col;
            row = via_row[row];
          }
        }
        const std::size_t owner = m.row_of_col[c];
        if (owner < agent || seen_row[owner]) continue;
        seen_row[owner] = 1;
        via_row[owner] = r;
        queue.push_back(owner);
      }
    }
    return false;
  };

  std::vector<ActionId> assignment(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& set = problem.action_sets[i];
    bool fixed = false;
    for (std::size_t a = 0; a < set.size() && !fixed; ++a) {
      const auto& use = problem.consumption_of(set[a]);
      std::vector<std::size_t> targets;
      if (is_noop(use)) {
        if (problem.scores[i][a] < best_noop[i] - tight_tol) continue;
        targets.push_back(*noop_col[i]);
      } else {
        const std::size_t r = *unit_resource(use);
        for (std::size_t j = 0; j < n_resource_cols; ++j) {
          if (col_resource[j] == r) targets.push_back(j);
        }
      }
      if (std::find(targets.begin(), targets.end(), m.col_of_row[i]) != targets.end()) {
        fixed = true;
      } else {
        fixed = reroute(i, targets);
      }
      if (fixed) assignment[i] = set[a];
    }
    if (!fixed) throw Infeasible("bipartite canonicalisation found no optimal action");
  }

  Allocation out;
  out.assignment = std::move(assignment);
  out.objective = allocation_objective(problem, out.assignment);
  return out;
}

}  // namespace giff

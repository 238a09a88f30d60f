#include <benchmark/benchmark.h>

#include <random>

#include "giff/allocation.hpp"
#include "giff/fairness.hpp"
#include "giff/giff.hpp"
#include "giff/job_env.hpp"

using namespace giff;

namespace {

QTable dense_table(std::size_t n, std::size_t m, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> q(0.0, 10.0);
  QTable t(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < m; ++a) t.set(AgentId(static_cast<int>(i)), ActionId(static_cast<int>(a)), q(gen));
  }
  return t;
}

std::vector<double> payoffs(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> z(1.0, 20.0);
  std::vector<double> out(n);
  for (auto& v : out) v = z(gen);
  return out;
}

void BM_Evaluate(benchmark::State& state, FairnessSpec spec) {
  std::mt19937_64 gen(1);
  const auto z = payoffs(static_cast<std::size_t>(state.range(0)), gen);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(spec, z));
  state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_Evaluate, alpha, FairnessSpec::alpha_fair(1.0))->RangeMultiplier(4)->Range(4, 4096);
BENCHMARK_CAPTURE(BM_Evaluate, variance, FairnessSpec::neg_variance())->RangeMultiplier(4)->Range(4, 4096);
BENCHMARK_CAPTURE(BM_Evaluate, gini, FairnessSpec::neg_gini())->RangeMultiplier(4)->Range(4, 4096);

void BM_GiffQ(benchmark::State& state, CounterfactualMode mode) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 gen(2);
  const QTable table = dense_table(n, m, gen);
  const PayoffVector z(payoffs(n, gen), PayoffMode::kCumulative);
  GiffParams params{0.7, 0.3};
  params.counterfactual = mode;
  const auto spec = FairnessSpec::neg_variance();
  for (auto _ : state) benchmark::DoNotOptimize(giff_q(spec, z, table, params));
}
BENCHMARK_CAPTURE(BM_GiffQ, exact, CounterfactualMode::kExact)
    ->ArgsProduct({{4, 16, 64}, {2, 8}});
BENCHMARK_CAPTURE(BM_GiffQ, self_approx, CounterfactualMode::kSelfApprox)
    ->ArgsProduct({{4, 16, 64}, {2, 8}});

AllocationProblem assignment_problem(std::size_t n, std::size_t k, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> s(0.0, 5.0);
  AllocationProblem p;
  p.n_agents = n;
  p.capacities.assign(k, 1.0);
  p.consumption[ActionId(0)] = std::vector<double>(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<double> use(k, 0.0);
    use[r] = 1.0;
    p.consumption[ActionId(static_cast<int>(r + 1))] = use;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ActionId> set;
    std::vector<double> row;
    for (std::size_t a = 0; a <= k; ++a) {
      set.emplace_back(static_cast<int>(a));
      row.push_back(a == 0 ? 0.0 : s(gen));
    }
    p.action_sets.push_back(set);
    p.scores.push_back(row);
  }
  return p;
}

void BM_Solver(benchmark::State& state, SolverKind kind) {
  std::mt19937_64 gen(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const AllocationProblem p = assignment_problem(n, 3, gen);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, kind));
}
BENCHMARK_CAPTURE(BM_Solver, brute_force, SolverKind::kBruteForce)->DenseRange(2, 8, 2);
BENCHMARK_CAPTURE(BM_Solver, bnb, SolverKind::kBnb)->DenseRange(2, 8, 2);
BENCHMARK_CAPTURE(BM_Solver, bipartite, SolverKind::kBipartite)->DenseRange(2, 8, 2)->Arg(64)->Arg(256);

void BM_JobEpisode(benchmark::State& state) {
  const JobEnvConfig c;
  const auto spec = FairnessSpec::ggf(linear_ggf_weights(4));
  for (auto _ : state) benchmark::DoNotOptimize(run_job_episode(c, spec, GiffParams{0.8, 0.3}));
}
BENCHMARK(BM_JobEpisode);

}  // namespace
BENCHMARK_MAIN();

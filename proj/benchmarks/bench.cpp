#include <benchmark/benchmark.h>

#include "plearn/bnp.hpp"
#include "plearn/obsfn.hpp"
#include "plearn/planner.hpp"
#include "plearn/simgen.hpp"

using namespace plearn;

namespace {

Matrix random_loglik(int t, int l) {
  Rng rng(1);
  Matrix m(t, l);
  for (int i = 0; i < t; ++i)
    for (int k = 0; k < l; ++k) m(i, k) = -5.0 * uniform01(rng);
  return m;
}

Matrix sticky(int l) {
  Matrix p = Matrix::Constant(l, l, 0.05 / (l - 1));
  p.diagonal().setConstant(0.95);
  return p;
}

void BM_ForwardMarginal(benchmark::State& st) {
  const int l = static_cast<int>(st.range(0));
  const Matrix ll = random_loglik(2500, l);
  const Matrix p = sticky(l);
  const Vector init = Vector::Constant(l, -std::log(double(l)));
  for (auto _ : st) benchmark::DoNotOptimize(forward_log_marginal(ll, p, init));
}
BENCHMARK(BM_ForwardMarginal)->Arg(3)->Arg(8)->Arg(20);

void BM_Ffbs(benchmark::State& st) {
  const int l = static_cast<int>(st.range(0));
  const Matrix ll = random_loglik(2500, l);
  const Matrix p = sticky(l);
  const Vector init = Vector::Constant(l, -std::log(double(l)));
  Rng rng(2);
  for (auto _ : st) benchmark::DoNotOptimize(ffbs(ll, p, init, rng));
}
BENCHMARK(BM_Ffbs)->Arg(3)->Arg(8)->Arg(20);

void BM_ObservationMatrix(benchmark::State& st) {
  const auto s = driver_like_scenario();
  for (auto _ : st) benchmark::DoNotOptimize(estimate_observation_matrix(s.emissions, st.range(0), 1));
  st.SetItemsProcessed(st.iterations() * st.range(0) * 3);
}
BENCHMARK(BM_ObservationMatrix)->Arg(100000);

void BM_SolveDp(benchmark::State& st) {
  const auto m = random_pomdp(5, 3, 3, 1.0, 1);
  for (auto _ : st) benchmark::DoNotOptimize(solve_optimal_dp(m, static_cast<int>(st.range(0))).value);
}
BENCHMARK(BM_SolveDp)->DenseRange(2, 5);

void BM_SolveEnum(benchmark::State& st) {
  const auto m = random_pomdp(3, 2, 2, 1.0, 1);
  for (auto _ : st) benchmark::DoNotOptimize(solve_optimal_enum(m, 3).value);
}
BENCHMARK(BM_SolveEnum)->Unit(benchmark::kMillisecond);

void BM_EvaluateExact(benchmark::State& st) {
  const auto m = random_pomdp(5, 3, 3, 1.0, 1);
  const int h = static_cast<int>(st.range(0));
  const auto p = solve_optimal_dp(m, h).policy;
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_policy_exact(m, p, h).value);
}
BENCHMARK(BM_EvaluateExact)->DenseRange(2, 4);

void BM_FitSweeps(benchmark::State& st) {
  const auto data = simulate_continuous(driver_like_scenario(), 4, 500, 1);
  const auto h = default_hyperparams(data);
  FitConfig c;
  c.sweeps = 20;
  for (auto _ : st) benchmark::DoNotOptimize(fit_bphmm(data, h, c).map.num_states);
}
BENCHMARK(BM_FitSweeps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

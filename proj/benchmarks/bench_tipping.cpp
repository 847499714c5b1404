#include <benchmark/benchmark.h>

#include "tipping/fpe1d.hpp"
#include "tipping/fpe2d.hpp"
#include "tipping/mode.hpp"
#include "tipping/monsoon.hpp"
#include "tipping/monte_carlo.hpp"

using namespace tipping;

static void BM_MonsoonFold(benchmark::State& state) {
  monsoon::MonsoonParams p = monsoon::MonsoonParams::reference();
  for (auto _ : state) benchmark::DoNotOptimize(monsoon::fold(p).d_b);
}
BENCHMARK(BM_MonsoonFold)->Unit(benchmark::kMillisecond);

static void BM_Fpe1d(benchmark::State& state) {
  FpeGrid1D g;
  g.nx = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_fpe_1d(0.0, 1.0, g).P_esc);
}
BENCHMARK(BM_Fpe1d)->Arg(401)->Arg(801)->Arg(1601)->Unit(benchmark::kMillisecond);

static void BM_Gamma1(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gamma1(-1.0, 8.0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Gamma1)->Arg(801)->Arg(3201)->Unit(benchmark::kMillisecond);

static void BM_ModeApprox(benchmark::State& state) {
  RateModel rate = RateModel::tabulated();
  for (auto _ : state) benchmark::DoNotOptimize(mode_approx_canonical(-1.0, 0.5, rate).P);
}
BENCHMARK(BM_ModeApprox)->Unit(benchmark::kMillisecond);

static void BM_MonteCarloBatch(benchmark::State& state) {
  SdeSpec s = canonical_sde(0.0, 1.0);
  McOptions o;
  o.n_paths = 1000;
  o.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_escape(s, o).P);
}
BENCHMARK(BM_MonteCarloBatch)->Unit(benchmark::kMillisecond);

static void BM_Fpe2dShort(benchmark::State& state) {
  monsoon::MonsoonParams p = monsoon::MonsoonParams::reference();
  monsoon::AlbedoForcing f = monsoon::scenario(0.01, 2.0, 0.5287);
  Fpe2dGrid g;
  g.nQ = g.nT = static_cast<int>(state.range(0));
  g.relax_time = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(solve_fpe_2d_monsoon(p, f, 0.01, 3.0, g).P_esc);
}
BENCHMARK(BM_Fpe2dShort)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "bilatrr/estimation.hpp"
#include "bilatrr/gof.hpp"
#include "bilatrr/intervals.hpp"
#include "bilatrr/simharness.hpp"

using namespace bilatrr;

namespace {

const Dataset kOme{{9, 7, 23, 20, 34}, {7, 5, 13, 19, 36}};

void BM_FitUnconstrained(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_unconstrained(kOme));
}
BENCHMARK(BM_FitUnconstrained);

void BM_FitConstrained(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_constrained(kOme, 1.2));
}
BENCHMARK(BM_FitConstrained);

void BM_Interval(benchmark::State& state) {
  const auto method = static_cast<CiMethod>(state.range(0));
  const MleResult mle = fit_unconstrained(kOme);
  for (auto _ : state) {
    switch (method) {
      case CiMethod::SC: benchmark::DoNotOptimize(ci_score(kOme, mle, 0.05)); break;
      case CiMethod::PL: benchmark::DoNotOptimize(ci_profile(kOme, mle, 0.05)); break;
      case CiMethod::W: benchmark::DoNotOptimize(ci_wald(kOme, mle, 0.05)); break;
      case CiMethod::MV: benchmark::DoNotOptimize(ci_mover(kOme, 0.05)); break;
      case CiMethod::GE: benchmark::DoNotOptimize(ci_gee(kOme, 0.05)); break;
    }
  }
  state.SetLabel(std::string(method_name(method)));
}
BENCHMARK(BM_Interval)->DenseRange(0, 4);

void BM_AnalyzeAll(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(analyze_all(kOme, 0.05, 1.0));
}
BENCHMARK(BM_AnalyzeAll);

void BM_Gof(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gof_all(kOme));
}
BENCHMARK(BM_Gof);

void BM_RunCell(benchmark::State& state) {
  SimSetting s;
  s.reps = state.range(0);
  s.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_cell(s, 1));
  state.SetItemsProcessed(state.iterations() * s.reps);
}
BENCHMARK(BM_RunCell)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "align/cohort_sim.hpp"

namespace {

void BM_GenerateCohort(benchmark::State& state) {
  align::SimConfig config;
  config.n_students = static_cast<std::size_t>(state.range(0));
  config.noise = 0.1;
  for (auto _ : state) {
    auto cohort = align::generate_cohort(config);
    benchmark::DoNotOptimize(cohort);
  }
}
BENCHMARK(BM_GenerateCohort)->Arg(30)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_RecoveryReport(benchmark::State& state) {
  align::SimConfig config;
  config.noise = 0.2;
  auto cohort = align::generate_cohort(config);
  for (auto _ : state) {
    auto report = align::recovery_report(cohort.dataset, cohort.latents, 0.7, {});
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_RecoveryReport)->Unit(benchmark::kMillisecond);

}  // namespace

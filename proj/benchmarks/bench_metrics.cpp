#include <benchmark/benchmark.h>

#include <random>

#include "align/evaluation.hpp"

namespace {

void BM_Metrics3x3(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto m = align::ConfusionMatrix::empty(align::k_band_classes);
  for (auto& row : m.counts)
    for (auto& c : row) c = rng() % 50;
  for (auto _ : state) {
    auto report = align::metrics(m);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_Metrics3x3);

void BM_ConfusionFromPairs(benchmark::State& state) {
  std::mt19937_64 rng(5);
  align::BandMap pred;
  align::GroundTruthMap truth;
  const align::Band bands[] = {align::Band::High, align::Band::Medium, align::Band::Low};
  for (int s = 0; s < state.range(0); ++s) {
    align::StudentId id{"s" + std::to_string(s)};
    for (int t = 0; t < 8; ++t) {
      auto topic = "t" + std::to_string(t);
      pred[{id, topic}] = bands[rng() % 3];
      truth[id][topic] = bands[rng() % 3];
    }
  }
  for (auto _ : state) {
    auto result = align::confusion(pred, truth);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_ConfusionFromPairs)->Arg(30)->Arg(300);

}  // namespace

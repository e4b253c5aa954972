#include <benchmark/benchmark.h>

#include <random>

#include "align/proficiency.hpp"

namespace {

std::vector<align::GradebookEntry> random_gradebook(std::size_t n, std::size_t n_topics, std::set<align::Topic>& topics) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t t = 0; t < n_topics; ++t) topics.insert("topic_" + std::to_string(t));
  std::vector<align::Topic> names(topics.begin(), topics.end());
  std::vector<align::GradebookEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    double possible = 10;
    double earned = std::floor(unit(rng) * 11);
    out.push_back({align::StudentId{"s1"}, "quiz_" + std::to_string(i), names[i % names.size()], earned, possible,
                   earned / possible});
  }
  return out;
}

void BM_ProficiencyAndGaps(benchmark::State& state) {
  std::set<align::Topic> topics;
  auto entries = random_gradebook(static_cast<std::size_t>(state.range(0)), 12, topics);
  align::BandConfig bands;
  for (auto _ : state) {
    auto grouped = align::process_gradebook(entries, topics);
    auto vector = align::compute_proficiency(grouped, topics, bands, align::StudentId{"s1"});
    auto gaps = align::identify_gaps(vector, 0.7);
    benchmark::DoNotOptimize(gaps);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProficiencyAndGaps)->Arg(50)->Arg(200)->Arg(2000);

}  // namespace

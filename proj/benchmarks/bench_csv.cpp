#include <benchmark/benchmark.h>

#include "align/learner_data.hpp"

namespace {

std::string synthetic_gradebook(std::size_t rows) {
  std::string raw(align::k_gradebook_header);
  raw += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    raw += "s" + std::to_string(i % 300) + ",quiz_" + std::to_string(i % 17) + ",\"Topic, part " +
           std::to_string(i % 9) + "\"," + std::to_string(i % 11) + ",10\n";
  }
  return raw;
}

void BM_ParseGradebook(benchmark::State& state) {
  auto raw = synthetic_gradebook(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto entries = align::parse_gradebook(raw);
    benchmark::DoNotOptimize(entries);
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(raw.size()));
}
BENCHMARK(BM_ParseGradebook)->Arg(1000)->Arg(20000);

}  // namespace

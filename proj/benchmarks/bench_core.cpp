#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "tdt/diagram.hpp"
#include "tdt/distill.hpp"
#include "tdt/dowker.hpp"

namespace {

tdt::Relation random_relation(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.6);
  std::vector<std::string> programs, inputs;
  for (std::size_t j = 0; j < m; ++j) programs.push_back("P" + std::to_string(j));
  for (std::size_t k = 0; k < n; ++k) inputs.push_back("f" + std::to_string(k));
  std::vector<std::uint8_t> cells(m * n);
  for (auto& c : cells) c = bit(rng) ? 1 : 0;
  return tdt::Relation(programs, inputs, std::move(cells));
}

void BM_BuildDiagram(benchmark::State& state) {
  const auto r = random_relation(static_cast<std::size_t>(state.range(0)), 100000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(tdt::build_diagram(r));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.input_count()));
}
BENCHMARK(BM_BuildDiagram)->Arg(4)->Arg(8)->Arg(16);

void BM_InconsistencyScores(benchmark::State& state) {
  const auto r = random_relation(static_cast<std::size_t>(state.range(0)), 10000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tdt::inconsistency_scores(r, 2));
}
BENCHMARK(BM_InconsistencyScores)->Arg(4)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Betti(benchmark::State& state) {
  const auto r = random_relation(static_cast<std::size_t>(state.range(0)), 200, 3);
  const auto c = tdt::build_complex(r);
  for (auto _ : state) benchmark::DoNotOptimize(tdt::betti_numbers(c, 2));
}
BENCHMARK(BM_Betti)->Arg(6)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

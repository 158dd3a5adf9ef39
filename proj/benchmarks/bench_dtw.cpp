#include <benchmark/benchmark.h>

#include "otmap/fda.hpp"

using namespace otmap;

static void BM_Dtw(benchmark::State& state) {
  const int len = int(state.range(0));
  Rng rng(4);
  const Vec a = rng.uniform_vec(len), b = rng.uniform_vec(len);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_distance(a, b));
  state.SetComplexityN(len);
}
BENCHMARK(BM_Dtw)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

#include <benchmark/benchmark.h>

#include "otmap/assignment.hpp"

using namespace otmap;

static void BM_SolveAssignment(benchmark::State& state) {
  const int n = int(state.range(0));
  Mat X(n, 10), Y(n, 10);
  Rng rng(3);
  for (int i = 0; i < n; ++i) {
    X.row(i) = rng.uniform_vec(10).transpose();
    Y.row(i) = rng.uniform_vec(10).transpose();
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(X, Y));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(2)->Range(64, 512)->Complexity();

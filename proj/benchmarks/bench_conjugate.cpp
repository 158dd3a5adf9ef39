#include <benchmark/benchmark.h>

#include "otmap/semidual.hpp"

using namespace otmap;

static void BM_ConjugateFourier(benchmark::State& state) {
  const int d = int(state.range(0));
  FourierPotential phi(SmoothnessMap::mixed(WeightRule::power(1, 1)), 9, d);
  Rng rng(1);
  for (int i = 0; i < phi.num_coeffs(); ++i) phi.set_coeff(i, rng.uniform(-1, 1));
  phi.project_to_ball(1.0);
  FourierBrenier pot(phi, 0.0);
  const Vec y = rng.uniform_vec(d);
  for (auto _ : state) benchmark::DoNotOptimize(conjugate(pot, y));
}
BENCHMARK(BM_ConjugateFourier)->Arg(2)->Arg(5)->Arg(10);

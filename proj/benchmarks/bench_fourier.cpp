#include <benchmark/benchmark.h>

#include "otmap/fourier.hpp"

using namespace otmap;

namespace {

FourierPotential make_potential(double J, int d) {
  FourierPotential phi(SmoothnessMap::mixed(WeightRule::power(1, 1)), J, d);
  Rng rng(1);
  for (int i = 0; i < phi.num_coeffs(); ++i) phi.set_coeff(i, rng.uniform(-1, 1));
  return phi;
}

}  // namespace

static void BM_PotentialValue(benchmark::State& state) {
  const auto phi = make_potential(double(state.range(0)), 4);
  Rng rng(2);
  const Vec x = rng.uniform_vec(4);
  for (auto _ : state) benchmark::DoNotOptimize(phi.value(x));
  state.counters["coeffs"] = double(phi.num_coeffs());
}
BENCHMARK(BM_PotentialValue)->Arg(9)->Arg(12)->Arg(15);

static void BM_PotentialGrad(benchmark::State& state) {
  const auto phi = make_potential(double(state.range(0)), 4);
  Rng rng(2);
  const Vec x = rng.uniform_vec(4);
  for (auto _ : state) benchmark::DoNotOptimize(phi.gradient(x));
}
BENCHMARK(BM_PotentialGrad)->Arg(9)->Arg(12)->Arg(15);

#include <benchmark/benchmark.h>

#include "otmap/mlp.hpp"

using namespace otmap;

static void BM_MlpValueGradBatch(benchmark::State& state) {
  const int d = 50, b = int(state.range(0));
  MlpPotential net(d, {64, 64}, 20, 64.0, 1);
  Rng rng(2);
  auto& W = net.mutable_weights().back();
  for (Eigen::Index c = 0; c < W.cols(); ++c) W(0, c) = rng.uniform(-0.5, 0.5);
  Mat X(b, d);
  for (int i = 0; i < b; ++i) X.row(i) = rng.uniform_vec(d).transpose();
  Vec val;
  Mat grad;
  for (auto _ : state) {
    net.value_and_input_grad(X, val, grad);
    benchmark::DoNotOptimize(grad);
  }
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_MlpValueGradBatch)->Arg(1)->Arg(32)->Arg(128);

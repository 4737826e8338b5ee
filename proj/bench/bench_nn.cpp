// Loss-and-gradient throughput: blocked parallel kernel vs per-sample reference.
#include <benchmark/benchmark.h>

#include "tamp/nn/kernels.hpp"

using namespace tamp;
using namespace tamp::nn;

namespace {

struct Fixture {
  Mlp net;
  Matrix x, y;
};

Fixture make(Eigen::Index rows) {
  Rng rng(1);
  std::vector<std::size_t> hidden{32, 32};
  Fixture f{Mlp::create(12, hidden, 6, Head::kGaussian, rng), Matrix(rows, 12), Matrix(rows, 6)};
  for (Eigen::Index i = 0; i < f.x.size(); ++i) f.x.data()[i] = uniform(rng, -1, 1);
  for (Eigen::Index i = 0; i < f.y.size(); ++i) f.y.data()[i] = uniform(rng, -1, 1);
  return f;
}

void BM_Parallel(benchmark::State& state) {
  Fixture f = make(state.range(0));
  Vector g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::loss_and_grad(f.net, Loss::kGaussianNll, f.x, f.y, &g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Reference(benchmark::State& state) {
  Fixture f = make(state.range(0));
  Vector g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::loss_and_grad(f.net, Loss::kGaussianNll, f.x, f.y, &g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Parallel)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK(BM_Reference)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK_MAIN();

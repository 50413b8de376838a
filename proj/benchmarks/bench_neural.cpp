// SPDX-License-Identifier: Apache-2.0
// Forward and backward cost of the network building blocks.
#include <benchmark/benchmark.h>

#include "rmap/layers.hpp"
#include "rmap/model.hpp"
#include "rmap/rng.hpp"
#include "rmap/tensor.hpp"

namespace {

rmap::Tensor4 random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
  rmap::Tensor4 t(n, c, h, w);
  rmap::Rng rng(seed);
  for (double& v : t.v) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_ConvForward(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  rmap::Conv2d conv("bench", {ch, ch, 3, 3, 1});
  rmap::Rng rng(1);
  conv.init(rng);
  const rmap::Tensor4 x = random_tensor(1, ch, 32, 32, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv.forward(x));
  }
}

void BM_ConvBackward(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  rmap::Conv2d conv("bench", {ch, ch, 3, 3, 1});
  rmap::Rng rng(1);
  conv.init(rng);
  const rmap::Tensor4 x = random_tensor(1, ch, 32, 32, 2);
  const rmap::Tensor4 dy = random_tensor(1, ch, 32, 32, 3);
  for (auto _ : state) {
    conv.weight().zero_grad();
    conv.bias().zero_grad();
    benchmark::DoNotOptimize(conv.backward(x, dy));
  }
}

void BM_GeneratorForward(benchmark::State& state) {
  rmap::GeneratorConfig gc;
  gc.depth = static_cast<int>(state.range(0));
  gc.base_channels = 8;
  rmap::Generator gen(gc);
  rmap::Rng rng(4);
  gen.init(rng);
  const rmap::Tensor4 x = random_tensor(1, 3, 64, 64, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen.forward(x));
  }
}

void BM_GeneratorStep(benchmark::State& state) {
  rmap::GeneratorConfig gc;
  gc.depth = static_cast<int>(state.range(0));
  gc.base_channels = 8;
  rmap::Generator gen(gc);
  rmap::Rng rng(4);
  gen.init(rng);
  const rmap::Tensor4 x = random_tensor(1, 3, 64, 64, 5);
  const rmap::Tensor4 dy = random_tensor(1, 1, 64, 64, 6);
  for (auto _ : state) {
    rmap::NetTape tape;
    benchmark::DoNotOptimize(gen.forward(x, &tape));
    gen.zero_grad();
    benchmark::DoNotOptimize(gen.backward(tape, dy));
  }
}

}  // namespace

BENCHMARK(BM_ConvForward)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_ConvBackward)->Arg(8)->Arg(16)->Arg(32);
BENCHMARK(BM_GeneratorForward)->Arg(2)->Arg(3);
BENCHMARK(BM_GeneratorStep)->Arg(2)->Arg(3);

BENCHMARK_MAIN();

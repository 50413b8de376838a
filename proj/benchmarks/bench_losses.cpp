// SPDX-License-Identifier: Apache-2.0
// Loss terms, the similarity index and the spectral helpers at map scale.
#include <benchmark/benchmark.h>

#include "rmap/dft.hpp"
#include "rmap/losses.hpp"
#include "rmap/msssim.hpp"
#include "rmap/rng.hpp"
#include "rmap/sampling.hpp"

namespace {

rmap::Grid random_grid(int h, int w, std::uint64_t seed) {
  rmap::Grid g = rmap::Grid::zeros(h, w);
  rmap::Rng rng(seed);
  for (double& v : g.values) v = rng.next_double();
  return g;
}

void BM_MsSsim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const rmap::Grid u = random_grid(side, side, 1);
  const rmap::Grid v = random_grid(side, side, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::ms_ssim(u, v));
  }
}

void BM_LossGradientCosine(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const rmap::Grid u = random_grid(side, side, 3);
  const rmap::Grid v = random_grid(side, side, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::l_gradient(u, v));
  }
}

void BM_Dft2(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const rmap::Grid g = random_grid(side, side, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::dft2(g));
  }
}

void BM_HighFreqSelect(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const rmap::Grid g = random_grid(side, side, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::high_freq_select(g, 32));
  }
}

void BM_Superpixels(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const rmap::Grid g = random_grid(side, side, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::superpixels(g, 24));
  }
}

}  // namespace

BENCHMARK(BM_MsSsim)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_LossGradientCosine)->Arg(64)->Arg(256);
BENCHMARK(BM_Dft2)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_HighFreqSelect)->Arg(64)->Arg(256);
BENCHMARK(BM_Superpixels)->Arg(64)->Arg(256);

BENCHMARK_MAIN();

// SPDX-License-Identifier: Apache-2.0
// Interpolation baselines over a 64x64 region at varying observation counts.
#include <benchmark/benchmark.h>

#include "rmap/interp.hpp"
#include "rmap/ldpl.hpp"
#include "rmap/rng.hpp"

namespace {

rmap::SparseSamples make_samples(int k, std::uint64_t seed) {
  rmap::Rng rng(seed);
  rmap::SparseSamples s;
  while (s.count() < k) {
    const rmap::Coord c{static_cast<int>(rng.next_below(64)),
                        static_cast<int>(rng.next_below(64))};
    bool dup = false;
    for (const rmap::Coord q : s.coords) dup = dup || q == c;
    if (dup) continue;
    s.coords.push_back(c);
    s.psd.push_back(rng.next_double());
  }
  return s;
}

void BM_IdwInterpolate(benchmark::State& state) {
  const rmap::SparseSamples s = make_samples(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::idw_interpolate(s, 64, 64, 2.0));
  }
}

void BM_RbfInterpolate(benchmark::State& state) {
  const rmap::SparseSamples s = make_samples(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rmap::rbf_interpolate(s, 64, 64, rmap::RbfKernel::gaussian, 0.1, 0.0));
  }
}

void BM_KrigingInterpolate(benchmark::State& state) {
  const rmap::SparseSamples s = make_samples(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::kriging_interpolate(s, 64, 64));
  }
}

void BM_FitLdpl(benchmark::State& state) {
  const rmap::SparseSamples s = make_samples(static_cast<int>(state.range(0)), 4);
  rmap::TransmitterSet tx;
  tx.positions = {{20, 20}, {50, 40}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rmap::fit_ldpl(s, tx, 64, 64));
  }
}

}  // namespace

BENCHMARK(BM_IdwInterpolate)->Arg(64)->Arg(205)->Arg(512);
BENCHMARK(BM_RbfInterpolate)->Arg(64)->Arg(205)->Arg(512);
BENCHMARK(BM_KrigingInterpolate)->Arg(64)->Arg(205)->Arg(512);
BENCHMARK(BM_FitLdpl)->Arg(64)->Arg(205)->Arg(512);

BENCHMARK_MAIN();

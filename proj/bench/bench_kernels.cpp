// Serial reference kernels against their OpenMP counterparts.
//   OMP_NUM_THREADS=4 ./bench_kernels

#include <benchmark/benchmark.h>

#include <map>

#include "retrovert/allpass.hpp"
#include "retrovert/kernels.hpp"
#include "retrovert/reversal.hpp"
#include "retrovert/simulate.hpp"
#include "support/random_models.hpp"

using namespace retrovert;

namespace {

const ReversalResult& model_with_states(Eigen::Index n) {
  static std::map<Eigen::Index, ReversalResult> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    testkit::EnsembleShape shape{n, 2, 2};
    std::uint64_t seed = 1;
    ForwardModel m;
    do {
      m = testkit::random_model(seed++, TimeDomain::kDiscrete, shape);
    } while (m.states() != n);
    it = cache.emplace(n, reverse(m)).first;
  }
  return it->second;
}

void BM_AllpassSweepSerial(benchmark::State& state) {
  const auto& r = model_with_states(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_allpass_grid_reference(r.extension, 2048));
}

void BM_AllpassSweepParallel(benchmark::State& state) {
  const auto& r = model_with_states(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_allpass_grid(r.extension, 2048));
}

void BM_FactorizationSerial(benchmark::State& state) {
  const auto& r = model_with_states(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(check_factorization_grid_reference(r.forward, r, 2048));
}

void BM_FactorizationParallel(benchmark::State& state) {
  const auto& r = model_with_states(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_factorization_grid(r.forward, r, 2048));
}

void BM_AutocovSerial(benchmark::State& state) {
  const Matrix seq = gen_white_noise(1, state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::autocovariance_reference(seq, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_AutocovParallel(benchmark::State& state) {
  const Matrix seq = gen_white_noise(1, state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::autocovariance(seq, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_AllpassSweepSerial)->Arg(2)->Arg(8);
BENCHMARK(BM_AllpassSweepParallel)->Arg(2)->Arg(8);
BENCHMARK(BM_FactorizationSerial)->Arg(2)->Arg(8);
BENCHMARK(BM_FactorizationParallel)->Arg(2)->Arg(8);
BENCHMARK(BM_AutocovSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_AutocovParallel)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();

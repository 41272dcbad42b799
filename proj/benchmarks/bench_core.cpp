#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "dflab/fdd.hpp"
#include "dflab/metric.hpp"
#include "dflab/simulate.hpp"
#include "dflab/spectral.hpp"
#include "dflab/state_space.hpp"

using namespace dflab;

namespace {

std::shared_ptr<const StateSpace> lattice(int cells) {
  static std::map<int, std::shared_ptr<const StateSpace>> cache;
  auto& entry = cache[cells];
  if (!entry) entry = std::make_shared<StateSpace>(build_lattice_1d(cells, 1.0, 1.0));
  return entry;
}

const SpectralCache& cache_for(int cells) {
  static std::map<int, std::unique_ptr<SpectralCache>> cache;
  auto& entry = cache[cells];
  if (!entry) entry = std::make_unique<SpectralCache>(SpectralCache::build(lattice(cells)));
  return *entry;
}

const DistanceMatrix& dmat_for(int cells) {
  static std::map<int, std::unique_ptr<DistanceMatrix>> cache;
  auto& entry = cache[cells];
  if (!entry) entry = std::make_unique<DistanceMatrix>(DistanceMatrix::build(*lattice(cells)));
  return *entry;
}

void BM_SpectralBuild(benchmark::State& state) {
  const auto space = lattice(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto built = SpectralCache::build(space);
    benchmark::DoNotOptimize(built.eigenvalues());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpectralBuild)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_HeatKernelEval(benchmark::State& state) {
  const auto& cache = cache_for(256);
  for (auto _ : state) {
    const auto kv = cache.heat_kernel(0.05, 64, 192);
    benchmark::DoNotOptimize(kv.value);
  }
}
BENCHMARK(BM_HeatKernelEval);

void BM_LogKernelDeepTail(benchmark::State& state) {
  const auto& cache = cache_for(256);
  for (auto _ : state) {
    const double lp = cache.log_heat_kernel(2e-3, 64, 192);
    benchmark::DoNotOptimize(lp);
  }
}
BENCHMARK(BM_LogKernelDeepTail);

void BM_DistanceMatrix(benchmark::State& state) {
  const auto space = lattice(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto dmat = DistanceMatrix::build(*space);
    benchmark::DoNotOptimize(dmat.lower(0, 1));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DistanceMatrix)->Arg(64)->Arg(128)->Arg(256)->Complexity();

void BM_IntrinsicDistancePair(benchmark::State& state) {
  const auto space = lattice(256);
  for (auto _ : state) {
    auto bracket = intrinsic_distance(*space, 64, 192, 1e-3);
    benchmark::DoNotOptimize(bracket.lower);
  }
}
BENCHMARK(BM_IntrinsicDistancePair);

void BM_FddRate(benchmark::State& state) {
  const auto space = lattice(256);
  const auto& dmat = dmat_for(256);
  const CylinderEvent event{TimePartition({0.0, 0.5, 1.0}),
                            {Region::of({64}),
                             Region::of(metric_ball(dmat, 128, 0.05)),
                             Region::of({192})},
                            {},
                            -1.0};
  for (auto _ : state) {
    auto rate = fdd_rate(dmat, event.sets, event.partition);
    benchmark::DoNotOptimize(rate.rate);
  }
}
BENCHMARK(BM_FddRate);

void BM_FddLogProbability(benchmark::State& state) {
  const auto& cache = cache_for(256);
  const auto& dmat = dmat_for(256);
  const CylinderEvent event{TimePartition({0.0, 0.5, 1.0}),
                            {Region::of({64}),
                             Region::of(metric_ball(dmat, 128, 0.05)),
                             Region::of({192})},
                            {},
                            -1.0};
  for (auto _ : state) {
    const double lp = fdd_log_probability(cache, event, 5e-3);
    benchmark::DoNotOptimize(lp);
  }
}
BENCHMARK(BM_FddLogProbability);

void BM_SamplePath(benchmark::State& state) {
  const auto space = lattice(256);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    const auto path = sample_path(*space, 0.02, 128, 42, stream++);
    benchmark::DoNotOptimize(path.states.back());
  }
}
BENCHMARK(BM_SamplePath);

}  // namespace

BENCHMARK_MAIN();

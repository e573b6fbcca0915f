// Serial reference kernels against the optimised and OpenMP paths.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "rsvoronoi/estimator.hpp"
#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/simulate.hpp"

using namespace rsv;

namespace {

const PlanarWindow kUnit = PlanarWindow::rectangle(0, 0, 1, 1);

PointPattern pattern(std::int64_t n) { return sim_hpp(static_cast<double>(n), kUnit, 17); }

void BM_NearestOwnerReference(benchmark::State& state) {
  const auto pp = pattern(state.range(0));
  const auto grid = RasterGrid::square_pixels(kUnit, state.range(1));
  std::vector<std::int32_t> owner(grid.size());
  for (auto _ : state) {
    kernels::nearest_owner_reference(pp.points(), grid, owner);
    benchmark::DoNotOptimize(owner.data());
  }
}

void BM_NearestOwnerEnvelope(benchmark::State& state) {
  const auto pp = pattern(state.range(0));
  const auto grid = RasterGrid::square_pixels(kUnit, state.range(1));
  std::vector<std::int32_t> owner(grid.size());
  for (auto _ : state) {
    kernels::nearest_owner(pp.points(), grid, owner);
    benchmark::DoNotOptimize(owner.data());
  }
}

/// Resample-smoothed estimate with range(1) OpenMP threads.
void BM_SmoothedEstimate(benchmark::State& state) {
  const auto pp = pattern(state.range(0));
  const auto grid = RasterGrid::square_pixels(kUnit, 128);
  const int before = omp_get_max_threads();
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto f = resample_smoothed_estimate(pp, EstimatorConfig{0.2, 200, 3}, grid);
    benchmark::DoNotOptimize(f.value.data());
  }
  omp_set_num_threads(before);
}

}  // namespace

BENCHMARK(BM_NearestOwnerReference)->Args({60, 128})->Args({500, 128})->Args({60, 512})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_NearestOwnerEnvelope)->Args({60, 128})->Args({500, 128})->Args({60, 512})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SmoothedEstimate)->Args({60, 1})->Args({60, 4})->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

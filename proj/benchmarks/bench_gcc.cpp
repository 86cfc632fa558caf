#include <benchmark/benchmark.h>

#include <translab/gcc.hpp>

#include "support/fixtures.hpp"

using namespace translab;

static void BM_Gamma1(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  GccSampling s;
  s.boundary_samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_gamma1(g, k, s));
}
BENCHMARK(BM_Gamma1)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_CollisionMap(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  for (auto _ : state) benchmark::DoNotOptimize(collision_map(g, {-0.6, 0.1}, {0.3, 1.0}));
}
BENCHMARK(BM_CollisionMap);

static void BM_FullReport(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  GccSampling s;
  s.boundary_samples = s.interface_samples = 128;
  s.angle_samples = 32;
  s.ueg_samples = 64;
  for (auto _ : state) benchmark::DoNotOptimize(full_report(g, k, s));
}
BENCHMARK(BM_FullReport)->Unit(benchmark::kMillisecond)->Iterations(3);

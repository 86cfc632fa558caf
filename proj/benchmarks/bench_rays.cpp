#include <benchmark/benchmark.h>

#include <translab/rays.hpp>

#include "support/fixtures.hpp"

using namespace translab;

static void BM_FlowThroughBump(benchmark::State& state) {
  GeometryDescriptor d = fixtures::golden_annulus();
  d.damping.center = {0.6, 0.0};
  d.damping.radial_inner = 0.0;
  d.damping.radial_outer = 0.1;
  d.damping.radial_ramp = 0.1;
  const Geometry g = build_geometry(d);
  const MemoryKernel k = fixtures::golden_kernel();
  const PhasePoint p = make_phase_point(g, k, {0.55, -0.4}, {0.05, 1.0}, Medium::Omega1);
  for (auto _ : state) benchmark::DoNotOptimize(flow_segment(g, k, p, 10.0));
}
BENCHMARK(BM_FlowThroughBump);

static void BM_RayTree(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  const PhasePoint p = make_phase_point(g, k, {-0.5, 0.1}, {1.0, 0.2}, Medium::Omega1);
  TraceBudget budget;
  budget.max_events = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trace_ray_tree(g, k, p, budget));
}
BENCHMARK(BM_RayTree)->Arg(8)->Arg(32);

static void BM_SnellEvent(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  const Vec2 x = g.inner().point(0.2);
  const Vec2 dir = g.inner().unit_tangent(0.2) * 0.4 - g.inner().normal(0.2) * std::sqrt(1 - 0.16);
  const PhasePoint p = make_phase_point(g, k, x, dir, Medium::Omega1);
  for (auto _ : state) benchmark::DoNotOptimize(snell_event(g, k, p));
}
BENCHMARK(BM_SnellEvent);

#include <benchmark/benchmark.h>

#include <cmath>

#include <translab/solver.hpp>

#include "support/fixtures.hpp"

using namespace translab;

static void BM_SolverStep(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::golden_annulus());
  const MemoryKernel k = fixtures::golden_kernel();
  GridSpec grid;
  grid.nx = grid.ny = static_cast<int>(state.range(0));
  grid.t_end = 1.0;
  const Solver s(g, k, grid);
  InitialData data;
  data.u0 = [](Vec2 x) { return std::exp(-norm2(x - Vec2{0.45, 0.0}) / 0.04); };
  FieldState st = s.init_state(data);
  for (auto _ : state) s.step(st);
  state.counters["ns"] = s.ns();
}
BENCHMARK(BM_SolverStep)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_SolverUndampedStep(benchmark::State& state) {
  const Geometry g = build_geometry(fixtures::undamped(fixtures::golden_annulus()));
  GridSpec grid;
  grid.nx = grid.ny = static_cast<int>(state.range(0));
  const Solver s(g, fixtures::golden_kernel(), grid);
  InitialData data;
  data.u0 = [](Vec2 x) { return std::exp(-norm2(x - Vec2{0.45, 0.0}) / 0.04); };
  FieldState st = s.init_state(data);
  for (auto _ : state) s.step(st);
}
BENCHMARK(BM_SolverUndampedStep)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

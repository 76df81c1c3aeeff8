#include <benchmark/benchmark.h>

#include "cemms/fem.hpp"

using namespace cemms;

static void BM_AssembleGlobal(benchmark::State& state) {
  const auto h = build_hierarchy(10, 10, state.range(0));
  const auto coeffs = library::example1();
  for (auto _ : state) {
    auto ops = assemble_global(h.mesh, coeffs);
    benchmark::DoNotOptimize(ops.stiffness.nonZeros());
  }
  state.counters["nodes"] = static_cast<double>(h.mesh.num_nodes());
}
BENCHMARK(BM_AssembleGlobal)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_FineSolve(benchmark::State& state) {
  const auto h = build_hierarchy(10, 10, state.range(0));
  const auto ops = assemble_global(h.mesh, library::example1());
  for (auto _ : state) {
    auto sol = fine_solve(h.mesh, ops);
    benchmark::DoNotOptimize(sol.u.data());
  }
}
BENCHMARK(BM_FineSolve)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

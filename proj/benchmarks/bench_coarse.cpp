#include <benchmark/benchmark.h>

#include "cemms/basis.hpp"
#include "cemms/solver.hpp"

using namespace cemms;

// Coarse assembly and solve for H = 1/nx at a fixed 80 x 80 fine mesh.
static void BM_CoarseSolve(benchmark::State& state) {
  const Index nx = state.range(0);
  const auto h = build_hierarchy(nx, nx, 80 / nx);
  const auto coeffs = library::example1();
  const auto ops = assemble_global(h.mesh, coeffs);
  const auto aux = build_auxiliary(h.mesh, h.grid, coeffs.kappa, coeffs.beta, 3);
  const auto space = build_space(h.mesh, h.grid, coeffs.kappa, aux, 2);
  for (auto _ : state) {
    auto sol = solve_ms(space, ops);
    benchmark::DoNotOptimize(sol.u_ms.data());
  }
  state.counters["coarse_dofs"] = static_cast<double>(space.num_columns());
}
BENCHMARK(BM_CoarseSolve)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

#include <benchmark/benchmark.h>

#include "cemms/basis.hpp"

using namespace cemms;

// One center cell of a 10 x 10 grid with n_f = 20; arguments are N_ov and the method.
static void BM_LocalBasis(benchmark::State& state) {
  const auto h = build_hierarchy(10, 10, 20);
  const auto coeffs = library::example1();
  const auto aux = build_auxiliary(h.mesh, h.grid, coeffs.kappa, coeffs.beta, 5);
  BasisOptions opts;
  opts.method = state.range(1) != 0 ? SaddleMethod::monolithic : SaddleMethod::condensed;
  const LocalBasisSolver solver(h.mesh, h.grid, coeffs.kappa, aux, opts);
  const auto domain = oversample(h.grid, h.mesh, h.grid.cell_id(5, 5), state.range(0));
  for (auto _ : state) {
    auto block = solver.solve(domain);
    benchmark::DoNotOptimize(block.values.data());
  }
}
BENCHMARK(BM_LocalBasis)->Args({1, 0})->Args({2, 0})->Args({3, 0})->Args({2, 1})->Unit(benchmark::kMillisecond);

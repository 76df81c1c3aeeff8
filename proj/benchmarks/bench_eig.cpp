#include <benchmark/benchmark.h>

#include "cemms/spectral.hpp"

using namespace cemms;

// Per-cell spectral problems on a 10 x 10 grid; the argument is n_f.
static void BM_Auxiliary(benchmark::State& state) {
  const auto h = build_hierarchy(10, 10, state.range(0));
  const auto coeffs = library::example1();
  for (auto _ : state) {
    auto aux = build_auxiliary(h.mesh, h.grid, coeffs.kappa, coeffs.beta, 5);
    benchmark::DoNotOptimize(aux.Lambda());
  }
}
BENCHMARK(BM_Auxiliary)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_DenseVsIterativeEig(benchmark::State& state) {
  const auto h = build_hierarchy(1, 1, state.range(0));
  const auto coeffs = library::example1();
  const auto sub = cell_subdomain(h.mesh, 0);
  const auto params = make_sform_params(h.grid, h.mesh, coeffs.beta);
  const SparseMatrix a = assemble_stiffness(h.mesh, coeffs.kappa, sub).matrix;
  const SparseMatrix b = assemble_smass(h.mesh, coeffs.kappa, coeffs.beta, params, sub).matrix;
  const bool dense = state.range(1) != 0;
  for (auto _ : state) {
    auto pairs = dense ? dense_generalized_eig(Eigen::MatrixXd(a), Eigen::MatrixXd(b), 6)
                       : iterative_generalized_eig(a, b, 6);
    benchmark::DoNotOptimize(pairs.values.data());
  }
}
BENCHMARK(BM_DenseVsIterativeEig)->Args({16, 1})->Args({16, 0})->Args({30, 1})->Args({30, 0})
    ->Unit(benchmark::kMillisecond);

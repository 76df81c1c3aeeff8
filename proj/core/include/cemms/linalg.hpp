#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "cemms/error.hpp"
#include "cemms/mesh.hpp"

namespace cemms {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Sparse LU factorization with partial pivoting (COLAMD ordering). Handles
/// nonsymmetric and symmetric indefinite (saddle-point) matrices. Immutable
/// once built; solve() may be called concurrently.
class SparseLu {
 public:
  explicit SparseLu(const SparseMatrix& a);

  Index size() const { return n_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

 private:
  Index n_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

/// Solve A x = b; throws SolverError unless solve_residual <= 1e-10.
Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b);

/// Relative residual ||Ax - b|| / ||b|| (absolute when b = 0).
double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

/// The part of ||Ax - b|| above the rounding floor 10 sqrt(n) eps ||A||_inf ||x||,
/// relative to ||b|| (absolute when b = 0).
double solve_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // one column per value
  bool b_orthonormal = false;
};

struct EigenOptions {
  /// Problems up to this size are densified and solved by Cholesky reduction.
  Index dense_limit = 256;
  /// Relative residual demanded of each pair (see eig_residual).
  double tolerance = 1e-10;
  int max_iterations = 1000;
};

/// The k smallest eigenpairs of A v = lambda B v with A symmetric positive
/// semidefinite and B symmetric positive definite. Vectors are
/// B-orthonormal and sign-normalized (largest-magnitude entry positive).
EigenPairs generalized_eig(const SparseMatrix& a, const SparseMatrix& b, Index k, const EigenOptions& opts = {});

/// Dense route: Cholesky of A + sigma B, symmetric eigensolve of L^-1 B L^-T.
EigenPairs dense_generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Index k);

/// Sparse route: shift-invert subspace iteration with Rayleigh-Ritz.
EigenPairs iterative_generalized_eig(const SparseMatrix& a, const SparseMatrix& b, Index k,
                                     const EigenOptions& opts = {});

/// Worst relative residual over the pairs: the part of ||A v - lambda B v||
/// above the rounding floor 10 sqrt(n) eps ||A||_inf ||v||, divided by
/// ||A v|| + |lambda| ||B v||. Pairs at the floor (such as a kernel vector)
/// count as exact.
double eig_residual(const SparseMatrix& a, const SparseMatrix& b, const EigenPairs& pairs);

}  // namespace cemms

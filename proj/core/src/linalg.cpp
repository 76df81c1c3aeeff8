#include "cemms/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace cemms {

SparseLu::SparseLu(const SparseMatrix& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SparseLu: matrix is not square");
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
  SparseMatrix compressed = a;
  compressed.makeCompressed();
  lu_->analyzePattern(compressed);
  lu_->factorize(compressed);
  if (lu_->info() != Eigen::Success) {
    throw SolverError("sparse LU factorization failed: " + lu_->lastErrorMessage(),
                      std::numeric_limits<double>::infinity());
  }
}

Eigen::VectorXd SparseLu::solve(const Eigen::VectorXd& b) const { return lu_->solve(b); }

Eigen::MatrixXd SparseLu::solve(const Eigen::MatrixXd& b) const { return lu_->solve(b); }

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double r = (a * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b) {
  if (a.rows() != b.size()) throw std::invalid_argument("sparse_solve: dimension mismatch");
  SparseLu lu(a);
  Eigen::VectorXd x = lu.solve(b);
  const double res = solve_residual(a, x, b);
  if (!std::isfinite(res) || res > 1e-10) {
    // One step of iterative refinement before giving up.
    x += lu.solve(Eigen::VectorXd(b - a * x));
    const double refined = solve_residual(a, x, b);
    if (!std::isfinite(refined) || refined > 1e-10) throw SolverError("sparse solve did not converge", refined);
  }
  return x;
}

namespace {

void normalize_signs(Eigen::MatrixXd& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) v.col(j) *= -1.0;
  }
}

double inf_norm(const SparseMatrix& a) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

// Modified Gram-Schmidt in the B inner product, applied twice.
void b_orthonormalize(Eigen::MatrixXd& y, const SparseMatrix& b) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < y.cols(); ++j) {
      for (Index i = 0; i < j; ++i) {
        const Eigen::VectorXd bi = b * y.col(i);
        y.col(j) -= bi.dot(y.col(j)) * y.col(i);
      }
      const double nrm = std::sqrt(std::max(0.0, y.col(j).dot(b * y.col(j))));
      if (!(nrm > 0.0)) throw SolverError("subspace iteration lost rank", 0.0);
      y.col(j) /= nrm;
    }
  }
}

}  // namespace

static double pair_residual(const Eigen::VectorXd& av, const Eigen::VectorXd& bv, double lambda, double vnorm,
                     double floor_scale) {
  const double r = (av - lambda * bv).norm();
  const double excess = std::max(0.0, r - floor_scale * vnorm);
  const double denom = av.norm() + std::abs(lambda) * bv.norm();
  if (excess == 0.0) return 0.0;
  return denom > 0.0 ? excess / denom : std::numeric_limits<double>::infinity();
}

static double rounding_floor(const SparseMatrix& a) {
  return 10.0 * std::sqrt(static_cast<double>(a.rows())) * std::numeric_limits<double>::epsilon() * inf_norm(a);
}

double solve_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double excess = std::max(0.0, (a * x - b).norm() - rounding_floor(a) * x.norm());
  const double nb = b.norm();
  return nb > 0.0 ? excess / nb : excess;
}

double eig_residual(const SparseMatrix& a, const SparseMatrix& b, const EigenPairs& pairs) {
  const double floor_scale = rounding_floor(a);
  double worst = 0.0;
  for (Index j = 0; j < pairs.values.size(); ++j) {
    const Eigen::VectorXd av = a * pairs.vectors.col(j);
    const Eigen::VectorXd bv = b * pairs.vectors.col(j);
    worst = std::max(worst, pair_residual(av, bv, pairs.values(j), pairs.vectors.col(j).norm(), floor_scale));
  }
  return worst;
}

EigenPairs dense_generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Index k) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("generalized_eig: A and B must be square and of equal size");
  }
  if (k < 1 || k > a.rows()) throw std::invalid_argument("generalized_eig: requested count out of range");
  Eigen::LLT<Eigen::MatrixXd> chol(b);
  if (chol.info() != Eigen::Success) {
    throw SolverError("generalized_eig: B is not positive definite (Cholesky failed)", 0.0);
  }
  // Reduce the shifted pencil B v = mu (A + sigma B) v instead of A v = lambda B v:
  // A + sigma B stays well conditioned when the weight in B nearly vanishes
  // somewhere, and lambda = 1 / mu - sigma.
  const double tra = a.trace();
  const double sigma = tra > 0.0 ? tra / b.trace() : 1.0;
  Eigen::LLT<Eigen::MatrixXd> shifted(a + sigma * b);
  if (shifted.info() != Eigen::Success) throw SolverError("generalized_eig: A is not positive semidefinite", 0.0);
  Eigen::MatrixXd m = shifted.matrixL().solve(b);
  m = shifted.matrixL().solve(m.transpose()).eval();
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed", 0.0);
  const Index n = a.rows();
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (Index j = 0; j < k; ++j) {
    const double mu = es.eigenvalues()(n - 1 - j);
    if (!(mu > 0.0)) throw SolverError("dense generalized eigensolve failed", 0.0);
    out.values(j) = 1.0 / mu - sigma;
    out.vectors.col(j) = es.eigenvectors().col(n - 1 - j) / std::sqrt(mu);
  }
  out.vectors = shifted.matrixU().solve(out.vectors).eval();
  normalize_signs(out.vectors);
  out.b_orthonormal = true;
  return out;
}

EigenPairs iterative_generalized_eig(const SparseMatrix& a, const SparseMatrix& b, Index k,
                                     const EigenOptions& opts) {
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n) {
    throw std::invalid_argument("generalized_eig: A and B must be square and of equal size");
  }
  if (k < 1 || k > n) throw std::invalid_argument("generalized_eig: requested count out of range");
  const Index p = std::min(n, std::max<Index>(2 * k, k + 8));
  if (p >= n) return dense_generalized_eig(Eigen::MatrixXd(a), Eigen::MatrixXd(b), k);

  {
    Eigen::SimplicialLLT<SparseMatrix> bchol(b);
    if (bchol.info() != Eigen::Success) {
      throw SolverError("generalized_eig: B is not positive definite (Cholesky failed)", 0.0);
    }
  }

  const double tra = a.diagonal().sum();
  const double trb = b.diagonal().sum();
  const double shift = tra > 0.0 ? 1e-8 * tra / trb : 1.0;
  SparseMatrix shifted = a + shift * b;
  Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
  if (solver.info() != Eigen::Success) throw SolverError("shift-invert factorization failed", 0.0);

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = unif(rng);
  }
  b_orthonormalize(x, b);

  const double floor_scale = rounding_floor(a);
  Eigen::VectorXd theta;
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd y = solver.solve(Eigen::MatrixXd(b * x));
    b_orthonormalize(y, b);
    Eigen::MatrixXd t = y.transpose() * (a * y);
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    theta = small.eigenvalues();
    x = y * small.eigenvectors();

    const Eigen::MatrixXd ax = a * x.leftCols(k);
    const Eigen::MatrixXd bx = b * x.leftCols(k);
    worst = 0.0;
    for (Index j = 0; j < k; ++j) {
      worst = std::max(worst, pair_residual(ax.col(j), bx.col(j), theta(j), x.col(j).norm(), floor_scale));
    }
    if (worst <= opts.tolerance) break;
  }
  if (worst > opts.tolerance) throw SolverError("subspace iteration did not converge", worst);

  EigenPairs out;
  out.values = theta.head(k);
  out.vectors = x.leftCols(k);
  normalize_signs(out.vectors);
  out.b_orthonormal = true;
  return out;
}

EigenPairs generalized_eig(const SparseMatrix& a, const SparseMatrix& b, Index k, const EigenOptions& opts) {
  if (a.rows() <= opts.dense_limit) return dense_generalized_eig(Eigen::MatrixXd(a), Eigen::MatrixXd(b), k);
  return iterative_generalized_eig(a, b, k, opts);
}

}  // namespace cemms

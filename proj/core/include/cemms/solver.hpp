#pragma once

#include <Eigen/Dense>

#include "cemms/basis.hpp"
#include "cemms/coefficients.hpp"
#include "cemms/fem.hpp"
#include "cemms/linalg.hpp"

namespace cemms {

struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;
};

/// Relative L2 error (mass matrix) and relative weighted energy error
/// (kappa stiffness) of u_ms against u_h.
ErrorPair compute_errors(const Eigen::VectorXd& u_ms, const Eigen::VectorXd& u_h, const SparseMatrix& mass,
                         const SparseMatrix& stiffness);
ErrorPair compute_errors(const Eigen::VectorXd& u_ms, const Eigen::VectorXd& u_h, const FineMesh& mesh,
                         const ScalarField& kappa);

struct CoarseSystem {
  /// R^T (K + C) R
  Eigen::MatrixXd matrix;
  /// R^T F
  Eigen::VectorXd rhs;
};

/// Galerkin projection onto the multiscale space, block by block.
CoarseSystem assemble_coarse(const MultiscaleSpace& space, const SparseMatrix& op, const Eigen::VectorXd& load,
                             int threads = 0);

struct MsSolution {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd u_ms;
  /// ||R^T((K + C) u_ms - F)|| / ||R^T F||
  double galerkin_residual = 0.0;
};

/// Solve A(u_ms, v) = (f, v) for all v in the multiscale space.
MsSolution solve_ms(const MultiscaleSpace& space, const GlobalOperators& ops, int threads = 0);
MsSolution solve_ms(const MultiscaleSpace& space, const FineMesh& mesh, const Coefficients& coeffs, int threads = 0);

/// Same projection for an arbitrary fine-node x column basis matrix.
MsSolution solve_galerkin(const SparseMatrix& basis, const GlobalOperators& ops);

/// R^T v for the multiscale basis.
Eigen::VectorXd project_onto_space(const MultiscaleSpace& space, const Eigen::VectorXd& v);

}  // namespace cemms

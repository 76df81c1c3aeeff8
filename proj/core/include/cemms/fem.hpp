#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "cemms/coefficients.hpp"
#include "cemms/linalg.hpp"
#include "cemms/mesh.hpp"

namespace cemms {

/// A set of fine triangles and the nodes they touch (ascending global ids).
struct Subdomain {
  std::vector<Index> triangles;
  std::vector<Index> nodes;

  /// Local position of a global node id, or -1.
  Index local_of(Index global) const;
};

Subdomain whole_mesh(const FineMesh& mesh);
Subdomain cell_subdomain(const FineMesh& mesh, Index cell);
Subdomain subdomain_of(const FineMesh& mesh, const OversampleDomain& domain);
Subdomain subdomain_from_triangles(const FineMesh& mesh, std::vector<Index> triangles);

/// Assembled operator over a node subset. Row/column r corresponds to global
/// node dofs[r].
struct SparseSystem {
  SparseMatrix matrix;
  std::vector<Index> dofs;
  bool symmetric = false;
  /// Global ids removed by Dirichlet elimination so far.
  std::vector<Index> eliminated;

  Index size() const { return static_cast<Index>(dofs.size()); }

  /// Drop every row and column whose flag is nonzero. `drop` is indexed by
  /// local dof position.
  SparseSystem eliminate(const std::vector<char>& drop) const;
};

/// Weighting of the spectral mass form: H^-2 kappa max(|beta|^2, floor).
struct SFormParams {
  double H = 1.0;
  double beta_sq_floor = 0.0;
};

/// floor = 1e-12 * (sup |beta|)^2 over the mesh quadrature points.
SFormParams make_sform_params(const CoarseGrid& grid, const FineMesh& mesh, const VectorField& beta);

using ElementMatrix = Eigen::Matrix3d;

/// P1 element kernels with the edge-midpoint rule; coefficient arguments are
/// the values at the three quadrature points (midpoints of edges 01, 12, 20).
ElementMatrix element_stiffness(const std::array<Point, 3>& p, const std::array<double, 3>& kappa);
ElementMatrix element_convection(const std::array<Point, 3>& p, const std::array<Vec2, 3>& beta);
ElementMatrix element_mass(const std::array<Point, 3>& p, const std::array<double, 3>& weight);
Eigen::Vector3d element_load(const std::array<Point, 3>& p, const std::array<double, 3>& f);

/// int kappa grad u . grad v
SparseSystem assemble_stiffness(const FineMesh& mesh, const ScalarField& kappa, const Subdomain& sub);
/// int (beta . grad u) v, row = test function
SparseSystem assemble_convection(const FineMesh& mesh, const VectorField& beta, const Subdomain& sub);
/// int H^-2 kappa max(|beta|^2, floor) u v
SparseSystem assemble_smass(const FineMesh& mesh, const ScalarField& kappa, const VectorField& beta,
                            const SFormParams& params, const Subdomain& sub);
/// int u v
SparseSystem assemble_mass(const FineMesh& mesh, const Subdomain& sub);
/// int f v
Eigen::VectorXd assemble_load(const FineMesh& mesh, const ScalarField& f, const Subdomain& sub);

/// Whole-mesh operators shared by the fine and coarse solves.
struct GlobalOperators {
  SparseMatrix stiffness;
  SparseMatrix convection;
  SparseMatrix mass;
  Eigen::VectorXd load;

  SparseMatrix operator_matrix() const { return stiffness + convection; }
};

GlobalOperators assemble_global(const FineMesh& mesh, const Coefficients& coeffs);

struct FineSolution {
  Eigen::VectorXd u;
  /// solve_residual of the reduced system.
  double residual = 0.0;
};

/// Solve A u = F with u fixed to `values` on flagged nodes.
FineSolution solve_dirichlet(const SparseMatrix& a, const Eigen::VectorXd& rhs, const std::vector<char>& fixed,
                             const Eigen::VectorXd& values);

/// Standard P1 Galerkin solution with u = 0 on the outer boundary.
FineSolution fine_solve(const FineMesh& mesh, const Coefficients& coeffs);
FineSolution fine_solve(const FineMesh& mesh, const GlobalOperators& ops);
/// Same with nonzero boundary data (entries at interior nodes are ignored).
FineSolution fine_solve(const FineMesh& mesh, const GlobalOperators& ops, const Eigen::VectorXd& boundary_values);

std::vector<char> boundary_mask(const FineMesh& mesh);

}  // namespace cemms

#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "cemms/coefficients.hpp"
#include "cemms/linalg.hpp"
#include "cemms/mesh.hpp"
#include "cemms/spectral.hpp"

namespace cemms {

/// How the local saddle-point system is solved.
enum class SaddleMethod {
  /// Cell interiors are eliminated first; the reduced system on the cell
  /// skeleton and the multipliers is factorized once per center.
  condensed,
  /// One sparse LU of the full [[A, S^T], [S, 0]] system.
  monolithic,
};

/// All basis functions of one center cell, stored on the node box of its
/// oversampling domain. Row r of `values` is the box-local node
/// (iy - iy0) * width + (ix - ix0); entries on the box boundary and on the
/// outer boundary are zero.
struct BasisBlock {
  Index center = 0;
  Index layers = 0;
  NodeBox box;
  Eigen::MatrixXd values;
  /// Lagrange multipliers: rows p * count + j' for the p-th domain cell.
  Eigen::MatrixXd multipliers;
  /// ||psi_j||_a per column.
  Eigen::VectorXd energies;
  /// Worst relative residual of the full local saddle system, both blocks.
  double residual = 0.0;
};

class MultiscaleSpace {
 public:
  MultiscaleSpace() = default;
  MultiscaleSpace(const FineMesh& mesh, Index count, Index layers, std::vector<BasisBlock> blocks);

  Index count() const { return count_; }
  Index layers() const { return layers_; }
  Index num_nodes() const { return num_nodes_; }
  Index num_columns() const { return static_cast<Index>(blocks_.size()) * count_; }
  const std::vector<BasisBlock>& blocks() const { return blocks_; }
  const BasisBlock& block(Index center) const { return blocks_[static_cast<std::size_t>(center)]; }

  /// Column numbering: center * count + j.
  Index column_index(Index center, Index j) const { return center * count_ + j; }
  std::pair<Index, Index> label(Index column) const { return {column / count_, column % count_}; }

  /// One basis function extended by zero to every fine node.
  Eigen::VectorXd column(Index column) const;
  /// sum_k coef(k) * column(k)
  Eigen::VectorXd combine(const Eigen::VectorXd& coef) const;
  /// Fine-node x column matrix R.
  SparseMatrix basis_matrix() const;
  Eigen::VectorXd energies() const;

  /// Global id of a box-local row.
  Index global_node(const NodeBox& box, Index row) const {
    return (box.iy0 + row / box.width()) * row_stride_ + box.ix0 + row % box.width();
  }
  Index row_stride() const { return row_stride_; }

 private:
  Index count_ = 0;
  Index layers_ = 0;
  Index num_nodes_ = 0;
  Index row_stride_ = 0;
  std::vector<BasisBlock> blocks_;
};

/// Static elimination of one cell's interior nodes from the local saddle
/// system. Independent of the oversampling domain the cell belongs to.
struct CellCondensation {
  Index cell = 0;
  NodeBox box;
  /// Box-local rows of interior and skeleton (cell-edge) nodes.
  std::vector<Index> interior;
  std::vector<Index> skeleton;
  /// Cell stiffness on all box nodes, box-local numbering.
  SparseMatrix stiffness;
  /// Constraint functionals s(., phi_j) on box nodes (box rows x l).
  Eigen::MatrixXd constraints;
  /// A_II^-1 [A_IG, T_I]
  Eigen::MatrixXd elimination;
  /// [[A_GG, T_G], [T_G^T, 0]] - [A_GI; T_I^T] * elimination
  Eigen::MatrixXd schur;
};

CellCondensation condense_cell(const FineMesh& mesh, const ScalarField& kappa, const CellAux& aux);

struct BasisOptions {
  SaddleMethod method = SaddleMethod::condensed;
  int threads = 0;
};

/// Solver for the constrained energy minimization on oversampling domains.
/// Holds the per-cell data shared by every domain.
class LocalBasisSolver {
 public:
  LocalBasisSolver(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa, const AuxiliarySpace& aux,
                   const BasisOptions& opts = {});

  /// Every basis function of the domain's center cell.
  BasisBlock solve(const OversampleDomain& domain) const;

 private:
  BasisBlock solve_condensed(const OversampleDomain& domain) const;
  BasisBlock solve_monolithic(const OversampleDomain& domain) const;
  void finish(const OversampleDomain& domain, BasisBlock& block) const;

  const FineMesh& mesh_;
  const CoarseGrid& grid_;
  const ScalarField& kappa_;
  const AuxiliarySpace& aux_;
  BasisOptions opts_;
  std::vector<CellCondensation> cells_;
};

/// psi_{j,ms} of the domain's center, extended by zero to the fine mesh.
Eigen::VectorXd build_local_basis(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                                  const AuxiliarySpace& aux, const OversampleDomain& domain, Index j,
                                  const BasisOptions& opts = {});

/// Every basis function on domains of `layers` coarse layers.
MultiscaleSpace build_space(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                            const AuxiliarySpace& aux, Index layers, const BasisOptions& opts = {});

/// Squared a-energy of one column restricted to each ring of cells at layer
/// distance k = 0, 1, ... from its center.
std::vector<double> decay_profile(const MultiscaleSpace& space, const FineMesh& mesh, const CoarseGrid& grid,
                                  const ScalarField& kappa, Index column);

/// Same, for column j of a single block.
std::vector<double> decay_profile(const BasisBlock& block, Index j, const FineMesh& mesh, const CoarseGrid& grid,
                                  const ScalarField& kappa);

/// Worst |s(psi, phi) - delta| over every column and every auxiliary
/// function of every cell inside its domain.
double constraint_residual(const MultiscaleSpace& space, const AuxiliarySpace& aux, const CoarseGrid& grid,
                           const FineMesh& mesh);

}  // namespace cemms

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cemms/coefficients.hpp"
#include "cemms/fem.hpp"
#include "cemms/linalg.hpp"
#include "cemms/mesh.hpp"

namespace cemms {

/// Eigenpairs of one coarse cell. Vectors live on `nodes`: the cell's fine
/// nodes minus those on the outer boundary, ascending.
struct CellAux {
  Index cell = 0;
  std::vector<Index> nodes;
  /// lambda_1 .. lambda_{l+1}, ascending.
  Eigen::VectorXd eigenvalues;
  /// phi_1 .. phi_l, s-orthonormal.
  Eigen::MatrixXd vectors;
  /// Cell s-mass matrix on `nodes`.
  SparseMatrix smass;
  /// smass * vectors: column j holds the constraint functional of phi_j.
  Eigen::MatrixXd s_images;

  Index size() const { return static_cast<Index>(nodes.size()); }
  /// Position of a global node within `nodes`, or -1.
  Index local_of(Index global) const;
};

class AuxiliarySpace {
 public:
  AuxiliarySpace() = default;
  AuxiliarySpace(std::vector<CellAux> cells, Index count, SFormParams params);

  /// Eigenfunctions kept per cell (l).
  Index count() const { return count_; }
  Index num_cells() const { return static_cast<Index>(cells_.size()); }
  const CellAux& cell(Index i) const { return cells_[static_cast<std::size_t>(i)]; }
  const std::vector<CellAux>& cells() const { return cells_; }
  const SFormParams& sform() const { return params_; }

  /// min over cells of lambda_{l+1}.
  double Lambda() const;

  /// Same eigenpairs keeping only the first `l` functions per cell.
  AuxiliarySpace truncated(Index l) const;

 private:
  std::vector<CellAux> cells_;
  Index count_ = 0;
  SFormParams params_;
};

struct AuxiliaryOptions {
  EigenOptions eigen;
  int threads = 0;
};

/// Per-cell spectral problem a_i phi = lambda s_i phi on V(K_i), which is
/// natural on interior cell edges and homogeneous Dirichlet on the outer
/// boundary.
AuxiliarySpace build_auxiliary(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                               const VectorField& beta, Index l, const AuxiliaryOptions& opts = {});

/// A function stored separately on every coarse cell. Values on shared cell
/// edges are not required to agree, which is the natural home of pi.
struct CellwiseVector {
  std::vector<Eigen::VectorXd> parts;
};

CellwiseVector restrict_to_cells(const AuxiliarySpace& aux, const Eigen::VectorXd& v);
/// sum_i sum_j s_i(v, phi_j) phi_j, cell by cell.
CellwiseVector project_pi(const AuxiliarySpace& aux, const CellwiseVector& v);
CellwiseVector project_pi(const AuxiliarySpace& aux, const Eigen::VectorXd& v);
/// sum_i s_i(u|K_i, v|K_i)
double s_inner(const AuxiliarySpace& aux, const CellwiseVector& u, const CellwiseVector& v);

/// phi_j of cell i as a cellwise vector (zero on every other cell).
CellwiseVector aux_function(const AuxiliarySpace& aux, Index cell, Index j);

}  // namespace cemms

#include "cemms/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cemms/parallel.hpp"

namespace cemms {

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

NodeBox grow(const NodeBox& b, Index max_x, Index max_y) {
  return {std::max<Index>(b.ix0 - 1, 0), std::max<Index>(b.iy0 - 1, 0), std::min(b.ix1 + 1, max_x),
          std::min(b.iy1 + 1, max_y)};
}

bool intersect(const NodeBox& a, const NodeBox& b, NodeBox& out) {
  out = {std::max(a.ix0, b.ix0), std::max(a.iy0, b.iy0), std::min(a.ix1, b.ix1), std::min(a.iy1, b.iy1)};
  return out.ix0 <= out.ix1 && out.iy0 <= out.iy1;
}

Index row_in(const NodeBox& box, Index ix, Index iy) { return (iy - box.iy0) * box.width() + (ix - box.ix0); }

void require_nonsingular(const Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>>& lu, Index n) {
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  const double biggest = n > 0 ? diag.maxCoeff() : 0.0;
  const double smallest = n > 0 ? diag.minCoeff() : 0.0;
  if (!(smallest > 1e-14 * biggest) || !std::isfinite(biggest)) {
    throw SolverError("coarse system is singular (rank-deficient basis set)", smallest / biggest);
  }
}

}  // namespace

ErrorPair compute_errors(const Eigen::VectorXd& u_ms, const Eigen::VectorXd& u_h, const SparseMatrix& mass,
                         const SparseMatrix& stiffness) {
  if (u_ms.size() != u_h.size() || mass.rows() != u_h.size() || stiffness.rows() != u_h.size()) {
    throw std::invalid_argument("compute_errors: dimension mismatch");
  }
  const Eigen::VectorXd e = u_h - u_ms;
  const double l2_ref = u_h.dot(mass * u_h);
  const double h1_ref = u_h.dot(stiffness * u_h);
  if (!(l2_ref > 0.0) || !(h1_ref > 0.0)) throw std::invalid_argument("compute_errors: reference solution is zero");
  return {std::sqrt(std::max(0.0, e.dot(mass * e)) / l2_ref), std::sqrt(std::max(0.0, e.dot(stiffness * e)) / h1_ref)};
}

ErrorPair compute_errors(const Eigen::VectorXd& u_ms, const Eigen::VectorXd& u_h, const FineMesh& mesh,
                         const ScalarField& kappa) {
  const Subdomain all = whole_mesh(mesh);
  return compute_errors(u_ms, u_h, assemble_mass(mesh, all).matrix, assemble_stiffness(mesh, kappa, all).matrix);
}

Eigen::VectorXd project_onto_space(const MultiscaleSpace& space, const Eigen::VectorXd& v) {
  if (v.size() != space.num_nodes()) throw std::invalid_argument("project_onto_space: size mismatch");
  const Index l = space.count();
  Eigen::VectorXd out(space.num_columns());
  for (Index c = 0; c < static_cast<Index>(space.blocks().size()); ++c) {
    const BasisBlock& b = space.block(c);
    Eigen::VectorXd local(b.values.rows());
    for (Index r = 0; r < local.size(); ++r) local(r) = v(space.global_node(b.box, r));
    out.segment(c * l, l) = b.values.transpose() * local;
  }
  return out;
}

CoarseSystem assemble_coarse(const MultiscaleSpace& space, const SparseMatrix& op, const Eigen::VectorXd& load,
                             int threads) {
  if (op.rows() != space.num_nodes() || load.size() != space.num_nodes()) {
    throw std::invalid_argument("assemble_coarse: operator does not match the space");
  }
  const Index l = space.count();
  const Index nblocks = static_cast<Index>(space.blocks().size());
  const Index stride = space.row_stride();
  const Index max_x = stride - 1;
  const Index max_y = space.num_nodes() / stride - 1;
  const RowMatrix rows(op);

  CoarseSystem sys;
  sys.matrix = Eigen::MatrixXd::Zero(nblocks * l, nblocks * l);
  sys.rhs = project_onto_space(space, load);

  parallel_for(nblocks, threads, [&](Index b) {
    const BasisBlock& bb = space.block(b);
    const NodeBox eb = grow(bb.box, max_x, max_y);
    // w = (K + C) psi_b on the box grown by one node (the stencil reach).
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(eb.count(), l);
    for (Index r = 0; r < eb.count(); ++r) {
      const Index g = (eb.iy0 + r / eb.width()) * stride + eb.ix0 + r % eb.width();
      for (RowMatrix::InnerIterator it(rows, g); it; ++it) {
        const Index k = it.col();
        const Index kx = k % stride;
        const Index ky = k / stride;
        if (bb.box.contains(kx, ky)) w.row(r) += it.value() * bb.values.row(row_in(bb.box, kx, ky));
      }
    }
    for (Index a = 0; a < nblocks; ++a) {
      const BasisBlock& ba = space.block(a);
      NodeBox common;
      if (!intersect(ba.box, eb, common)) continue;
      auto target = sys.matrix.block(a * l, b * l, l, l);
      const Index len = common.width();
      for (Index iy = common.iy0; iy <= common.iy1; ++iy) {
        const Index sa = row_in(ba.box, common.ix0, iy);
        const Index sb = row_in(eb, common.ix0, iy);
        target.noalias() += ba.values.middleRows(sa, len).transpose() * w.middleRows(sb, len);
      }
    }
  });
  return sys;
}

MsSolution solve_ms(const MultiscaleSpace& space, const GlobalOperators& ops, int threads) {
  const SparseMatrix op = ops.operator_matrix();
  CoarseSystem sys = assemble_coarse(space, op, ops.load, threads);
  const Index n = sys.matrix.rows();
  MsSolution sol;
  {
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(sys.matrix);
    require_nonsingular(lu, n);
    sol.coefficients = lu.solve(sys.rhs);
  }
  sys.matrix.resize(0, 0);
  sol.u_ms = space.combine(sol.coefficients);
  const Eigen::VectorXd r = project_onto_space(space, Eigen::VectorXd(op * sol.u_ms - ops.load));
  const double nb = sys.rhs.norm();
  sol.galerkin_residual = nb > 0.0 ? r.norm() / nb : r.norm();
  return sol;
}

MsSolution solve_ms(const MultiscaleSpace& space, const FineMesh& mesh, const Coefficients& coeffs, int threads) {
  return solve_ms(space, assemble_global(mesh, coeffs), threads);
}

MsSolution solve_galerkin(const SparseMatrix& basis, const GlobalOperators& ops) {
  const SparseMatrix op = ops.operator_matrix();
  if (basis.rows() != op.rows()) throw std::invalid_argument("solve_galerkin: basis does not match the operator");
  Eigen::MatrixXd g = Eigen::MatrixXd(basis.transpose() * op * basis);
  const Eigen::VectorXd rhs = basis.transpose() * ops.load;
  MsSolution sol;
  {
    Eigen::PartialPivLU<Eigen::Ref<Eigen::MatrixXd>> lu(g);
    require_nonsingular(lu, g.rows());
    sol.coefficients = lu.solve(rhs);
  }
  sol.u_ms = basis * sol.coefficients;
  const Eigen::VectorXd r = basis.transpose() * (op * sol.u_ms - ops.load);
  const double nb = rhs.norm();
  sol.galerkin_residual = nb > 0.0 ? r.norm() / nb : r.norm();
  return sol;
}

}  // namespace cemms

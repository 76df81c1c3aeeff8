#include "cemms/basis.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cemms/fem.hpp"
#include "cemms/parallel.hpp"

namespace cemms {

namespace {

constexpr double kSaddleTolerance = 1e-10;

Index box_row(const FineMesh& mesh, const NodeBox& box, Index global) {
  const auto [ix, iy] = mesh.node_coords(global);
  return (iy - box.iy0) * box.width() + (ix - box.ix0);
}

// Rows of `inner` (a sub-box) expressed as rows of `outer`.
std::vector<Index> sub_box_rows(const NodeBox& inner, const NodeBox& outer) {
  std::vector<Index> rows(static_cast<std::size_t>(inner.count()));
  for (Index r = 0; r < inner.count(); ++r) {
    const Index ix = inner.ix0 + r % inner.width();
    const Index iy = inner.iy0 + r / inner.width();
    rows[static_cast<std::size_t>(r)] = (iy - outer.iy0) * outer.width() + (ix - outer.ix0);
  }
  return rows;
}

double column_residual(const SparseMatrix& a, const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd r = a * x - b;
  double worst = 0.0;
  for (Index j = 0; j < b.cols(); ++j) {
    const double nb = b.col(j).norm();
    worst = std::max(worst, nb > 0.0 ? r.col(j).norm() / nb : r.col(j).norm());
  }
  return worst;
}

Eigen::MatrixXd solve_checked(const SparseMatrix& a, const Eigen::MatrixXd& b) {
  SparseLu lu(a);
  Eigen::MatrixXd x = lu.solve(b);
  double res = column_residual(a, x, b);
  for (int step = 0; step < 2 && !(res <= kSaddleTolerance); ++step) {
    x += lu.solve(Eigen::MatrixXd(b - a * x));
    res = column_residual(a, x, b);
  }
  if (!(res <= kSaddleTolerance)) throw SolverError("local saddle-point solve did not converge", res);
  return x;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& v, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), v.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = v.row(rows[k]);
  return out;
}

}  // namespace

MultiscaleSpace::MultiscaleSpace(const FineMesh& mesh, Index count, Index layers, std::vector<BasisBlock> blocks)
    : count_(count),
      layers_(layers),
      num_nodes_(mesh.num_nodes()),
      row_stride_(mesh.squares_x() + 1),
      blocks_(std::move(blocks)) {}

Eigen::VectorXd MultiscaleSpace::column(Index col) const {
  if (col < 0 || col >= num_columns()) throw std::out_of_range("MultiscaleSpace::column: index out of range");
  const auto [center, j] = label(col);
  const BasisBlock& b = block(center);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_nodes_);
  for (Index r = 0; r < b.values.rows(); ++r) out(global_node(b.box, r)) = b.values(r, j);
  return out;
}

Eigen::VectorXd MultiscaleSpace::combine(const Eigen::VectorXd& coef) const {
  if (coef.size() != num_columns()) throw std::invalid_argument("MultiscaleSpace::combine: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_nodes_);
  for (Index c = 0; c < static_cast<Index>(blocks_.size()); ++c) {
    const BasisBlock& b = blocks_[static_cast<std::size_t>(c)];
    const Eigen::VectorXd local = b.values * coef.segment(c * count_, count_);
    for (Index r = 0; r < local.size(); ++r) out(global_node(b.box, r)) += local(r);
  }
  return out;
}

SparseMatrix MultiscaleSpace::basis_matrix() const {
  std::vector<Triplet> trips;
  for (Index c = 0; c < static_cast<Index>(blocks_.size()); ++c) {
    const BasisBlock& b = blocks_[static_cast<std::size_t>(c)];
    for (Index j = 0; j < b.values.cols(); ++j) {
      for (Index r = 0; r < b.values.rows(); ++r) {
        if (b.values(r, j) != 0.0) {
          trips.emplace_back(static_cast<int>(global_node(b.box, r)), static_cast<int>(column_index(c, j)),
                             b.values(r, j));
        }
      }
    }
  }
  SparseMatrix r(num_nodes_, num_columns());
  r.setFromTriplets(trips.begin(), trips.end());
  return r;
}

Eigen::VectorXd MultiscaleSpace::energies() const {
  Eigen::VectorXd out(num_columns());
  for (Index c = 0; c < static_cast<Index>(blocks_.size()); ++c) out.segment(c * count_, count_) = block(c).energies;
  return out;
}

CellCondensation condense_cell(const FineMesh& mesh, const ScalarField& kappa, const CellAux& aux) {
  CellCondensation cc;
  cc.cell = aux.cell;
  cc.box = mesh.cell_box(aux.cell);
  const Index n = cc.box.count();
  const Index w = cc.box.width();
  const Index h = cc.box.height();
  const Index l = aux.vectors.cols();

  cc.stiffness = assemble_stiffness(mesh, kappa, cell_subdomain(mesh, aux.cell)).matrix;
  cc.constraints = Eigen::MatrixXd::Zero(n, l);
  for (Index k = 0; k < aux.size(); ++k) {
    cc.constraints.row(box_row(mesh, cc.box, aux.nodes[static_cast<std::size_t>(k)])) = aux.s_images.row(k);
  }

  // Position of each box row within the interior or skeleton list.
  std::vector<Index> slot(static_cast<std::size_t>(n));
  std::vector<char> is_interior(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    const Index x = r % w;
    const Index y = r / w;
    const bool interior = x > 0 && x < w - 1 && y > 0 && y < h - 1;
    is_interior[static_cast<std::size_t>(r)] = interior ? 1 : 0;
    auto& list = interior ? cc.interior : cc.skeleton;
    slot[static_cast<std::size_t>(r)] = static_cast<Index>(list.size());
    list.push_back(r);
  }
  const Index ni = static_cast<Index>(cc.interior.size());
  const Index ng = static_cast<Index>(cc.skeleton.size());

  Eigen::MatrixXd q0 = Eigen::MatrixXd::Zero(ng + l, ng + l);
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(ni, ng + l);
  std::vector<Triplet> aii;
  for (Index col = 0; col < cc.stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(cc.stiffness, col); it; ++it) {
      const Index r = it.row();
      const Index sr = slot[static_cast<std::size_t>(r)];
      const Index sc = slot[static_cast<std::size_t>(col)];
      const bool ri = is_interior[static_cast<std::size_t>(r)];
      const bool ci = is_interior[static_cast<std::size_t>(col)];
      if (ri && ci) {
        aii.emplace_back(static_cast<int>(sr), static_cast<int>(sc), it.value());
      } else if (ri) {
        coupling(sr, sc) = it.value();
      } else if (!ci) {
        q0(sr, sc) = it.value();
      }
    }
  }
  for (Index k = 0; k < ni; ++k) coupling.row(k).tail(l) = cc.constraints.row(cc.interior[static_cast<std::size_t>(k)]);
  for (Index k = 0; k < ng; ++k) {
    const auto t = cc.constraints.row(cc.skeleton[static_cast<std::size_t>(k)]);
    q0.block(k, ng, 1, l) = t;
    q0.block(ng, k, l, 1) = t.transpose();
  }

  if (ni > 0) {
    SparseMatrix a_ii(ni, ni);
    a_ii.setFromTriplets(aii.begin(), aii.end());
    Eigen::SimplicialLLT<SparseMatrix> chol(a_ii);
    if (chol.info() != Eigen::Success) {
      throw SolverError("cell " + std::to_string(aux.cell) + ": interior stiffness is not positive definite", 0.0);
    }
    cc.elimination = chol.solve(coupling);
    cc.schur = q0 - coupling.transpose() * cc.elimination;
    cc.schur = 0.5 * (cc.schur + cc.schur.transpose()).eval();
  } else {
    cc.elimination.resize(0, ng + l);
    cc.schur = q0;
  }
  return cc;
}

LocalBasisSolver::LocalBasisSolver(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                                   const AuxiliarySpace& aux, const BasisOptions& opts)
    : mesh_(mesh), grid_(grid), kappa_(kappa), aux_(aux), opts_(opts) {
  if (aux.num_cells() != grid.num_cells()) throw std::invalid_argument("LocalBasisSolver: aux/grid mismatch");
  cells_.resize(static_cast<std::size_t>(grid.num_cells()));
  parallel_for(grid.num_cells(), opts.threads,
               [&](Index c) { cells_[static_cast<std::size_t>(c)] = condense_cell(mesh, kappa, aux.cell(c)); });
}

BasisBlock LocalBasisSolver::solve(const OversampleDomain& domain) const {
  return opts_.method == SaddleMethod::condensed ? solve_condensed(domain) : solve_monolithic(domain);
}

BasisBlock LocalBasisSolver::solve_condensed(const OversampleDomain& domain) const {
  const NodeBox& dbox = domain.box();
  const Index l = aux_.count();
  const auto& dcells = domain.cells();
  const Index ncells = static_cast<Index>(dcells.size());

  std::vector<std::vector<Index>> rows(dcells.size());
  std::vector<Index> reduced(static_cast<std::size_t>(dbox.count()), -1);
  std::vector<char> on_skeleton(static_cast<std::size_t>(dbox.count()), 0);
  for (Index p = 0; p < ncells; ++p) {
    const CellCondensation& cc = cells_[static_cast<std::size_t>(dcells[static_cast<std::size_t>(p)])];
    rows[static_cast<std::size_t>(p)] = sub_box_rows(cc.box, dbox);
    for (Index r : cc.skeleton) on_skeleton[static_cast<std::size_t>(rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)])] = 1;
  }
  Index ns = 0;
  for (Index r = 0; r < dbox.count(); ++r) {
    if (on_skeleton[static_cast<std::size_t>(r)] && !domain.on_local_boundary(r)) reduced[static_cast<std::size_t>(r)] = ns++;
  }
  const Index total = ns + ncells * l;

  std::vector<std::vector<Index>> maps(dcells.size());
  std::vector<Triplet> trips;
  Index center_pos = -1;
  for (Index p = 0; p < ncells; ++p) {
    const Index cell = dcells[static_cast<std::size_t>(p)];
    if (cell == domain.center()) center_pos = p;
    const CellCondensation& cc = cells_[static_cast<std::size_t>(cell)];
    auto& map = maps[static_cast<std::size_t>(p)];
    map.reserve(cc.skeleton.size() + static_cast<std::size_t>(l));
    for (Index r : cc.skeleton) map.push_back(reduced[static_cast<std::size_t>(rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)])]);
    for (Index j = 0; j < l; ++j) map.push_back(ns + p * l + j);
    const Index m = static_cast<Index>(map.size());
    for (Index b = 0; b < m; ++b) {
      const Index gb = map[static_cast<std::size_t>(b)];
      if (gb < 0) continue;
      for (Index a = 0; a < m; ++a) {
        const Index ga = map[static_cast<std::size_t>(a)];
        if (ga >= 0 && cc.schur(a, b) != 0.0) trips.emplace_back(static_cast<int>(ga), static_cast<int>(gb), cc.schur(a, b));
      }
    }
  }
  SparseMatrix k(total, total);
  k.setFromTriplets(trips.begin(), trips.end());
  k.makeCompressed();

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(total, l);
  for (Index j = 0; j < l; ++j) rhs(ns + center_pos * l + j, j) = 1.0;
  const Eigen::MatrixXd x = solve_checked(k, rhs);

  BasisBlock block;
  block.center = domain.center();
  block.layers = domain.layers();
  block.box = dbox;
  block.values = Eigen::MatrixXd::Zero(dbox.count(), l);
  for (Index r = 0; r < dbox.count(); ++r) {
    const Index s = reduced[static_cast<std::size_t>(r)];
    if (s >= 0) block.values.row(r) = x.row(s);
  }
  for (Index p = 0; p < ncells; ++p) {
    const CellCondensation& cc = cells_[static_cast<std::size_t>(dcells[static_cast<std::size_t>(p)])];
    if (cc.interior.empty()) continue;
    const auto& map = maps[static_cast<std::size_t>(p)];
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Index>(map.size()), l);
    for (std::size_t a = 0; a < map.size(); ++a) {
      if (map[a] >= 0) y.row(static_cast<Index>(a)) = x.row(map[a]);
    }
    const Eigen::MatrixXd xi = -cc.elimination * y;
    const auto& prow = rows[static_cast<std::size_t>(p)];
    for (std::size_t k2 = 0; k2 < cc.interior.size(); ++k2) {
      block.values.row(prow[static_cast<std::size_t>(cc.interior[k2])]) = xi.row(static_cast<Index>(k2));
    }
  }
  block.multipliers = x.bottomRows(ncells * l);
  finish(domain, block);
  return block;
}

BasisBlock LocalBasisSolver::solve_monolithic(const OversampleDomain& domain) const {
  const NodeBox& dbox = domain.box();
  const Index l = aux_.count();
  const auto& dcells = domain.cells();
  const Index ncells = static_cast<Index>(dcells.size());

  const SparseSystem a = assemble_stiffness(mesh_, kappa_, subdomain_of(mesh_, domain));
  std::vector<Index> free_index(static_cast<std::size_t>(dbox.count()), -1);
  Index nfree = 0;
  for (Index r = 0; r < dbox.count(); ++r) {
    if (!domain.on_local_boundary(r)) free_index[static_cast<std::size_t>(r)] = nfree++;
  }
  const Index total = nfree + ncells * l;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.matrix.nonZeros()));
  for (Index col = 0; col < a.matrix.outerSize(); ++col) {
    const Index fc = free_index[static_cast<std::size_t>(col)];
    if (fc < 0) continue;
    for (SparseMatrix::InnerIterator it(a.matrix, col); it; ++it) {
      const Index fr = free_index[static_cast<std::size_t>(it.row())];
      if (fr >= 0) trips.emplace_back(static_cast<int>(fr), static_cast<int>(fc), it.value());
    }
  }
  Index center_pos = -1;
  for (Index p = 0; p < ncells; ++p) {
    const Index cell = dcells[static_cast<std::size_t>(p)];
    if (cell == domain.center()) center_pos = p;
    const CellAux& ca = aux_.cell(cell);
    for (Index k = 0; k < ca.size(); ++k) {
      const Index fr = free_index[static_cast<std::size_t>(box_row(mesh_, dbox, ca.nodes[static_cast<std::size_t>(k)]))];
      if (fr < 0) continue;
      for (Index j = 0; j < l; ++j) {
        const double v = ca.s_images(k, j);
        const int m = static_cast<int>(nfree + p * l + j);
        trips.emplace_back(m, static_cast<int>(fr), v);
        trips.emplace_back(static_cast<int>(fr), m, v);
      }
    }
  }
  SparseMatrix k(total, total);
  k.setFromTriplets(trips.begin(), trips.end());
  k.makeCompressed();

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(total, l);
  for (Index j = 0; j < l; ++j) rhs(nfree + center_pos * l + j, j) = 1.0;
  const Eigen::MatrixXd x = solve_checked(k, rhs);

  BasisBlock block;
  block.center = domain.center();
  block.layers = domain.layers();
  block.box = dbox;
  block.values = Eigen::MatrixXd::Zero(dbox.count(), l);
  for (Index r = 0; r < dbox.count(); ++r) {
    const Index f = free_index[static_cast<std::size_t>(r)];
    if (f >= 0) block.values.row(r) = x.row(f);
  }
  block.multipliers = x.bottomRows(ncells * l);
  finish(domain, block);
  return block;
}

void LocalBasisSolver::finish(const OversampleDomain& domain, BasisBlock& block) const {
  // Both blocks of the full saddle system, recovered cell by cell.
  const Index l = aux_.count();
  const auto& dcells = domain.cells();
  Eigen::MatrixXd apsi = Eigen::MatrixXd::Zero(block.values.rows(), l);
  Eigen::MatrixXd smu = Eigen::MatrixXd::Zero(block.values.rows(), l);
  Eigen::VectorXd energy_sq = Eigen::VectorXd::Zero(l);
  double feasibility = 0.0;
  for (std::size_t p = 0; p < dcells.size(); ++p) {
    const CellCondensation& cc = cells_[static_cast<std::size_t>(dcells[p])];
    const std::vector<Index> rows = sub_box_rows(cc.box, block.box);
    const Eigen::MatrixXd psi = gather_rows(block.values, rows);
    const Eigen::MatrixXd ap = cc.stiffness * psi;
    const Eigen::MatrixXd tm = cc.constraints * block.multipliers.middleRows(static_cast<Index>(p) * l, l);
    energy_sq += (psi.array() * ap.array()).colwise().sum().matrix().transpose();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      apsi.row(rows[k]) += ap.row(static_cast<Index>(k));
      smu.row(rows[k]) += tm.row(static_cast<Index>(k));
    }
    Eigen::MatrixXd s = cc.constraints.transpose() * psi;
    if (dcells[p] == domain.center()) s -= Eigen::MatrixXd::Identity(l, l);
    feasibility = std::max(feasibility, s.norm());
  }
  double optimality = 0.0;
  for (Index j = 0; j < l; ++j) {
    double r2 = 0.0;
    for (Index r = 0; r < block.values.rows(); ++r) {
      if (!domain.on_local_boundary(r)) r2 += std::pow(apsi(r, j) + smu(r, j), 2);
    }
    const double scale = std::max(apsi.col(j).norm(), smu.col(j).norm());
    optimality = std::max(optimality, scale > 0.0 ? std::sqrt(r2) / scale : std::sqrt(r2));
  }
  block.energies = energy_sq.cwiseMax(0.0).cwiseSqrt();
  block.residual = std::max(optimality, feasibility);
}

Eigen::VectorXd build_local_basis(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                                  const AuxiliarySpace& aux, const OversampleDomain& domain, Index j,
                                  const BasisOptions& opts) {
  if (j < 0 || j >= aux.count()) throw std::out_of_range("build_local_basis: eigenfunction index out of range");
  const LocalBasisSolver solver(mesh, grid, kappa, aux, opts);
  const BasisBlock block = solver.solve(domain);
  const MultiscaleSpace one(mesh, aux.count(), domain.layers(), {block});
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (Index r = 0; r < block.values.rows(); ++r) out(one.global_node(block.box, r)) = block.values(r, j);
  return out;
}

MultiscaleSpace build_space(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                            const AuxiliarySpace& aux, Index layers, const BasisOptions& opts) {
  if (layers < 0) throw std::invalid_argument("build_space: layer count must be >= 0");
  const LocalBasisSolver solver(mesh, grid, kappa, aux, opts);
  std::vector<BasisBlock> blocks(static_cast<std::size_t>(grid.num_cells()));
  parallel_for(grid.num_cells(), opts.threads, [&](Index i) {
    blocks[static_cast<std::size_t>(i)] = solver.solve(OversampleDomain(grid, mesh, i, layers));
  });
  return MultiscaleSpace(mesh, aux.count(), layers, std::move(blocks));
}

std::vector<double> decay_profile(const BasisBlock& block, Index j, const FineMesh& mesh, const CoarseGrid& grid,
                                  const ScalarField& kappa) {
  if (j < 0 || j >= block.values.cols()) throw std::out_of_range("decay_profile: column out of range");
  const OversampleDomain domain(grid, mesh, block.center, block.layers);
  std::vector<double> rings;
  for (Index cell : domain.cells()) {
    const Index d = grid.layer_distance(block.center, cell);
    if (static_cast<Index>(rings.size()) <= d) rings.resize(static_cast<std::size_t>(d + 1), 0.0);
    const SparseMatrix a = assemble_stiffness(mesh, kappa, cell_subdomain(mesh, cell)).matrix;
    const std::vector<Index> rows = sub_box_rows(mesh.cell_box(cell), block.box);
    Eigen::VectorXd psi(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) psi(static_cast<Index>(k)) = block.values(rows[k], j);
    rings[static_cast<std::size_t>(d)] += psi.dot(a * psi);
  }
  return rings;
}

std::vector<double> decay_profile(const MultiscaleSpace& space, const FineMesh& mesh, const CoarseGrid& grid,
                                  const ScalarField& kappa, Index column) {
  if (column < 0 || column >= space.num_columns()) throw std::out_of_range("decay_profile: column out of range");
  const auto [center, j] = space.label(column);
  return decay_profile(space.block(center), j, mesh, grid, kappa);
}

double constraint_residual(const MultiscaleSpace& space, const AuxiliarySpace& aux, const CoarseGrid& grid,
                           const FineMesh& mesh) {
  double worst = 0.0;
  for (const BasisBlock& b : space.blocks()) {
    const OversampleDomain domain(grid, mesh, b.center, b.layers);
    for (Index cell : domain.cells()) {
      const CellAux& ca = aux.cell(cell);
      Eigen::MatrixXd psi(ca.size(), b.values.cols());
      for (Index k = 0; k < ca.size(); ++k) {
        psi.row(k) = b.values.row(box_row(mesh, b.box, ca.nodes[static_cast<std::size_t>(k)]));
      }
      Eigen::MatrixXd s = ca.s_images.transpose() * psi;
      if (cell == b.center) s -= Eigen::MatrixXd::Identity(s.rows(), s.cols());
      worst = std::max(worst, s.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace cemms

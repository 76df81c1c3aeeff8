#include <gtest/gtest.h>

#include "cemms/basis.hpp"
#include "cemms/fem.hpp"
#include "oracles.hpp"

using namespace cemms;

namespace {

struct Problem {
  Hierarchy h;
  ScalarField kappa;
  AuxiliarySpace aux;
  SparseMatrix stiffness;
};

Problem make(Index n, Index nf, Index l, ScalarField kappa = ScalarField::constant(1.0),
             const VectorField& beta = library::cellular_velocity()) {
  auto h = build_hierarchy(n, n, nf);
  auto aux = build_auxiliary(h.mesh, h.grid, kappa, beta, l);
  auto k = assemble_stiffness(h.mesh, kappa, whole_mesh(h.mesh)).matrix;
  return {std::move(h), std::move(kappa), std::move(aux), std::move(k)};
}

// Minimizer of the energy over functions vanishing off the domain interior,
// subject to the full set of s-orthogonality constraints, by dense null-space QP.
Eigen::VectorXd qp_oracle(const Problem& p, const OversampleDomain& d, Index j) {
  std::vector<Index> free;
  for (Index k = 0; k < d.num_nodes(); ++k) {
    if (!d.on_local_boundary(k)) free.push_back(d.global_index(k));
  }
  const Index n = static_cast<Index>(free.size());
  std::vector<Index> where(static_cast<std::size_t>(p.h.mesh.num_nodes()), -1);
  for (Index k = 0; k < n; ++k) where[static_cast<std::size_t>(free[k])] = k;
  const Eigen::MatrixXd kd(p.stiffness);
  Eigen::MatrixXd a(n, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) a(r, c) = kd(free[r], free[c]);
  }
  const Index l = p.aux.count();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Index>(d.cells().size()) * l, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(c.rows());
  for (std::size_t q = 0; q < d.cells().size(); ++q) {
    const CellAux& ca = p.aux.cell(d.cells()[q]);
    for (Index jj = 0; jj < l; ++jj) {
      const Index row = static_cast<Index>(q) * l + jj;
      for (Index k = 0; k < ca.size(); ++k) {
        const Index w = where[static_cast<std::size_t>(ca.nodes[static_cast<std::size_t>(k)])];
        if (w >= 0) c(row, w) = ca.s_images(k, jj);
      }
      if (d.cells()[q] == d.center() && jj == j) rhs(row) = 1.0;
    }
  }
  const Eigen::VectorXd x = oracle::constrained_minimizer(a, c, rhs);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.h.mesh.num_nodes());
  for (Index k = 0; k < n; ++k) out(free[k]) = x(k);
  return out;
}

double energy(const Problem& p, const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, v.dot(p.stiffness * v))); }

}  // namespace

TEST(LocalBasis, SingleCellGridMatchesQpOracle) {
  const auto p = make(1, 5, 3);
  const OversampleDomain d = oversample(p.h.grid, p.h.mesh, 0, 0);
  for (Index j = 0; j < 3; ++j) {
    const Eigen::VectorXd psi = build_local_basis(p.h.mesh, p.h.grid, p.kappa, p.aux, d, j);
    const Eigen::VectorXd ref = qp_oracle(p, d, j);
    EXPECT_NEAR(energy(p, psi) * energy(p, psi), energy(p, ref) * energy(p, ref),
                1e-8 * std::max(1.0, energy(p, ref) * energy(p, ref)));
    EXPECT_LE((psi - ref).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  }
}

TEST(LocalBasis, InteriorPatchMatchesQpOracle) {
  const auto p = make(3, 3, 2, ScalarField::constant(1.0 / 200), library::sheared_velocity());
  const OversampleDomain d = oversample(p.h.grid, p.h.mesh, p.h.grid.cell_id(1, 1), 1);
  Index dofs = 0;
  for (Index k = 0; k < d.num_nodes(); ++k) dofs += d.on_local_boundary(k) ? 0 : 1;
  ASSERT_LE(dofs, 100);
  for (Index j = 0; j < 2; ++j) {
    const Eigen::VectorXd psi = build_local_basis(p.h.mesh, p.h.grid, p.kappa, p.aux, d, j);
    const Eigen::VectorXd ref = qp_oracle(p, d, j);
    const double e = energy(p, ref) * energy(p, ref);
    EXPECT_NEAR(energy(p, psi) * energy(p, psi), e, 1e-8 * std::max(1.0, e));
  }
}

TEST(LocalBasis, CondensedAndMonolithicSolvesAgree) {
  const auto p = make(4, 4, 3);
  BasisOptions mono;
  mono.method = SaddleMethod::monolithic;
  for (Index center : {Index{0}, Index{5}, Index{15}}) {
    const OversampleDomain d = oversample(p.h.grid, p.h.mesh, center, 1);
    const LocalBasisSolver a(p.h.mesh, p.h.grid, p.kappa, p.aux);
    const LocalBasisSolver b(p.h.mesh, p.h.grid, p.kappa, p.aux, mono);
    const BasisBlock x = a.solve(d);
    const BasisBlock y = b.solve(d);
    EXPECT_LE((x.values - y.values).cwiseAbs().maxCoeff(), 1e-8 * x.values.cwiseAbs().maxCoeff());
    EXPECT_LE(x.residual, 1e-10);
    EXPECT_LE(y.residual, 1e-10);
  }
}

TEST(LocalBasis, SaturatedLocalizationEqualsGlobalBasis) {
  const auto p = make(4, 4, 2);
  const Index center = p.h.grid.cell_id(1, 2);
  const Eigen::VectorXd global = qp_oracle(p, oversample(p.h.grid, p.h.mesh, center, 4), 1);
  const double norm = energy(p, global);
  double previous = std::numeric_limits<double>::infinity();
  for (Index m = 1; m <= 4; ++m) {
    const auto d = oversample(p.h.grid, p.h.mesh, center, m);
    const Eigen::VectorXd psi = build_local_basis(p.h.mesh, p.h.grid, p.kappa, p.aux, d, 1);
    const double err = energy(p, psi - global);
    EXPECT_LE(err, previous * (1 + 1e-12) + 1e-14 * norm) << "m = " << m;
    previous = err;
    if (m >= 3) EXPECT_LE(err, 1e-6 * norm) << "m = " << m;
  }
}

TEST(Space, ColumnsCountsAndLabels) {
  const auto p = make(3, 4, 2);
  const auto space = build_space(p.h.mesh, p.h.grid, p.kappa, p.aux, 1);
  EXPECT_EQ(space.num_columns(), 9 * 2);
  for (Index c = 0; c < space.num_columns(); ++c) {
    const auto [center, j] = space.label(c);
    EXPECT_EQ(space.column_index(center, j), c);
  }
  const SparseMatrix r = space.basis_matrix();
  EXPECT_EQ(r.cols(), 18);
  EXPECT_EQ(r.rows(), p.h.mesh.num_nodes());
  for (Index c = 0; c < space.num_columns(); ++c) {
    EXPECT_LE((Eigen::VectorXd(r.col(c)) - space.column(c)).cwiseAbs().maxCoeff(), 0.0);
  }
  Eigen::VectorXd coef = Eigen::VectorXd::LinSpaced(18, -1, 1);
  EXPECT_LE((space.combine(coef) - r * coef).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Space, TwoByTwoGridSingleFunctionCoversAllCells) {
  const auto p = make(2, 4, 1);
  const auto space = build_space(p.h.mesh, p.h.grid, p.kappa, p.aux, 1);
  ASSERT_EQ(space.num_columns(), 4);
  for (Index c = 0; c < 4; ++c) {
    const auto rings = decay_profile(space, p.h.mesh, p.h.grid, p.kappa, c);
    const Eigen::VectorXd col = space.column(c);
    for (Index cell = 0; cell < 4; ++cell) {
      double mx = 0.0;
      for (Index v : cell_node_set(p.h.mesh, cell)) mx = std::max(mx, std::abs(col(v)));
      EXPECT_GT(mx, 0.0) << "column " << c << " cell " << cell;
    }
    EXPECT_EQ(rings.size(), 2u);
  }
}

TEST(Space, ColumnsVanishOffDomainAndOnBoundary) {
  const auto p = make(5, 3, 2);
  const auto space = build_space(p.h.mesh, p.h.grid, p.kappa, p.aux, 1);
  for (Index c = 0; c < space.num_columns(); ++c) {
    const auto [center, j] = space.label(c);
    const auto d = oversample(p.h.grid, p.h.mesh, center, 1);
    const Eigen::VectorXd col = space.column(c);
    for (Index v = 0; v < col.size(); ++v) {
      const auto local = d.local_index(v);
      if (!local || d.on_local_boundary(*local) || p.h.mesh.on_boundary(v)) EXPECT_EQ(col(v), 0.0);
    }
  }
}

TEST(Space, DisjointSupportsAreEnergyOrthogonal) {
  const auto p = make(6, 2, 2);
  const auto space = build_space(p.h.mesh, p.h.grid, p.kappa, p.aux, 1);
  const Eigen::VectorXd a = space.column(space.column_index(0, 0));
  const Eigen::VectorXd b = space.column(space.column_index(35, 1));
  EXPECT_EQ(a.dot(p.stiffness * b), 0.0);
}

TEST(Space, ConstraintAndSaddleResiduals) {
  const auto p = make(4, 5, 3);
  for (Index m : {0, 1, 2}) {
    const auto space = build_space(p.h.mesh, p.h.grid, p.kappa, p.aux, m);
    EXPECT_LE(constraint_residual(space, p.aux, p.h.grid, p.h.mesh), 1e-8);
    for (const auto& b : space.blocks()) EXPECT_LE(b.residual, 1e-10);
  }
}

TEST(Decay, RingEnergiesSumToTotalEnergy) {
  const auto p = make(4, 3, 2);
  const auto space = build_space(p.h.mesh, p.h.grid, p.kappa, p.aux, 4);
  const Eigen::VectorXd e = space.energies();
  for (Index c = 0; c < space.num_columns(); c += 3) {
    const auto rings = decay_profile(space, p.h.mesh, p.h.grid, p.kappa, c);
    double sum = 0.0;
    for (double r : rings) sum += r;
    EXPECT_NEAR(sum, e(c) * e(c), 1e-12 * e(c) * e(c));
    const Eigen::VectorXd col = space.column(c);
    EXPECT_NEAR(sum, col.dot(p.stiffness * col), 1e-12 * sum);
  }
  EXPECT_THROW(decay_profile(space, p.h.mesh, p.h.grid, p.kappa, space.num_columns()), std::out_of_range);
}

#include "cemms/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cemms {

namespace {

// Barycentric values at the edge midpoints: row q, column node.
constexpr double kPhiAtQ[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};

double signed_double_area(const std::array<Point, 3>& p) {
  return (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
}

// Rows are grad(lambda_i).
Eigen::Matrix<double, 3, 2> barycentric_gradients(const std::array<Point, 3>& p, double two_area) {
  Eigen::Matrix<double, 3, 2> g;
  g << p[1].y - p[2].y, p[2].x - p[1].x,  //
      p[2].y - p[0].y, p[0].x - p[2].x,   //
      p[0].y - p[1].y, p[1].x - p[0].x;
  return g / two_area;
}

double checked_two_area(const std::array<Point, 3>& p) {
  const double two_area = signed_double_area(p);
  if (!(two_area > 0.0)) throw std::invalid_argument("degenerate or clockwise triangle");
  return two_area;
}

void require_nonempty(const Subdomain& sub, const char* what) {
  if (sub.triangles.empty() || sub.nodes.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty triangle subset");
  }
}

template <class Kernel>
SparseSystem assemble_with(const FineMesh& mesh, const Subdomain& sub, bool symmetric, Kernel&& kernel) {
  const Index n = static_cast<Index>(sub.nodes.size());
  std::vector<Triplet> trips;
  trips.reserve(sub.triangles.size() * 9);
  for (Index t : sub.triangles) {
    const ElementMatrix ke = kernel(t);
    const auto& tri = mesh.triangle(t);
    Index loc[3];
    for (int a = 0; a < 3; ++a) loc[a] = sub.local_of(tri[a]);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trips.emplace_back(static_cast<int>(loc[a]), static_cast<int>(loc[b]), ke(a, b));
    }
  }
  SparseSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();
  sys.dofs = sub.nodes;
  sys.symmetric = symmetric;
  return sys;
}

}  // namespace

Index Subdomain::local_of(Index global) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), global);
  if (it == nodes.end() || *it != global) return -1;
  return static_cast<Index>(it - nodes.begin());
}

Subdomain subdomain_from_triangles(const FineMesh& mesh, std::vector<Index> triangles) {
  std::sort(triangles.begin(), triangles.end());
  triangles.erase(std::unique(triangles.begin(), triangles.end()), triangles.end());
  std::vector<Index> nodes;
  nodes.reserve(triangles.size() * 3);
  for (Index t : triangles) {
    for (Index v : mesh.triangle(t)) nodes.push_back(v);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return {std::move(triangles), std::move(nodes)};
}

Subdomain whole_mesh(const FineMesh& mesh) {
  Subdomain sub;
  sub.triangles.resize(static_cast<std::size_t>(mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) sub.triangles[static_cast<std::size_t>(t)] = t;
  sub.nodes.resize(static_cast<std::size_t>(mesh.num_nodes()));
  for (Index v = 0; v < mesh.num_nodes(); ++v) sub.nodes[static_cast<std::size_t>(v)] = v;
  return sub;
}

Subdomain cell_subdomain(const FineMesh& mesh, Index cell) {
  return {mesh.cell_triangles(cell), cell_node_set(mesh, cell)};
}

Subdomain subdomain_of(const FineMesh& mesh, const OversampleDomain& domain) {
  return {domain.triangles(mesh), domain.nodes()};
}

SparseSystem SparseSystem::eliminate(const std::vector<char>& drop) const {
  if (static_cast<Index>(drop.size()) != size()) throw std::invalid_argument("eliminate: mask size mismatch");
  std::vector<Index> remap(drop.size(), -1);
  SparseSystem out;
  out.symmetric = symmetric;
  out.eliminated = eliminated;
  for (std::size_t k = 0; k < drop.size(); ++k) {
    if (drop[k]) {
      out.eliminated.push_back(dofs[k]);
    } else {
      remap[k] = static_cast<Index>(out.dofs.size());
      out.dofs.push_back(dofs[k]);
    }
  }
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(matrix.nonZeros()));
  for (Index col = 0; col < matrix.outerSize(); ++col) {
    if (remap[static_cast<std::size_t>(col)] < 0) continue;
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      const Index r = remap[static_cast<std::size_t>(it.row())];
      if (r >= 0) trips.emplace_back(static_cast<int>(r), static_cast<int>(remap[static_cast<std::size_t>(col)]), it.value());
    }
  }
  const Index n = static_cast<Index>(out.dofs.size());
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trips.begin(), trips.end());
  out.matrix.makeCompressed();
  std::sort(out.eliminated.begin(), out.eliminated.end());
  return out;
}

SFormParams make_sform_params(const CoarseGrid& grid, const FineMesh& mesh, const VectorField& beta) {
  const Range r = field_extrema(beta, mesh);
  return {grid.H(), 1e-12 * r.max * r.max};
}

ElementMatrix element_stiffness(const std::array<Point, 3>& p, const std::array<double, 3>& kappa) {
  const double two_area = checked_two_area(p);
  const auto g = barycentric_gradients(p, two_area);
  const double weight = 0.5 * two_area * (kappa[0] + kappa[1] + kappa[2]) / 3.0;
  return weight * (g * g.transpose());
}

ElementMatrix element_convection(const std::array<Point, 3>& p, const std::array<Vec2, 3>& beta) {
  const double two_area = checked_two_area(p);
  const auto g = barycentric_gradients(p, two_area);
  const double w = 0.5 * two_area / 3.0;
  ElementMatrix c = ElementMatrix::Zero();
  for (int q = 0; q < 3; ++q) {
    for (int j = 0; j < 3; ++j) {
      const double adv = beta[q].x * g(j, 0) + beta[q].y * g(j, 1);
      for (int i = 0; i < 3; ++i) c(i, j) += w * adv * kPhiAtQ[q][i];
    }
  }
  return c;
}

ElementMatrix element_mass(const std::array<Point, 3>& p, const std::array<double, 3>& weight) {
  const double two_area = checked_two_area(p);
  const double w = 0.5 * two_area / 3.0;
  ElementMatrix m = ElementMatrix::Zero();
  for (int q = 0; q < 3; ++q) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) += w * weight[q] * kPhiAtQ[q][i] * kPhiAtQ[q][j];
    }
  }
  return m;
}

Eigen::Vector3d element_load(const std::array<Point, 3>& p, const std::array<double, 3>& f) {
  const double two_area = checked_two_area(p);
  const double w = 0.5 * two_area / 3.0;
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int q = 0; q < 3; ++q) {
    for (int i = 0; i < 3; ++i) out(i) += w * f[q] * kPhiAtQ[q][i];
  }
  return out;
}

SparseSystem assemble_stiffness(const FineMesh& mesh, const ScalarField& kappa, const Subdomain& sub) {
  require_nonempty(sub, "assemble_stiffness");
  return assemble_with(mesh, sub, true, [&](Index t) {
    const auto qp = mesh.quadrature_points(t);
    const Point c = mesh.triangle_centroid(t);
    return element_stiffness(mesh.triangle_points(t),
                             {kappa.eval_near(qp[0], c), kappa.eval_near(qp[1], c), kappa.eval_near(qp[2], c)});
  });
}

SparseSystem assemble_convection(const FineMesh& mesh, const VectorField& beta, const Subdomain& sub) {
  require_nonempty(sub, "assemble_convection");
  return assemble_with(mesh, sub, false, [&](Index t) {
    const auto qp = mesh.quadrature_points(t);
    const Point c = mesh.triangle_centroid(t);
    return element_convection(mesh.triangle_points(t),
                              {beta.eval_near(qp[0], c), beta.eval_near(qp[1], c), beta.eval_near(qp[2], c)});
  });
}

SparseSystem assemble_smass(const FineMesh& mesh, const ScalarField& kappa, const VectorField& beta,
                            const SFormParams& params, const Subdomain& sub) {
  require_nonempty(sub, "assemble_smass");
  const double inv_h2 = 1.0 / (params.H * params.H);
  return assemble_with(mesh, sub, true, [&](Index t) {
    const auto qp = mesh.quadrature_points(t);
    const Point c = mesh.triangle_centroid(t);
    std::array<double, 3> w;
    for (int q = 0; q < 3; ++q) {
      const double b2 = std::max(norm_sq(beta.eval_near(qp[q], c)), params.beta_sq_floor);
      w[q] = inv_h2 * kappa.eval_near(qp[q], c) * b2;
    }
    return element_mass(mesh.triangle_points(t), w);
  });
}

SparseSystem assemble_mass(const FineMesh& mesh, const Subdomain& sub) {
  require_nonempty(sub, "assemble_mass");
  return assemble_with(mesh, sub, true, [&](Index t) { return element_mass(mesh.triangle_points(t), {1.0, 1.0, 1.0}); });
}

Eigen::VectorXd assemble_load(const FineMesh& mesh, const ScalarField& f, const Subdomain& sub) {
  require_nonempty(sub, "assemble_load");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(sub.nodes.size()));
  for (Index t : sub.triangles) {
    const auto qp = mesh.quadrature_points(t);
    const Point c = mesh.triangle_centroid(t);
    const Eigen::Vector3d fe = element_load(mesh.triangle_points(t),
                                            {f.eval_near(qp[0], c), f.eval_near(qp[1], c), f.eval_near(qp[2], c)});
    const auto& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a) out(sub.local_of(tri[a])) += fe(a);
  }
  return out;
}

GlobalOperators assemble_global(const FineMesh& mesh, const Coefficients& coeffs) {
  const Subdomain all = whole_mesh(mesh);
  GlobalOperators ops;
  ops.stiffness = assemble_stiffness(mesh, coeffs.kappa, all).matrix;
  ops.convection = assemble_convection(mesh, coeffs.beta, all).matrix;
  ops.mass = assemble_mass(mesh, all).matrix;
  ops.load = assemble_load(mesh, coeffs.source, all);
  return ops;
}

std::vector<char> boundary_mask(const FineMesh& mesh) {
  std::vector<char> mask(static_cast<std::size_t>(mesh.num_nodes()));
  for (Index v = 0; v < mesh.num_nodes(); ++v) mask[static_cast<std::size_t>(v)] = mesh.on_boundary(v) ? 1 : 0;
  return mask;
}

FineSolution solve_dirichlet(const SparseMatrix& a, const Eigen::VectorXd& rhs, const std::vector<char>& fixed,
                             const Eigen::VectorXd& values) {
  const Index n = a.rows();
  if (a.cols() != n || rhs.size() != n || static_cast<Index>(fixed.size()) != n || values.size() != n) {
    throw std::invalid_argument("solve_dirichlet: dimension mismatch");
  }
  std::vector<Index> remap(static_cast<std::size_t>(n), -1);
  std::vector<Index> free_dofs;
  for (Index k = 0; k < n; ++k) {
    if (!fixed[static_cast<std::size_t>(k)]) {
      remap[static_cast<std::size_t>(k)] = static_cast<Index>(free_dofs.size());
      free_dofs.push_back(k);
    }
  }
  const Index nf = static_cast<Index>(free_dofs.size());
  Eigen::VectorXd b(nf);
  for (Index r = 0; r < nf; ++r) b(r) = rhs(free_dofs[static_cast<std::size_t>(r)]);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (Index col = 0; col < a.outerSize(); ++col) {
    const Index c = remap[static_cast<std::size_t>(col)];
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const Index r = remap[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      if (c >= 0) {
        trips.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
      } else {
        b(r) -= it.value() * values(col);
      }
    }
  }
  FineSolution sol;
  sol.u = Eigen::VectorXd::Zero(n);
  for (Index k = 0; k < n; ++k) {
    if (fixed[static_cast<std::size_t>(k)]) sol.u(k) = values(k);
  }
  if (nf == 0) return sol;
  SparseMatrix reduced(nf, nf);
  reduced.setFromTriplets(trips.begin(), trips.end());
  const Eigen::VectorXd x = sparse_solve(reduced, b);
  sol.residual = solve_residual(reduced, x, b);
  for (Index r = 0; r < nf; ++r) sol.u(free_dofs[static_cast<std::size_t>(r)]) = x(r);
  return sol;
}

FineSolution fine_solve(const FineMesh& mesh, const GlobalOperators& ops) {
  return solve_dirichlet(ops.operator_matrix(), ops.load, boundary_mask(mesh), Eigen::VectorXd::Zero(mesh.num_nodes()));
}

FineSolution fine_solve(const FineMesh& mesh, const GlobalOperators& ops, const Eigen::VectorXd& boundary_values) {
  return solve_dirichlet(ops.operator_matrix(), ops.load, boundary_mask(mesh), boundary_values);
}

FineSolution fine_solve(const FineMesh& mesh, const Coefficients& coeffs) {
  require_positive(coeffs.kappa, mesh);
  return fine_solve(mesh, assemble_global(mesh, coeffs));
}

}  // namespace cemms

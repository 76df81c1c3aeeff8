#include "cemms/spectral.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "cemms/parallel.hpp"

namespace cemms {

Index CellAux::local_of(Index global) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), global);
  if (it == nodes.end() || *it != global) return -1;
  return static_cast<Index>(it - nodes.begin());
}

AuxiliarySpace::AuxiliarySpace(std::vector<CellAux> cells, Index count, SFormParams params)
    : cells_(std::move(cells)), count_(count), params_(params) {}

double AuxiliarySpace::Lambda() const {
  double lam = std::numeric_limits<double>::infinity();
  for (const auto& c : cells_) lam = std::min(lam, c.eigenvalues(count_));
  return lam;
}

AuxiliarySpace AuxiliarySpace::truncated(Index l) const {
  if (l < 1 || l > count_) {
    throw std::invalid_argument("truncated: count must be in [1, " + std::to_string(count_) + "]");
  }
  std::vector<CellAux> cells = cells_;
  for (auto& c : cells) {
    c.eigenvalues.conservativeResize(l + 1);
    c.vectors.conservativeResize(Eigen::NoChange, l);
    c.s_images.conservativeResize(Eigen::NoChange, l);
  }
  return AuxiliarySpace(std::move(cells), l, params_);
}

AuxiliarySpace build_auxiliary(const FineMesh& mesh, const CoarseGrid& grid, const ScalarField& kappa,
                               const VectorField& beta, Index l, const AuxiliaryOptions& opts) {
  if (l < 1) throw std::invalid_argument("build_auxiliary: basis count must be >= 1");
  const SFormParams params = make_sform_params(grid, mesh, beta);
  std::vector<CellAux> cells(static_cast<std::size_t>(grid.num_cells()));
  parallel_for(grid.num_cells(), opts.threads, [&](Index i) {
    const Subdomain sub = cell_subdomain(mesh, i);
    const SparseSystem a = assemble_stiffness(mesh, kappa, sub);
    const SparseSystem s = assemble_smass(mesh, kappa, beta, params, sub);
    std::vector<char> drop(sub.nodes.size());
    for (std::size_t k = 0; k < sub.nodes.size(); ++k) drop[k] = mesh.on_boundary(sub.nodes[k]) ? 1 : 0;
    const SparseSystem af = a.eliminate(drop);
    const SparseSystem sf = s.eliminate(drop);
    if (l + 1 > af.size()) {
      throw std::invalid_argument("build_auxiliary: cell " + std::to_string(i) + " has " +
                                  std::to_string(af.size()) + " free nodes, fewer than l+1 = " +
                                  std::to_string(l + 1));
    }
    EigenPairs eig = generalized_eig(af.matrix, sf.matrix, l + 1, opts.eigen);
    CellAux& c = cells[static_cast<std::size_t>(i)];
    c.cell = i;
    c.nodes = af.dofs;
    c.eigenvalues = eig.values;
    c.vectors = eig.vectors.leftCols(l);
    c.smass = sf.matrix;
    c.s_images = sf.matrix * c.vectors;
  });
  return AuxiliarySpace(std::move(cells), l, params);
}

CellwiseVector restrict_to_cells(const AuxiliarySpace& aux, const Eigen::VectorXd& v) {
  CellwiseVector out;
  out.parts.resize(static_cast<std::size_t>(aux.num_cells()));
  for (Index i = 0; i < aux.num_cells(); ++i) {
    const CellAux& c = aux.cell(i);
    Eigen::VectorXd part(c.size());
    for (Index k = 0; k < c.size(); ++k) {
      const Index g = c.nodes[static_cast<std::size_t>(k)];
      if (g < 0 || g >= v.size()) throw std::invalid_argument("restrict_to_cells: vector too short");
      part(k) = v(g);
    }
    out.parts[static_cast<std::size_t>(i)] = std::move(part);
  }
  return out;
}

CellwiseVector project_pi(const AuxiliarySpace& aux, const CellwiseVector& v) {
  if (static_cast<Index>(v.parts.size()) != aux.num_cells()) {
    throw std::invalid_argument("project_pi: cell count mismatch");
  }
  CellwiseVector out;
  out.parts.resize(v.parts.size());
  for (Index i = 0; i < aux.num_cells(); ++i) {
    const CellAux& c = aux.cell(i);
    const Eigen::VectorXd& vi = v.parts[static_cast<std::size_t>(i)];
    if (vi.size() != c.size()) throw std::invalid_argument("project_pi: part size mismatch");
    // Each phi_j has unit s-norm, so the coefficient is s_i(v, phi_j).
    const Eigen::VectorXd coef = c.s_images.transpose() * vi;
    out.parts[static_cast<std::size_t>(i)] = c.vectors * coef;
  }
  return out;
}

CellwiseVector project_pi(const AuxiliarySpace& aux, const Eigen::VectorXd& v) {
  return project_pi(aux, restrict_to_cells(aux, v));
}

double s_inner(const AuxiliarySpace& aux, const CellwiseVector& u, const CellwiseVector& v) {
  if (static_cast<Index>(u.parts.size()) != aux.num_cells() || static_cast<Index>(v.parts.size()) != aux.num_cells()) {
    throw std::invalid_argument("s_inner: cell count mismatch");
  }
  double sum = 0.0;
  for (Index i = 0; i < aux.num_cells(); ++i) {
    const auto& ui = u.parts[static_cast<std::size_t>(i)];
    const auto& vi = v.parts[static_cast<std::size_t>(i)];
    sum += ui.dot(aux.cell(i).smass * vi);
  }
  return sum;
}

CellwiseVector aux_function(const AuxiliarySpace& aux, Index cell, Index j) {
  if (cell < 0 || cell >= aux.num_cells() || j < 0 || j >= aux.count()) {
    throw std::out_of_range("aux_function: index out of range");
  }
  CellwiseVector out;
  out.parts.resize(static_cast<std::size_t>(aux.num_cells()));
  for (Index i = 0; i < aux.num_cells(); ++i) {
    out.parts[static_cast<std::size_t>(i)] = Eigen::VectorXd::Zero(aux.cell(i).size());
  }
  out.parts[static_cast<std::size_t>(cell)] = aux.cell(cell).vectors.col(j);
  return out;
}

}  // namespace cemms

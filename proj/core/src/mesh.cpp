#include "cemms/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cemms {

CoarseGrid::CoarseGrid(Index nx, Index ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("coarse grid needs at least one cell per axis, got " + std::to_string(nx) +
                                "x" + std::to_string(ny));
  }
}

double CoarseGrid::H() const { return std::max(hx(), hy()); }

Rect CoarseGrid::cell_rect(Index cell) const {
  auto [cx, cy] = cell_coords(cell);
  return {static_cast<double>(cx) * hx(), static_cast<double>(cy) * hy(), static_cast<double>(cx + 1) * hx(),
          static_cast<double>(cy + 1) * hy()};
}

Point CoarseGrid::vertex(Index v) const {
  Index vx = v % (nx_ + 1);
  Index vy = v / (nx_ + 1);
  return {static_cast<double>(vx) * hx(), static_cast<double>(vy) * hy()};
}

Index CoarseGrid::layer_distance(Index a, Index b) const {
  auto [ax, ay] = cell_coords(a);
  auto [bx, by] = cell_coords(b);
  return std::max(std::abs(ax - bx), std::abs(ay - by));
}

FineMesh::FineMesh(const CoarseGrid& grid, Index refinement)
    : cnx_(grid.nx()), cny_(grid.ny()), nf_(refinement) {
  if (refinement < 1) {
    throw std::invalid_argument("fine refinement factor must be >= 1, got " + std::to_string(refinement));
  }
  const Index sx = squares_x();
  const Index sy = squares_y();
  nodes_.reserve(static_cast<std::size_t>((sx + 1) * (sy + 1)));
  boundary_.reserve(nodes_.capacity());
  for (Index iy = 0; iy <= sy; ++iy) {
    for (Index ix = 0; ix <= sx; ++ix) {
      // Exact at the grid lines: integer ratio instead of accumulated spacing.
      nodes_.push_back({static_cast<double>(ix) / static_cast<double>(sx),
                        static_cast<double>(iy) / static_cast<double>(sy)});
      boundary_.push_back(ix == 0 || iy == 0 || ix == sx || iy == sy ? 1 : 0);
    }
  }

  triangles_.reserve(static_cast<std::size_t>(2 * sx * sy));
  tri_cell_.reserve(triangles_.capacity());
  cell_tris_.assign(static_cast<std::size_t>(grid.num_cells()), {});
  for (Index qy = 0; qy < sy; ++qy) {
    for (Index qx = 0; qx < sx; ++qx) {
      const Index a = node_id(qx, qy);
      const Index b = node_id(qx + 1, qy);
      const Index c = node_id(qx + 1, qy + 1);
      const Index d = node_id(qx, qy + 1);
      const Index cell = grid.cell_id(qx / nf_, qy / nf_);
      for (const auto& tri : {std::array<Index, 3>{a, b, c}, std::array<Index, 3>{a, c, d}}) {
        cell_tris_[static_cast<std::size_t>(cell)].push_back(static_cast<Index>(triangles_.size()));
        triangles_.push_back(tri);
        tri_cell_.push_back(cell);
      }
    }
  }
}

std::array<Point, 3> FineMesh::triangle_points(Index t) const {
  const auto& tri = triangle(t);
  return {node(tri[0]), node(tri[1]), node(tri[2])};
}

Point FineMesh::triangle_centroid(Index t) const {
  auto p = triangle_points(t);
  return {(p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0};
}

std::array<Point, 3> FineMesh::quadrature_points(Index t) const {
  auto p = triangle_points(t);
  auto mid = [](Point a, Point b) { return Point{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; };
  return {mid(p[0], p[1]), mid(p[1], p[2]), mid(p[2], p[0])};
}

double FineMesh::triangle_area(Index t) const {
  auto p = triangle_points(t);
  return 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
}

NodeBox FineMesh::cell_box(Index cell) const {
  const Index cx = cell % cnx_;
  const Index cy = cell / cnx_;
  return cells_box(cx, cy, cx, cy);
}

NodeBox FineMesh::cells_box(Index cx0, Index cy0, Index cx1, Index cy1) const {
  return {cx0 * nf_, cy0 * nf_, (cx1 + 1) * nf_, (cy1 + 1) * nf_};
}

std::vector<Index> FineMesh::box_nodes(const NodeBox& box) const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(box.count()));
  for (Index iy = box.iy0; iy <= box.iy1; ++iy) {
    for (Index ix = box.ix0; ix <= box.ix1; ++ix) out.push_back(node_id(ix, iy));
  }
  return out;
}

double FineMesh::diagonal_length() const {
  const double dx = 1.0 / static_cast<double>(squares_x());
  const double dy = 1.0 / static_cast<double>(squares_y());
  return std::hypot(dx, dy);
}

Hierarchy build_hierarchy(Index nx, Index ny, Index refinement) {
  CoarseGrid grid(nx, ny);
  FineMesh mesh(grid, refinement);
  return {std::move(grid), std::move(mesh)};
}

OversampleDomain::OversampleDomain(const CoarseGrid& grid, const FineMesh& mesh, Index center, Index layers)
    : center_(center), layers_(layers) {
  if (!grid.valid_cell(center)) throw std::invalid_argument("oversample: invalid cell id " + std::to_string(center));
  if (layers < 0) throw std::invalid_argument("oversample: layer count must be >= 0");
  auto [cx, cy] = grid.cell_coords(center);
  cx0_ = std::max<Index>(0, cx - layers);
  cy0_ = std::max<Index>(0, cy - layers);
  cx1_ = std::min<Index>(grid.nx() - 1, cx + layers);
  cy1_ = std::min<Index>(grid.ny() - 1, cy + layers);
  for (Index y = cy0_; y <= cy1_; ++y) {
    for (Index x = cx0_; x <= cx1_; ++x) cells_.push_back(grid.cell_id(x, y));
  }
  box_ = mesh.cells_box(cx0_, cy0_, cx1_, cy1_);
  row_stride_ = mesh.squares_x() + 1;
  nodes_ = mesh.box_nodes(box_);
  boundary_.resize(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    auto [ix, iy] = mesh.node_coords(nodes_[k]);
    const bool on_edge = ix == box_.ix0 || ix == box_.ix1 || iy == box_.iy0 || iy == box_.iy1;
    boundary_[k] = on_edge || mesh.on_boundary(nodes_[k]) ? 1 : 0;
  }
}

std::optional<Index> OversampleDomain::local_index(Index global) const {
  const Index ix = global % row_stride_;
  const Index iy = global / row_stride_;
  if (!box_.contains(ix, iy)) return std::nullopt;
  return (iy - box_.iy0) * box_.width() + (ix - box_.ix0);
}

bool OversampleDomain::contains_cell(Index cell) const {
  return std::binary_search(cells_.begin(), cells_.end(), cell);
}

std::vector<Index> OversampleDomain::triangles(const FineMesh& mesh) const {
  std::vector<Index> out;
  for (Index c : cells_) {
    const auto& tris = mesh.cell_triangles(c);
    out.insert(out.end(), tris.begin(), tris.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

OversampleDomain oversample(const CoarseGrid& grid, const FineMesh& mesh, Index cell, Index layers) {
  return OversampleDomain(grid, mesh, cell, layers);
}

std::vector<Index> cell_node_set(const FineMesh& mesh, Index cell) {
  if (cell < 0 || cell >= mesh.coarse_nx() * mesh.coarse_ny()) {
    throw std::invalid_argument("cell_node_set: invalid cell id " + std::to_string(cell));
  }
  return mesh.box_nodes(mesh.cell_box(cell));
}

}  // namespace cemms

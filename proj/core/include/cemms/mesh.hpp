#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace cemms {

using Index = std::ptrdiff_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0, y0, x1, y1;
  bool contains(Point p, double tol = 0.0) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
};

/// Inclusive box of fine-grid node indices.
struct NodeBox {
  Index ix0 = 0, iy0 = 0, ix1 = -1, iy1 = -1;

  Index width() const { return ix1 - ix0 + 1; }
  Index height() const { return iy1 - iy0 + 1; }
  Index count() const { return width() * height(); }
  bool contains(Index ix, Index iy) const { return ix >= ix0 && ix <= ix1 && iy >= iy0 && iy <= iy1; }
};

/// Uniform rectangular partition of the unit square. Cells are numbered
/// row by row: id = cy * nx + cx.
class CoarseGrid {
 public:
  CoarseGrid(Index nx, Index ny);

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index num_cells() const { return nx_ * ny_; }
  Index num_vertices() const { return (nx_ + 1) * (ny_ + 1); }

  double hx() const { return 1.0 / static_cast<double>(nx_); }
  double hy() const { return 1.0 / static_cast<double>(ny_); }
  /// Coarse meshsize H (the longer cell edge).
  double H() const;

  Index cell_id(Index cx, Index cy) const { return cy * nx_ + cx; }
  std::pair<Index, Index> cell_coords(Index cell) const { return {cell % nx_, cell / nx_}; }
  Rect cell_rect(Index cell) const;
  Point vertex(Index v) const;

  /// Chebyshev distance between two cells, counted in coarse layers.
  Index layer_distance(Index a, Index b) const;

  bool valid_cell(Index cell) const { return cell >= 0 && cell < num_cells(); }

 private:
  Index nx_, ny_;
};

/// Conforming triangulation of the coarse grid: every coarse cell holds
/// n_f x n_f fine squares, each split along its lower-left to upper-right
/// diagonal into two counterclockwise triangles.
class FineMesh {
 public:
  FineMesh(const CoarseGrid& grid, Index refinement);

  Index refinement() const { return nf_; }
  Index coarse_nx() const { return cnx_; }
  Index coarse_ny() const { return cny_; }
  /// Fine squares per axis.
  Index squares_x() const { return cnx_ * nf_; }
  Index squares_y() const { return cny_ * nf_; }

  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }

  const Point& node(Index n) const { return nodes_[static_cast<std::size_t>(n)]; }
  const std::array<Index, 3>& triangle(Index t) const { return triangles_[static_cast<std::size_t>(t)]; }
  std::array<Point, 3> triangle_points(Index t) const;
  Point triangle_centroid(Index t) const;
  /// Edge midpoints of triangle t: the points of the degree-2 quadrature rule.
  std::array<Point, 3> quadrature_points(Index t) const;
  double triangle_area(Index t) const;

  Index triangle_cell(Index t) const { return tri_cell_[static_cast<std::size_t>(t)]; }
  bool on_boundary(Index n) const { return boundary_[static_cast<std::size_t>(n)] != 0; }

  Index node_id(Index ix, Index iy) const { return iy * (squares_x() + 1) + ix; }
  std::pair<Index, Index> node_coords(Index n) const {
    return {n % (squares_x() + 1), n / (squares_x() + 1)};
  }

  const std::vector<Index>& cell_triangles(Index cell) const { return cell_tris_[static_cast<std::size_t>(cell)]; }
  /// Node box of one coarse cell (closure, shared edges included).
  NodeBox cell_box(Index cell) const;
  /// Node box of a rectangular block of coarse cells [cx0,cx1] x [cy0,cy1].
  NodeBox cells_box(Index cx0, Index cy0, Index cx1, Index cy1) const;
  /// Global node ids of a box in ascending order.
  std::vector<Index> box_nodes(const NodeBox& box) const;

  /// Length of the fine-square diagonal.
  double diagonal_length() const;

 private:
  Index cnx_, cny_, nf_;
  std::vector<Point> nodes_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Index> tri_cell_;
  std::vector<char> boundary_;
  std::vector<std::vector<Index>> cell_tris_;
};

struct Hierarchy {
  CoarseGrid grid;
  FineMesh mesh;
};

Hierarchy build_hierarchy(Index nx, Index ny, Index refinement);

/// Coarse cell K_i enlarged by m layers, clipped to the unit square.
class OversampleDomain {
 public:
  OversampleDomain(const CoarseGrid& grid, const FineMesh& mesh, Index center, Index layers);

  Index center() const { return center_; }
  Index layers() const { return layers_; }
  const std::vector<Index>& cells() const { return cells_; }
  const std::vector<Index>& nodes() const { return nodes_; }
  const NodeBox& box() const { return box_; }
  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }

  /// True for local nodes on the domain boundary or on the outer boundary.
  bool on_local_boundary(Index local) const { return boundary_[static_cast<std::size_t>(local)] != 0; }
  const std::vector<char>& boundary_flags() const { return boundary_; }

  Index global_index(Index local) const { return nodes_[static_cast<std::size_t>(local)]; }
  std::optional<Index> local_index(Index global) const;
  bool contains_cell(Index cell) const;

  /// Triangles of all cells in the domain.
  std::vector<Index> triangles(const FineMesh& mesh) const;

 private:
  Index center_, layers_;
  Index cx0_, cy0_, cx1_, cy1_;
  Index row_stride_;
  std::vector<Index> cells_;
  std::vector<Index> nodes_;
  std::vector<char> boundary_;
  NodeBox box_;
};

OversampleDomain oversample(const CoarseGrid& grid, const FineMesh& mesh, Index cell, Index layers);

/// All fine nodes touched by triangles of coarse cell `cell`, ascending.
std::vector<Index> cell_node_set(const FineMesh& mesh, Index cell);

}  // namespace cemms

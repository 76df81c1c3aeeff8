#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cemms/mesh.hpp"

namespace cemms {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double norm_sq(Vec2 v) { return v.x * v.x + v.y * v.y; }

/// Piecewise-constant field sampled on an nx x ny grid over the unit square.
/// Values are stored row-major with y increasing; `components` is 1 for
/// scalar rasters and 2 for vector rasters (interleaved x, y).
class Raster {
 public:
  Raster(Index nx, Index ny, int components, std::vector<double> values);

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  int components() const { return components_; }
  const std::vector<double>& values() const { return values_; }

  double at(Index ix, Index iy, int component = 0) const {
    return values_[static_cast<std::size_t>((iy * nx_ + ix) * components_ + component)];
  }
  /// Raster cell containing `p`. Points on a raster line are assigned to the
  /// cell on the side of `hint`.
  std::pair<Index, Index> locate(Point p, Point hint) const;

 private:
  Index nx_, ny_;
  int components_;
  std::vector<double> values_;
};

Raster read_raster(const std::string& path, int components);
void write_raster(const Raster& raster, const std::string& path);

/// Scalar coefficient (kappa or f): constant, closed-form, or raster.
class ScalarField {
 public:
  enum class Kind { constant, analytic, raster };

  static ScalarField constant(double value);
  static ScalarField analytic(std::function<double(Point)> fn, std::string name);
  static ScalarField raster(Raster data);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Constant value; only meaningful for Kind::constant.
  double constant_value() const { return value_; }

  /// Value at a point of the closed unit square; throws outside.
  double operator()(Point p) const { return eval(p); }
  double eval(Point p) const;
  /// Same as eval, but raster ties on cell lines resolve toward `interior`.
  double eval_near(Point p, Point interior) const;

 private:
  ScalarField() = default;
  double sample(Point p, Point hint) const;

  Kind kind_ = Kind::constant;
  std::string name_;
  double value_ = 0.0;
  std::function<double(Point)> fn_;
  std::shared_ptr<const Raster> raster_;
};

/// Velocity field beta: closed-form, curl of a stream function, or a
/// per-cell raster. The raster variant is not checked for divergence.
class VectorField {
 public:
  enum class Kind { analytic, curl, raster };

  static VectorField analytic(std::function<Vec2(Point)> fn, std::string name);
  /// beta = (db/dy, -db/dx) from the gradient of the stream function b.
  static VectorField curl(std::function<Vec2(Point)> stream_gradient, std::string name);
  static VectorField constant(Vec2 value);
  static VectorField raster(Raster data);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  Vec2 operator()(Point p) const { return eval(p); }
  Vec2 eval(Point p) const;
  Vec2 eval_near(Point p, Point interior) const;

 private:
  VectorField() = default;
  Vec2 sample(Point p, Point hint) const;

  Kind kind_ = Kind::analytic;
  std::string name_;
  std::function<Vec2(Point)> fn_;
  std::shared_ptr<const Raster> raster_;
};

struct Range {
  double min = 0.0;
  double max = 0.0;
};

/// Extrema over every quadrature point of the mesh.
Range field_extrema(const ScalarField& field, const FineMesh& mesh);
/// Extrema of |beta| over every quadrature point of the mesh.
Range field_extrema(const VectorField& field, const FineMesh& mesh);

/// Throws unless kappa is strictly positive at every quadrature point.
/// Returns the observed range.
Range require_positive(const ScalarField& kappa, const FineMesh& mesh);

/// The three coefficient fields of one problem.
struct Coefficients {
  ScalarField kappa;
  VectorField beta;
  ScalarField source;
};

namespace library {

/// kappa = 1/200, beta = (cos(18 pi y) sin(18 pi x), -cos(18 pi x) sin(18 pi y)), f = 1.
Coefficients example1();
/// kappa = 1, beta = curl(b) with b = -sin(80 pi x) cos(40 pi y) - 250 x + 150 y,
/// f = indicator of [0, 0.1]^2.
Coefficients example2();

VectorField cellular_velocity();
VectorField sheared_velocity();
ScalarField corner_source();

}  // namespace library

}  // namespace cemms

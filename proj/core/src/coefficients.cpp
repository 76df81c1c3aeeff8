#include "cemms/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cemms/error.hpp"

namespace cemms {

namespace {

constexpr double kDomainTol = 1e-12;
constexpr double kLineTol = 1e-9;

void check_domain(Point p) {
  if (!(p.x >= -kDomainTol && p.x <= 1.0 + kDomainTol && p.y >= -kDomainTol && p.y <= 1.0 + kDomainTol)) {
    std::ostringstream msg;
    msg << "field evaluated outside the unit square at (" << p.x << ", " << p.y << ")";
    throw std::out_of_range(msg.str());
  }
}

Index locate_axis(double coord, double hint, Index n) {
  const double scaled = coord * static_cast<double>(n);
  const double nearest = std::round(scaled);
  Index cell;
  if (std::abs(scaled - nearest) < kLineTol) {
    cell = static_cast<Index>(nearest);
    if (hint < coord) --cell;
  } else {
    cell = static_cast<Index>(std::floor(scaled));
  }
  return std::clamp<Index>(cell, 0, n - 1);
}

}  // namespace

Raster::Raster(Index nx, Index ny, int components, std::vector<double> values)
    : nx_(nx), ny_(ny), components_(components), values_(std::move(values)) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("raster dimensions must be positive");
  if (components != 1 && components != 2) throw std::invalid_argument("raster must have 1 or 2 components");
  if (static_cast<Index>(values_.size()) != nx * ny * components) {
    throw std::invalid_argument("raster holds " + std::to_string(values_.size()) + " values, expected " +
                                std::to_string(nx * ny * components));
  }
}

std::pair<Index, Index> Raster::locate(Point p, Point hint) const {
  return {locate_axis(p.x, hint.x, nx_), locate_axis(p.y, hint.y, ny_)};
}

Raster read_raster(const std::string& path, int components) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open raster file '" + path + "'");
  Index nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw Error("raster '" + path + "': malformed header, expected \"nx ny\"");
  const Index count = nx * ny * components;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(std::max<Index>(count, 0)));
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw Error("raster '" + path + "': non-numeric entry after " + std::to_string(values.size()) + " values");
  if (static_cast<Index>(values.size()) != count) {
    throw Error("raster '" + path + "': expected " + std::to_string(count) + " values, found " +
                std::to_string(values.size()));
  }
  return Raster(nx, ny, components, std::move(values));
}

void write_raster(const Raster& raster, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write raster file '" + path + "'");
  out << raster.nx() << ' ' << raster.ny() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const Index per_row = raster.nx() * raster.components();
  for (Index iy = 0; iy < raster.ny(); ++iy) {
    for (Index k = 0; k < per_row; ++k) {
      if (k) out << ' ';
      out << raster.values()[static_cast<std::size_t>(iy * per_row + k)];
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing raster file '" + path + "'");
}

ScalarField ScalarField::constant(double value) {
  ScalarField f;
  f.kind_ = Kind::constant;
  f.value_ = value;
  std::ostringstream name;
  name << std::setprecision(17) << "constant(" << value << ")";
  f.name_ = name.str();
  return f;
}

ScalarField ScalarField::analytic(std::function<double(Point)> fn, std::string name) {
  ScalarField f;
  f.kind_ = Kind::analytic;
  f.fn_ = std::move(fn);
  f.name_ = std::move(name);
  return f;
}

ScalarField ScalarField::raster(Raster data) {
  if (data.components() != 1) throw std::invalid_argument("scalar field needs a 1-component raster");
  ScalarField f;
  f.kind_ = Kind::raster;
  f.name_ = "raster(" + std::to_string(data.nx()) + "x" + std::to_string(data.ny()) + ")";
  f.raster_ = std::make_shared<const Raster>(std::move(data));
  return f;
}

double ScalarField::sample(Point p, Point hint) const {
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::analytic:
      return fn_(p);
    case Kind::raster: {
      auto [ix, iy] = raster_->locate(p, hint);
      return raster_->at(ix, iy);
    }
  }
  return 0.0;
}

double ScalarField::eval(Point p) const {
  check_domain(p);
  return sample(p, p);
}

double ScalarField::eval_near(Point p, Point interior) const {
  check_domain(p);
  return sample(p, interior);
}

VectorField VectorField::analytic(std::function<Vec2(Point)> fn, std::string name) {
  VectorField f;
  f.kind_ = Kind::analytic;
  f.fn_ = std::move(fn);
  f.name_ = std::move(name);
  return f;
}

VectorField VectorField::curl(std::function<Vec2(Point)> stream_gradient, std::string name) {
  VectorField f;
  f.kind_ = Kind::curl;
  f.fn_ = [grad = std::move(stream_gradient)](Point p) {
    const Vec2 g = grad(p);
    return Vec2{g.y, -g.x};
  };
  f.name_ = std::move(name);
  return f;
}

VectorField VectorField::constant(Vec2 value) {
  std::ostringstream name;
  name << std::setprecision(17) << "constant(" << value.x << "," << value.y << ")";
  return analytic([value](Point) { return value; }, name.str());
}

VectorField VectorField::raster(Raster data) {
  if (data.components() != 2) throw std::invalid_argument("vector field needs a 2-component raster");
  VectorField f;
  f.kind_ = Kind::raster;
  f.name_ = "raster(" + std::to_string(data.nx()) + "x" + std::to_string(data.ny()) + ")";
  f.raster_ = std::make_shared<const Raster>(std::move(data));
  return f;
}

Vec2 VectorField::sample(Point p, Point hint) const {
  if (kind_ == Kind::raster) {
    auto [ix, iy] = raster_->locate(p, hint);
    return {raster_->at(ix, iy, 0), raster_->at(ix, iy, 1)};
  }
  return fn_(p);
}

Vec2 VectorField::eval(Point p) const {
  check_domain(p);
  return sample(p, p);
}

Vec2 VectorField::eval_near(Point p, Point interior) const {
  check_domain(p);
  return sample(p, interior);
}

namespace {

template <class Sampler>
Range sweep_quadrature(const FineMesh& mesh, Sampler&& sample) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.triangle_centroid(t);
    for (const Point& q : mesh.quadrature_points(t)) {
      const double v = sample(q, c);
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
    }
  }
  return r;
}

}  // namespace

Range field_extrema(const ScalarField& field, const FineMesh& mesh) {
  if (field.kind() == ScalarField::Kind::constant) {
    return {field.constant_value(), field.constant_value()};
  }
  return sweep_quadrature(mesh, [&](Point q, Point c) { return field.eval_near(q, c); });
}

Range field_extrema(const VectorField& field, const FineMesh& mesh) {
  return sweep_quadrature(mesh, [&](Point q, Point c) { return std::sqrt(norm_sq(field.eval_near(q, c))); });
}

Range require_positive(const ScalarField& kappa, const FineMesh& mesh) {
  const Range r = field_extrema(kappa, mesh);
  if (!(r.min > 0.0)) {
    std::ostringstream msg;
    msg << "diffusion coefficient must be positive; minimum over quadrature points is " << r.min;
    throw std::invalid_argument(msg.str());
  }
  return r;
}

namespace library {

using std::numbers::pi;

VectorField cellular_velocity() {
  // Stream function sin(18 pi x) sin(18 pi y) / (18 pi).
  return VectorField::curl(
      [](Point p) {
        const double a = 18.0 * pi;
        return Vec2{std::cos(a * p.x) * std::sin(a * p.y), std::sin(a * p.x) * std::cos(a * p.y)};
      },
      "cellular(18pi)");
}

VectorField sheared_velocity() {
  // b = -sin(80 pi x) cos(40 pi y) - 250 x + 150 y
  return VectorField::curl(
      [](Point p) {
        const double bx = -80.0 * pi * std::cos(80.0 * pi * p.x) * std::cos(40.0 * pi * p.y) - 250.0;
        const double by = 40.0 * pi * std::sin(80.0 * pi * p.x) * std::sin(40.0 * pi * p.y) + 150.0;
        return Vec2{bx, by};
      },
      "sheared(80pi,40pi)");
}

ScalarField corner_source() {
  return ScalarField::analytic([](Point p) { return p.x <= 0.1 && p.y <= 0.1 ? 1.0 : 0.0; }, "indicator[0,0.1]^2");
}

Coefficients example1() {
  return {ScalarField::constant(1.0 / 200.0), cellular_velocity(), ScalarField::constant(1.0)};
}

Coefficients example2() { return {ScalarField::constant(1.0), sheared_velocity(), corner_source()}; }

}  // namespace library

}  // namespace cemms

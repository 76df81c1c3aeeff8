#include "cemms/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cemms/error.hpp"

namespace cemms {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

void close_checked(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string format_g(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error("'" + path + "': not a number: '" + s + "'");
  return v;
}

void check_size(const Eigen::VectorXd& values, const FineMesh& mesh) {
  if (values.size() != mesh.num_nodes()) throw std::invalid_argument("field size does not match the mesh");
}

}  // namespace

std::string shortest_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_table_row(const TableRow& row) {
  return std::to_string(row.N_b) + "," + shortest_double(row.H) + "," + std::to_string(row.N_ov) + "," +
         format_g("%.4g", row.e_l2) + "," + format_g("%.4g", row.e_h1);
}

void write_table(const std::vector<TableRow>& rows, const std::string& path, const std::string& failure) {
  auto out = open_out(path);
  out << kTableHeader << '\n';
  for (const auto& r : rows) out << format_table_row(r) << '\n';
  if (!failure.empty()) out << "# FAILED: " << failure << '\n';
  close_checked(out, path);
}

std::vector<TableRow> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTableHeader) throw Error("'" + path + "': missing table header");
  std::vector<TableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw Error("'" + path + "': expected 5 fields in '" + line + "'");
    TableRow r;
    r.N_b = static_cast<Index>(parse_double(f[0], path));
    r.H = parse_double(f[1], path);
    r.N_ov = static_cast<Index>(parse_double(f[2], path));
    r.e_l2 = parse_double(f[3], path);
    r.e_h1 = parse_double(f[4], path);
    rows.push_back(r);
  }
  return rows;
}

void write_field_vtk(const Eigen::VectorXd& values, const FineMesh& mesh, const std::string& path,
                     const std::string& name) {
  check_size(values, mesh);
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    const Point& p = mesh.node(v);
    out << format_g("%.17g", p.x) << ' ' << format_g("%.17g", p.y) << " 0\n";
  }
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (Index t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Index v = 0; v < mesh.num_nodes(); ++v) out << format_g("%.17g", values(v)) << '\n';
  close_checked(out, path);
}

void write_field_csv(const Eigen::VectorXd& values, const FineMesh& mesh, const std::string& path) {
  check_size(values, mesh);
  auto out = open_out(path);
  out << "x,y,value\n";
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    const Point& p = mesh.node(v);
    out << format_g("%.17g", p.x) << ',' << format_g("%.17g", p.y) << ',' << format_g("%.17g", values(v)) << '\n';
  }
  close_checked(out, path);
}

std::vector<std::array<double, 3>> read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "x,y,value") throw Error("'" + path + "': missing field header");
  std::vector<std::array<double, 3>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw Error("'" + path + "': expected 3 fields in '" + line + "'");
    rows.push_back({parse_double(f[0], path), parse_double(f[1], path), parse_double(f[2], path)});
  }
  return rows;
}

void write_field(const Eigen::VectorXd& values, const FineMesh& mesh, const std::string& stem,
                 const std::string& name) {
  write_field_vtk(values, mesh, stem + ".vtk", name);
  write_field_csv(values, mesh, stem + ".csv");
}

void write_eigenvalues(const AuxiliarySpace& aux, const std::string& path) {
  auto out = open_out(path);
  out << "cell";
  for (Index j = 1; j <= aux.count() + 1; ++j) out << ",lambda_" << j;
  out << '\n';
  for (const CellAux& c : aux.cells()) {
    out << c.cell;
    for (Index j = 0; j < c.eigenvalues.size(); ++j) out << ',' << format_g("%.17g", c.eigenvalues(j));
    out << '\n';
  }
  close_checked(out, path);
}

}  // namespace cemms

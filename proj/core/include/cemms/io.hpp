#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "cemms/mesh.hpp"
#include "cemms/spectral.hpp"

namespace cemms {

struct TableRow {
  Index N_b = 0;
  double H = 0.0;
  Index N_ov = 0;
  double e_l2 = 0.0;
  double e_h1 = 0.0;
};

inline constexpr const char* kTableHeader = "N_b,H,N_ov,e_L2,e_H1";

/// "N_b,H,N_ov,e_L2,e_H1" with H in shortest round-trip form and errors to
/// four significant digits.
std::string format_table_row(const TableRow& row);

/// Header plus one line per row. A nonempty `failure` appends a
/// "# FAILED: ..." line after the completed rows.
void write_table(const std::vector<TableRow>& rows, const std::string& path, const std::string& failure = {});
/// Reads a file written by write_table; comment lines are skipped.
std::vector<TableRow> read_table(const std::string& path);

/// Legacy VTK unstructured grid with one point-data scalar.
void write_field_vtk(const Eigen::VectorXd& values, const FineMesh& mesh, const std::string& path,
                     const std::string& name = "u");
/// Plain "x,y,value" rows, one per node, at full precision.
void write_field_csv(const Eigen::VectorXd& values, const FineMesh& mesh, const std::string& path);
std::vector<std::array<double, 3>> read_field_csv(const std::string& path);
/// Writes `stem`.vtk and `stem`.csv.
void write_field(const Eigen::VectorXd& values, const FineMesh& mesh, const std::string& stem,
                 const std::string& name = "u");

/// "cell,lambda_1,...,lambda_{l+1}", one line per coarse cell.
void write_eigenvalues(const AuxiliarySpace& aux, const std::string& path);

/// Shortest decimal string that reads back to the same double.
std::string shortest_double(double v);

}  // namespace cemms

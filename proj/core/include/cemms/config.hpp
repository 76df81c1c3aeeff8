#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cemms/coefficients.hpp"
#include "cemms/error.hpp"
#include "cemms/mesh.hpp"

namespace cemms {

/// Configuration error tied to a line of the input (0 when not line-bound).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// One pipeline run: coarse grid nx x nx with n_f fine squares per cell edge.
struct RunPlan {
  Index nx = 0;
  Index nf = 0;
  Index layers = 0;
  Index count = 0;

  double H() const { return 1.0 / static_cast<double>(nx); }
};

/// Flat key = value configuration. Lists are comma separated.
///
///   example    = example1 | example2 | custom      (required)
///   kappa      = <number> | raster:<path>
///   beta       = cellular | sheared | <bx> <by> | raster:<path>
///   source     = <number> | corner | raster:<path>
///   H          = list of 1/n or decimals
///   N_ov, N_b  = lists of positive integers
///   fine_cells = fine squares per axis (default 400); n_f = fine_cells / nx
///   n_f        = explicit refinement (single H only)
///   output     = output directory (default "out")
///   threads    = worker count, 0 = all cores
///
/// H, N_ov and N_b are zipped; a list of length one is repeated.
struct ExperimentConfig {
  std::string example;
  std::optional<std::string> kappa;
  std::optional<std::string> beta;
  std::optional<std::string> source;
  std::vector<Index> nx;
  std::vector<Index> layers;
  std::vector<Index> counts;
  Index fine_cells = 400;
  std::optional<Index> nf;
  std::string output = "out";
  int threads = 0;
  /// Directory that relative raster paths are resolved against.
  std::string base_dir = ".";
  /// Key/value pairs as given, in file order.
  std::vector<std::pair<std::string, std::string>> entries;

  std::vector<RunPlan> runs() const;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");

/// Coefficient fields selected by the configuration.
Coefficients make_coefficients(const ExperimentConfig& config);

}  // namespace cemms

#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cemms/basis.hpp"
#include "cemms/config.hpp"
#include "cemms/fem.hpp"
#include "cemms/io.hpp"
#include "cemms/solver.hpp"
#include "cemms/spectral.hpp"

namespace cemms {

struct Timings {
  double fine = 0.0;
  double auxiliary = 0.0;
  double basis = 0.0;
  double coarse = 0.0;
  double total = 0.0;
};

struct RunRecord {
  RunPlan plan;
  ErrorPair errors;
  double Lambda = 0.0;
  double fine_residual = 0.0;
  double saddle_residual = 0.0;
  double galerkin_residual = 0.0;
  Timings timings;

  TableRow row() const { return {plan.count, plan.H(), plan.layers, errors.l2, errors.h1}; }
};

/// Everything a run produced, for dumps and inspection.
struct RunArtifacts {
  std::shared_ptr<const Hierarchy> hierarchy;
  std::shared_ptr<const AuxiliarySpace> aux;
  std::shared_ptr<const MultiscaleSpace> space;
  Eigen::VectorXd u_h;
  Eigen::VectorXd u_ms;
};

/// Runs the full pipeline for one set of coefficients. The fine solution is
/// cached per fine resolution and eigenpairs per (nx, n_f), so sweeps over
/// N_ov and N_b reuse them.
class Experiment {
 public:
  explicit Experiment(Coefficients coeffs, int threads = 0, BasisOptions basis = {});

  const Coefficients& coefficients() const { return coeffs_; }
  RunRecord run(const RunPlan& plan, RunArtifacts* keep = nullptr);

  std::shared_ptr<const Hierarchy> hierarchy(Index nx, Index nf);
  std::shared_ptr<const AuxiliarySpace> auxiliary(Index nx, Index nf, Index count, double* seconds = nullptr);

 private:
  struct FineData {
    GlobalOperators ops;
    FineSolution solution;
  };
  const FineData& fine(const FineMesh& mesh, double* seconds);

  Coefficients coeffs_;
  int threads_;
  BasisOptions basis_;
  std::map<std::pair<Index, Index>, std::shared_ptr<const Hierarchy>> hierarchies_;
  std::map<std::pair<Index, Index>, std::shared_ptr<const FineData>> fine_;
  std::map<std::pair<Index, Index>, std::shared_ptr<const AuxiliarySpace>> aux_;
};

struct OutputOptions {
  bool dump_eigs = false;
  bool dump_fields = false;
  /// Basis function (cell, j) to write for every run, both 0-based.
  std::optional<std::pair<Index, Index>> dump_basis;
};

/// Runs every plan of the configuration, writing table.csv and
/// metadata.json into the output directory after each run. A failing run
/// leaves the completed rows plus a failure marker and rethrows.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const OutputOptions& outputs = {});

}  // namespace cemms

#include "cemms/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

namespace cemms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json record_json(const RunRecord& r) {
  return {{"nx", r.plan.nx},
          {"H", r.plan.H()},
          {"n_f", r.plan.nf},
          {"N_ov", r.plan.layers},
          {"N_b", r.plan.count},
          {"e_L2", r.errors.l2},
          {"e_H1", r.errors.h1},
          {"Lambda", r.Lambda},
          {"residuals",
           {{"fine", r.fine_residual}, {"saddle", r.saddle_residual}, {"galerkin", r.galerkin_residual}}},
          {"timings",
           {{"fine", r.timings.fine},
            {"auxiliary", r.timings.auxiliary},
            {"basis", r.timings.basis},
            {"coarse", r.timings.coarse},
            {"total", r.timings.total}}}};
}

void write_metadata(const ExperimentConfig& cfg, const std::vector<RunRecord>& records, const std::string& error,
                    const std::string& path) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries) config[k] = v;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : records) runs.push_back(record_json(r));
  nlohmann::json meta = {{"config", config},
                         {"threads", cfg.threads},
                         {"status", error.empty() ? "ok" : "failed"},
                         {"runs", runs}};
  if (!error.empty()) meta["error"] = error;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << meta.dump(2) << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

Experiment::Experiment(Coefficients coeffs, int threads, BasisOptions basis)
    : coeffs_(std::move(coeffs)), threads_(threads), basis_(basis) {
  basis_.threads = threads;
}

std::shared_ptr<const Hierarchy> Experiment::hierarchy(Index nx, Index nf) {
  auto& slot = hierarchies_[{nx, nf}];
  if (!slot) slot = std::make_shared<const Hierarchy>(build_hierarchy(nx, nx, nf));
  return slot;
}

const Experiment::FineData& Experiment::fine(const FineMesh& mesh, double* seconds) {
  const auto start = Clock::now();
  auto& slot = fine_[{mesh.squares_x(), mesh.squares_y()}];
  if (!slot) {
    require_positive(coeffs_.kappa, mesh);
    auto data = std::make_shared<FineData>();
    data->ops = assemble_global(mesh, coeffs_);
    data->solution = fine_solve(mesh, data->ops);
    slot = std::move(data);
  }
  if (seconds) *seconds = seconds_since(start);
  return *slot;
}

std::shared_ptr<const AuxiliarySpace> Experiment::auxiliary(Index nx, Index nf, Index count, double* seconds) {
  const auto start = Clock::now();
  auto& slot = aux_[{nx, nf}];
  if (!slot || slot->count() < count) {
    const auto h = hierarchy(nx, nf);
    require_positive(coeffs_.kappa, h->mesh);
    AuxiliaryOptions opts;
    opts.threads = threads_;
    slot = std::make_shared<const AuxiliarySpace>(
        build_auxiliary(h->mesh, h->grid, coeffs_.kappa, coeffs_.beta, count, opts));
  }
  std::shared_ptr<const AuxiliarySpace> out =
      slot->count() == count ? slot : std::make_shared<const AuxiliarySpace>(slot->truncated(count));
  if (seconds) *seconds = seconds_since(start);
  return out;
}

RunRecord Experiment::run(const RunPlan& plan, RunArtifacts* keep) {
  const auto start = Clock::now();
  RunRecord rec;
  rec.plan = plan;
  const auto h = hierarchy(plan.nx, plan.nf);
  const FineData& fd = fine(h->mesh, &rec.timings.fine);
  rec.fine_residual = fd.solution.residual;

  const auto aux = auxiliary(plan.nx, plan.nf, plan.count, &rec.timings.auxiliary);
  rec.Lambda = aux->Lambda();

  auto t = Clock::now();
  auto space = std::make_shared<const MultiscaleSpace>(
      build_space(h->mesh, h->grid, coeffs_.kappa, *aux, plan.layers, basis_));
  rec.timings.basis = seconds_since(t);
  for (const auto& b : space->blocks()) rec.saddle_residual = std::max(rec.saddle_residual, b.residual);

  t = Clock::now();
  MsSolution ms = solve_ms(*space, fd.ops, threads_);
  rec.timings.coarse = seconds_since(t);
  rec.galerkin_residual = ms.galerkin_residual;
  rec.errors = compute_errors(ms.u_ms, fd.solution.u, fd.ops.mass, fd.ops.stiffness);
  rec.timings.total = seconds_since(start);

  if (keep) {
    keep->hierarchy = h;
    keep->aux = aux;
    keep->space = std::move(space);
    keep->u_h = fd.solution.u;
    keep->u_ms = std::move(ms.u_ms);
  }
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, const OutputOptions& outputs) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output);
  const fs::path dir(config.output);
  const std::string table_path = (dir / "table.csv").string();
  const std::string meta_path = (dir / "metadata.json").string();

  std::vector<RunRecord> records;
  std::vector<TableRow> rows;
  try {
    Experiment exp(make_coefficients(config), config.threads);
    const auto plans = config.runs();
    for (std::size_t k = 0; k < plans.size(); ++k) {
      const RunPlan& plan = plans[k];
      const bool want_artifacts = outputs.dump_eigs || outputs.dump_fields || outputs.dump_basis.has_value();
      RunArtifacts art;
      records.push_back(exp.run(plan, want_artifacts ? &art : nullptr));
      rows.push_back(records.back().row());
      write_table(rows, table_path);
      write_metadata(config, records, {}, meta_path);

      const std::string tag = "run" + std::to_string(k);
      if (outputs.dump_eigs) {
        write_eigenvalues(*art.aux, (dir / ("eigenvalues_" + tag + ".csv")).string());
      }
      if (outputs.dump_fields) {
        write_field(art.u_h, art.hierarchy->mesh, (dir / ("u_h_" + tag)).string(), "u_h");
        write_field(art.u_ms, art.hierarchy->mesh, (dir / ("u_ms_" + tag)).string(), "u_ms");
      }
      if (outputs.dump_basis) {
        const auto [cell, j] = *outputs.dump_basis;
        if (!art.hierarchy->grid.valid_cell(cell) || j < 0 || j >= plan.count) {
          throw std::out_of_range("--dump-basis " + std::to_string(cell) + "," + std::to_string(j) +
                                  " is outside the grid or the basis count");
        }
        write_field(art.space->column(art.space->column_index(cell, j)), art.hierarchy->mesh,
                    (dir / ("basis_" + tag + "_cell" + std::to_string(cell) + "_j" + std::to_string(j))).string(),
                    "psi");
      }
    }
  } catch (const std::exception& e) {
    write_table(rows, table_path, e.what());
    write_metadata(config, records, e.what(), meta_path);
    throw;
  }
  return records;
}

}  // namespace cemms

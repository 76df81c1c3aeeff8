#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "cemms/config.hpp"
#include "cemms/experiment.hpp"
#include "cemms/io.hpp"

namespace {

std::optional<std::pair<cemms::Index, cemms::Index>> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return std::nullopt;
  try {
    std::size_t a = 0;
    std::size_t b = 0;
    const std::string first = text.substr(0, comma);
    const std::string second = text.substr(comma + 1);
    const long long i = std::stoll(first, &a);
    const long long j = std::stoll(second, &b);
    if (a != first.size() || b != second.size() || i < 0 || j < 0) return std::nullopt;
    return std::make_pair(static_cast<cemms::Index>(i), static_cast<cemms::Index>(j));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale convection-diffusion solver: runs an experiment configuration"};
  std::string config_path;
  std::string out_dir;
  int threads = -1;
  std::string dump_basis;
  bool dump_eigs = false;
  bool dump_fields = false;
  app.add_option("config", config_path, "Experiment configuration file")->required();
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", threads, "Worker threads, 0 = all cores (overrides the config)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--dump-basis", dump_basis, "Write basis function i,j (0-based cell id and index) per run");
  app.add_flag("--dump-eigs", dump_eigs, "Write per-cell eigenvalues per run");
  app.add_flag("--dump-fields", dump_fields, "Write u_h and u_ms per run (VTK and CSV)");
  CLI11_PARSE(app, argc, argv);

  try {
    cemms::ExperimentConfig cfg = cemms::parse_config(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (threads >= 0) cfg.threads = threads;
    cemms::OutputOptions outputs;
    outputs.dump_eigs = dump_eigs;
    outputs.dump_fields = dump_fields;
    if (!dump_basis.empty()) {
      outputs.dump_basis = parse_pair(dump_basis);
      if (!outputs.dump_basis) {
        std::cerr << "error: --dump-basis expects two nonnegative integers 'i,j', got '" << dump_basis << "'\n";
        return 2;
      }
    }
    const auto records = cemms::run_experiment(cfg, outputs);
    std::cout << cemms::kTableHeader << '\n';
    for (const auto& r : records) {
      std::cout << cemms::format_table_row(r.row()) << '\n';
      std::fprintf(stderr, "  H=1/%td N_ov=%td N_b=%td  Lambda=%.4g  time %.1fs (fine %.1f, eig %.1f, basis %.1f, coarse %.1f)\n",
                   r.plan.nx, r.plan.layers, r.plan.count, r.Lambda, r.timings.total, r.timings.fine,
                   r.timings.auxiliary, r.timings.basis, r.timings.coarse);
    }
  } catch (const cemms::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "pipeflow/config.hpp"
#include "pipeflow/runner.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", args.output, "output directory, overrides [output] dir");
  args.seed_opt = cmd->add_option("--seed", args.seed, "sampling seed, overrides [output] seed");
  cmd->add_option("--threads", args.threads, "worker thread count for the element loops");
}

pipeflow::RunConfig load_config(const CommonArgs& args) {
  pipeflow::RunConfig cfg = pipeflow::parse_config(args.config);
  if (!args.output.empty()) cfg.output_dir = args.output;
  if (args.seed_opt->count() > 0) cfg.seed = args.seed;
  if (args.threads > 0) {
#ifdef _OPENMP
    omp_set_num_threads(args.threads);
#else
    std::cerr << "warning: built without OpenMP, --threads ignored\n";
#endif
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-element solver for nonstationary heat-conducting viscous flow in truncated pipe systems"};
  app.require_subcommand(1);

  CommonArgs mesh_args, run_args, stokes_args, energy_args, estimate_args;
  std::string velocity_archive;

  CLI::App* mesh_cmd = app.add_subcommand("mesh", "generate or import a mesh and validate it");
  attach_common(mesh_cmd, mesh_args);

  CLI::App* run_cmd = app.add_subcommand("run", "full coupled solve with diagnostics");
  attach_common(run_cmd, run_args);

  CLI::App* stokes_cmd =
      app.add_subcommand("stokes", "momentum subsystem only, lagged fields frozen at t=0");
  attach_common(stokes_cmd, stokes_args);

  CLI::App* energy_cmd =
      app.add_subcommand("energy", "energy subsystem only, driven by a velocity archive");
  attach_common(energy_cmd, energy_args);
  energy_cmd->add_option("--velocity", velocity_archive, "velocity trajectory archive")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* estimate_cmd =
      app.add_subcommand("estimate-cs", "randomized lower bound for the transfer constant");
  attach_common(estimate_cmd, estimate_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) return pipeflow::run_mesh(load_config(mesh_args));
    if (run_cmd->parsed()) return pipeflow::run_scenario(load_config(run_args));
    if (stokes_cmd->parsed()) return pipeflow::run_stokes(load_config(stokes_args));
    if (energy_cmd->parsed())
      return pipeflow::run_energy(load_config(energy_args), velocity_archive);
    if (estimate_cmd->parsed()) return pipeflow::run_estimate(load_config(estimate_args));
  } catch (const pipeflow::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

#pragma once

#include <string>

#include "pipeflow/config.hpp"

namespace pipeflow {

// Command drivers behind the CLI.  Each returns a process exit code,
// reports failures on stderr and drops its artifacts in cfg.output_dir.

// generate or import the mesh, validate it, write mesh.msh + mesh.vtk
int run_mesh(const RunConfig& cfg);

// full coupled solve: VTK frames, diagnostics.csv, summary.json.  On solver
// failure the partial artifacts are still written and the exit code is
// nonzero.
int run_scenario(const RunConfig& cfg);

// momentum subsystem only, with the lagged fields frozen at the initial
// data; writes velocity.traj for later energy-only runs
int run_stokes(const RunConfig& cfg);

// energy subsystem only, transported by a velocity trajectory archive
int run_energy(const RunConfig& cfg, const std::string& velocity_archive);

// randomized lower bound for the transfer constant of the smallness check
int run_estimate(const RunConfig& cfg);

}  // namespace pipeflow

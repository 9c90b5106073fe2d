#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pipeflow/coupler.hpp"
#include "pipeflow/expression.hpp"
#include "pipeflow/material_law.hpp"
#include "pipeflow/mesh.hpp"

namespace pipeflow {

// Carries every issue found in one pass so a bad file is reported once,
// exhaustively.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> all)
      : std::runtime_error(join(all)), issues(std::move(all)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& i : v) s += "\n  " + i;
    return s;
  }
};

struct RunConfig {
  // [mesh]
  std::string mesh_source = "generate";  // generate | import
  std::string mesh_file;                 // import path
  PipeSpec pipe;

  // [material]
  DensityLaw material;

  // [scenario]
  double horizon = 1.0;
  double dt = 0.1;
  Expression f[3];
  Expression heat_source;
  Expression theta_inf;
  Expression q_e;
  Expression u0[3];
  Expression e0;

  // [solver]
  double picard_tol = 1e-6;
  int picard_max = 30;
  double relax = 1.0;
  double saddle_tol = 1e-10;
  int saddle_max = 400;
  double newton_tol = 1e-11;
  int newton_max = 30;
  double gronwall_c1 = 1.0, gronwall_c2 = 1.0, gronwall_c3 = 1.0;
  int cs_samples = 8;
  double cs_amplitude = 1.0;

  // [output]
  std::string output_dir = "out";
  int vtk_every = 1;  // 0 disables VTK frames
  std::uint64_t seed = 0;
};

RunConfig parse_config(const std::string& path);
// same parser over an in-memory document; `name` labels error messages
RunConfig parse_config_text(const std::string& text, const std::string& name);

// binds the parsed expressions to a scenario over a built mesh and material
Scenario make_scenario(const RunConfig& cfg, const PipeMesh& mesh, const MaterialLaw& law);

// builds the mesh from the [mesh] section (generate or import)
PipeMesh build_mesh(const RunConfig& cfg);

}  // namespace pipeflow

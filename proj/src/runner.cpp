#include "pipeflow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "pipeflow/coupler.hpp"
#include "pipeflow/log.hpp"
#include "pipeflow/msh_io.hpp"
#include "pipeflow/output.hpp"

namespace pipeflow {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

SaddleOptions saddle_options(const RunConfig& cfg) {
  SaddleOptions opt;
  opt.tol = cfg.saddle_tol;
  opt.max_iter = cfg.saddle_max;
  return opt;
}

NewtonOptions newton_options(const RunConfig& cfg) {
  NewtonOptions opt;
  opt.tol = cfg.newton_tol;
  opt.max_iter = cfg.newton_max;
  return opt;
}

fs::path prepare_output(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

PipeMesh load_checked_mesh(const RunConfig& cfg) {
  PipeMesh mesh = build_mesh(cfg);
  const GeometryReport rep = validate_geometry(mesh);
  if (!rep.ok) {
    std::string msg = "mesh validation failed:";
    for (const auto& f : rep.failures) msg += "\n  " + f;
    throw std::runtime_error(msg);
  }
  return mesh;
}

// Vertex dofs come first in every space and components are interleaved, so
// the point data of a frame is a prefix of its dof vector.
VtkField point_field(const std::string& name, const FeSpace& space,
                     const std::vector<double>& dofs) {
  VtkField f;
  f.name = name;
  f.ncomp = space.ncomp();
  f.data.assign(dofs.begin(),
                dofs.begin() + static_cast<std::ptrdiff_t>(space.mesh().vertices.size()) * f.ncomp);
  return f;
}

std::vector<double> nodal_temperature(const MaterialLaw& law, const std::vector<double>& e) {
  std::vector<double> theta(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) theta[i] = law.temperature(e[i]);
  return theta;
}

std::string frame_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.vtk", k);
  return buf;
}

bool want_frame(const RunConfig& cfg, int k, int nsteps) {
  if (cfg.vtk_every <= 0) return false;
  return k % cfg.vtk_every == 0 || k == nsteps;
}

void add_row(CsvTable& t, const std::string& record, int step, const std::string& time,
             const std::string& quantity, double value) {
  t.rows.push_back({record, std::to_string(step), time, quantity, format_float(value)});
}

ordered_json mesh_json(const RunConfig& cfg, const PipeMesh& mesh) {
  ordered_json j;
  j["source"] = cfg.mesh_source == "import" ? cfg.mesh_file : std::string("generated");
  j["dim"] = mesh.dim;
  j["vertices"] = mesh.vertices.size();
  j["cells"] = mesh.cells.size();
  j["cuts"] = mesh.n_cuts();
  if (cfg.mesh_source == "generate") j["h"] = cfg.pipe.h;
  return j;
}

ordered_json material_json(const MaterialLaw& law, const DensityLaw& data) {
  ordered_json j;
  j["rho_min"] = law.rho_min();
  j["rho_max"] = law.rho_max();
  j["kappa_min"] = law.kappa_min();
  j["kappa_max"] = law.kappa_max();
  j["temperature_lipschitz"] = law.lipschitz_bound();
  j["nu"] = data.nu;
  j["alpha"] = data.alpha;
  return j;
}

ordered_json estimate_json(const StokesConstantEstimate& est, double horizon) {
  ordered_json j;
  j["value"] = est.c_s;
  j["note"] = "randomized lower bound, specific to this mesh and time step";
  j["valid_samples"] = est.valid_samples;
  j["seed"] = est.seed;
  j["ratios"] = est.ratios;
  if (est.c_s > 0.0) {
    j["smallness_threshold"] = 1.0 / (4.0 * est.c_s * est.c_s * std::pow(horizon, 0.125));
    j["ball_radius"] = 1.0 / (2.0 * est.c_s * std::pow(horizon, 0.125));
  }
  return j;
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void write_summary(const fs::path& outdir, const ordered_json& summary) {
  std::ofstream os(outdir / "summary.json");
  os << summary.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write summary.json");
}

}  // namespace

int run_mesh(const RunConfig& cfg) try {
  const fs::path outdir = prepare_output(cfg);
  PipeMesh mesh = build_mesh(cfg);
  const GeometryReport rep = validate_geometry(mesh);
  write_msh(mesh, (outdir / "mesh.msh").string());
  write_vtk((outdir / "mesh.vtk").string(), mesh, {});

  ordered_json j;
  j["mesh"] = mesh_json(cfg, mesh);
  j["ok"] = rep.ok;
  j["max_cut_deviation"] = rep.max_cut_deviation;
  j["max_angle_deviation"] = rep.max_angle_deviation;
  j["min_cell_quality"] = rep.min_cell_quality;
  j["min_cell_volume"] = rep.min_cell_volume;
  j["failures"] = rep.failures;
  {
    std::ofstream os(outdir / "geometry.json");
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("cannot write geometry.json");
  }

  std::cout << "mesh: " << mesh.vertices.size() << " vertices, " << mesh.cells.size() << " cells, "
            << mesh.n_cuts() << " cuts, min quality " << format_float(rep.min_cell_quality)
            << (rep.ok ? "" : " [INVALID]") << "\n";
  for (const auto& f : rep.failures) std::cout << "  " << f << "\n";
  return rep.ok ? 0 : 1;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

int run_scenario(const RunConfig& cfg) try {
  const fs::path outdir = prepare_output(cfg);
  const PipeMesh mesh = load_checked_mesh(cfg);
  const MaterialLaw law(cfg.material);
  const Scenario sc = make_scenario(cfg, mesh, law);
  const CoupledSolver solver(sc, AssemblyOptions{}, saddle_options(cfg), newton_options(cfg));
  const int nsteps = solver.nsteps();
  const double dt = solver.dt();

  ordered_json summary;
  summary["command"] = "run";
  summary["seed"] = cfg.seed;
  summary["threads"] = thread_count();
  summary["mesh"] = mesh_json(cfg, mesh);
  summary["material"] = material_json(law, cfg.material);
  {
    ordered_json d;
    d["velocity_degree"] = 2;
    d["pressure_degree"] = 1;
    d["enthalpy_degree"] = 1;
    d["dt"] = dt;
    d["horizon"] = cfg.horizon;
    d["steps"] = nsteps;
    d["pressure_pinned"] = solver.momentum().pressure_pinned();
    summary["discretization"] = d;
  }

  log_info("estimating the data-to-ball transfer constant");
  const StokesConstantEstimate est = estimate_stokes_constant(
      mesh, cfg.material.nu, dt, cfg.horizon, cfg.cs_samples, cfg.seed, cfg.cs_amplitude);
  summary["stokes_constant"] = estimate_json(est, cfg.horizon);
  if (est.c_s <= 0.0) throw std::runtime_error("transfer constant estimate is zero");
  const double ball_radius = 1.0 / (2.0 * est.c_s * std::pow(cfg.horizon, 0.125));

  const double f_norm = solver.body_force_norm();
  const double u0_norm = h1_norm(solver.velocity_space(), solver.initial_velocity());
  const SmallnessCheck small =
      check_smallness(f_norm, u0_norm, cfg.horizon, est.c_s, law.rho_max());
  {
    ordered_json j;
    j["pass"] = small.pass;
    j["threshold"] = small.threshold;
    j["data_norm"] = small.data_norm;
    j["margin"] = small.margin;
    j["body_force_norm"] = f_norm;
    j["initial_velocity_norm"] = u0_norm;
    summary["smallness"] = j;
  }
  log_info(std::string("smallness check ") + (small.pass ? "passed" : "failed") + " with margin " +
           format_float(small.margin));

  CsvTable csv;
  csv.header = {"record", "step", "time", "quantity", "value"};
  add_row(csv, "setup", 0, "", "stokes_constant", est.c_s);
  add_row(csv, "setup", 0, "", "smallness_threshold", small.threshold);
  add_row(csv, "setup", 0, "", "smallness_data_norm", small.data_norm);
  add_row(csv, "setup", 0, "", "ball_radius", ball_radius);

  int exit_code = 0;
  std::string error;
  CoupledSolver::PicardResult sol;
  try {
    sol = solver.picard_solve(cfg.picard_tol, cfg.picard_max, cfg.relax);
    if (!sol.report.converged) {
      exit_code = 1;
      error = "fixed-point iteration did not converge";
    }
  } catch (const SolveError& err) {
    exit_code = 1;
    error = err.what();
  }

  {
    ordered_json j;
    j["converged"] = sol.report.converged;
    j["iterations"] = sol.report.iterations;
    j["contracting"] = sol.report.contracting;
    j["increments"] = sol.report.increments;
    j["ball_norms"] = sol.report.ball_norms;
    j["ball_radius"] = ball_radius;
    if (!sol.report.ball_norms.empty()) {
      const double last = sol.report.ball_norms.back();
      j["final_ball_norm"] = last;
      j["inside_ball"] = last <= ball_radius;
    }
    summary["picard"] = j;
  }
  for (std::size_t i = 0; i < sol.report.increments.size(); ++i) {
    add_row(csv, "picard", static_cast<int>(i + 1), "", "increment", sol.report.increments[i]);
    add_row(csv, "picard", static_cast<int>(i + 1), "", "ball_norm", sol.report.ball_norms[i]);
  }

  if (!sol.u.empty()) {
    const FeSpace& vel = solver.velocity_space();
    const FeSpace& pres = solver.pressure_space();
    const FeSpace& scalar = solver.scalar_space();

    const BallNormSurrogate ball = ball_norm_surrogate(vel, sol.u, dt);
    summary["picard"]["norm_quad_degree"] = ball.quad_degree;

    const EnergyBudget budget = energy_budget(vel, sol.u);
    const auto loads = solver.thermal_loads();
    const GronwallResult gw =
        gronwall_bound(scalar, vel, sol.e, sol.u, loads, dt, cfg.gronwall_c1, cfg.gronwall_c2,
                       cfg.gronwall_c3);
    {
      ordered_json j;
      j["satisfied"] = gw.satisfied;
      j["c1"] = cfg.gronwall_c1;
      j["c2"] = cfg.gronwall_c2;
      j["c3"] = cfg.gronwall_c3;
      summary["gronwall"] = j;
    }

    int written = 0;
    for (int k = 0; k <= nsteps; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const std::string time = format_float(k * dt);
      add_row(csv, "frame", k, time, "velocity_l2", l2_norm(vel, sol.u[ku]));
      add_row(csv, "frame", k, time, "velocity_h1", h1_norm(vel, sol.u[ku]));
      add_row(csv, "frame", k, time, "pressure_l2", l2_norm(pres, sol.p[ku]));
      add_row(csv, "frame", k, time, "enthalpy_l2", l2_norm(scalar, sol.e[ku]));
      add_row(csv, "frame", k, time, "kinetic_energy", budget.kinetic[ku]);
      add_row(csv, "frame", k, time, "dissipation", budget.dissipation[ku]);
      const auto backflow = backflow_energy(vel, sol.u[ku]);
      for (std::size_t c = 0; c < budget.fluxes[ku].size(); ++c) {
        const std::string cut = std::to_string(c + 1);
        add_row(csv, "frame", k, time, "flux_cut" + cut, budget.fluxes[ku][c]);
        add_row(csv, "frame", k, time, "backflow_cut" + cut, backflow[c]);
      }
      add_row(csv, "frame", k, time, "gronwall_lhs", gw.lhs[ku]);
      add_row(csv, "frame", k, time, "gronwall_bound", gw.bound[ku]);

      if (want_frame(cfg, k, nsteps)) {
        const std::vector<VtkField> fields = {
            point_field("velocity", vel, sol.u[ku]),
            point_field("pressure", pres, sol.p[ku]),
            point_field("enthalpy", scalar, sol.e[ku]),
            point_field("temperature", scalar, nodal_temperature(law, sol.e[ku])),
        };
        write_vtk((outdir / frame_name(k)).string(), mesh, fields);
        ++written;
      }
    }
    summary["artifacts"] = {{"csv", "diagnostics.csv"}, {"vtk_frames", written}};
  }

  summary["status"] = error.empty() ? std::string("ok") : error;
  write_csv((outdir / "diagnostics.csv").string(), csv);
  write_summary(outdir, summary);
  if (!error.empty()) std::cerr << "error: " << error << "\n";
  std::cout << "run: " << (exit_code == 0 ? "converged in " : "FAILED after ")
            << sol.report.iterations << " fixed-point iterations, artifacts in " << outdir.string()
            << "\n";
  return exit_code;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

int run_stokes(const RunConfig& cfg) try {
  const fs::path outdir = prepare_output(cfg);
  const PipeMesh mesh = load_checked_mesh(cfg);
  const MaterialLaw law(cfg.material);
  const Scenario sc = make_scenario(cfg, mesh, law);
  const CoupledSolver solver(sc, AssemblyOptions{}, saddle_options(cfg), newton_options(cfg));
  const int nsteps = solver.nsteps();
  const double dt = solver.dt();

  const Trajectory u_lag = solver.constant_extension(solver.initial_velocity());
  const Trajectory e_lag = solver.constant_extension(solver.initial_enthalpy());
  const TransientMomentumResult mom =
      solve_momentum_transient(solver.momentum(), solver.scalar_space(), e_lag, u_lag,
                               solver.body_force_frames(), solver.initial_velocity(), law,
                               saddle_options(cfg));
  save_trajectory((outdir / "velocity.traj").string(), mom.u);

  const FeSpace& vel = solver.velocity_space();
  const FeSpace& pres = solver.pressure_space();
  CsvTable csv;
  csv.header = {"record", "step", "time", "quantity", "value"};
  for (int k = 0; k <= nsteps; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const std::string time = format_float(k * dt);
    add_row(csv, "frame", k, time, "velocity_l2", l2_norm(vel, mom.u[ku]));
    add_row(csv, "frame", k, time, "velocity_h1", h1_norm(vel, mom.u[ku]));
    add_row(csv, "frame", k, time, "pressure_l2", l2_norm(pres, mom.p[ku]));
    if (k > 0) {
      const MomentumStepReport& rep = mom.reports[ku - 1];
      add_row(csv, "frame", k, time, "saddle_iterations", rep.saddle.iterations);
      add_row(csv, "frame", k, time, "divergence_residual", rep.divergence_residual);
    }
    if (want_frame(cfg, k, nsteps)) {
      write_vtk((outdir / frame_name(k)).string(), mesh,
                {point_field("velocity", vel, mom.u[ku]), point_field("pressure", pres, mom.p[ku])});
    }
  }
  write_csv((outdir / "diagnostics.csv").string(), csv);

  ordered_json summary;
  summary["command"] = "stokes";
  summary["mesh"] = mesh_json(cfg, mesh);
  summary["discretization"] = {{"dt", dt}, {"horizon", cfg.horizon}, {"steps", nsteps}};
  summary["status"] = "ok";
  write_summary(outdir, summary);
  std::cout << "stokes: " << nsteps << " steps, trajectory in "
            << (outdir / "velocity.traj").string() << "\n";
  return 0;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

int run_energy(const RunConfig& cfg, const std::string& velocity_archive) try {
  const fs::path outdir = prepare_output(cfg);
  const PipeMesh mesh = load_checked_mesh(cfg);
  const MaterialLaw law(cfg.material);
  const Scenario sc = make_scenario(cfg, mesh, law);
  const CoupledSolver solver(sc, AssemblyOptions{}, saddle_options(cfg), newton_options(cfg));
  const int nsteps = solver.nsteps();
  const double dt = solver.dt();

  const Trajectory u = load_trajectory(velocity_archive);
  if (static_cast<int>(u.size()) != nsteps + 1)
    throw std::runtime_error("velocity archive has " + std::to_string(u.size()) +
                             " frames, scenario needs " + std::to_string(nsteps + 1));
  const std::size_t vdofs = static_cast<std::size_t>(solver.velocity_space().ndofs());
  if (!u.empty() && u.front().size() != vdofs)
    throw std::runtime_error("velocity archive frame size does not match the mesh");

  const Trajectory e_lag = solver.constant_extension(solver.initial_enthalpy());
  const TransientEnergyResult en = solve_energy_transient(
      solver.energy(), e_lag, u, solver.energy_data_frames(), solver.initial_enthalpy(),
      newton_options(cfg));

  const FeSpace& scalar = solver.scalar_space();
  CsvTable csv;
  csv.header = {"record", "step", "time", "quantity", "value"};
  for (int k = 0; k <= nsteps; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const std::string time = format_float(k * dt);
    add_row(csv, "frame", k, time, "enthalpy_l2", l2_norm(scalar, en.e[ku]));
    if (k > 0) {
      add_row(csv, "frame", k, time, "newton_iterations", en.reports[ku - 1].newton_iterations);
      add_row(csv, "frame", k, time, "newton_residual", en.reports[ku - 1].residual);
    }
    if (want_frame(cfg, k, nsteps)) {
      write_vtk((outdir / frame_name(k)).string(), mesh,
                {point_field("enthalpy", scalar, en.e[ku]),
                 point_field("temperature", scalar, nodal_temperature(law, en.e[ku]))});
    }
  }
  write_csv((outdir / "diagnostics.csv").string(), csv);

  ordered_json summary;
  summary["command"] = "energy";
  summary["mesh"] = mesh_json(cfg, mesh);
  summary["material"] = material_json(law, cfg.material);
  summary["discretization"] = {{"dt", dt}, {"horizon", cfg.horizon}, {"steps", nsteps}};
  summary["status"] = "ok";
  write_summary(outdir, summary);
  std::cout << "energy: " << nsteps << " steps, artifacts in " << outdir.string() << "\n";
  return 0;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

int run_estimate(const RunConfig& cfg) try {
  const fs::path outdir = prepare_output(cfg);
  const PipeMesh mesh = load_checked_mesh(cfg);
  const StokesConstantEstimate est = estimate_stokes_constant(
      mesh, cfg.material.nu, cfg.dt, cfg.horizon, cfg.cs_samples, cfg.seed, cfg.cs_amplitude);

  ordered_json j;
  j["command"] = "estimate-cs";
  j["mesh"] = mesh_json(cfg, mesh);
  j["stokes_constant"] = estimate_json(est, cfg.horizon);
  {
    std::ofstream os(outdir / "estimate.json");
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("cannot write estimate.json");
  }
  std::cout << "c_s >= " << format_float(est.c_s) << " (" << est.valid_samples
            << " samples, seed " << est.seed << ")\n";
  return 0;
} catch (const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return 1;
}

}  // namespace pipeflow

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pipeflow/diagnostics.hpp"
#include "pipeflow/energy.hpp"
#include "pipeflow/momentum.hpp"

namespace pipeflow {

// All data of one run: mesh, material, horizon and the scenario fields as
// callables of (position, time).
struct Scenario {
  const PipeMesh* mesh = nullptr;
  const MaterialLaw* law = nullptr;
  double horizon = 1.0;  // T
  double dt = 0.1;
  std::function<Vec3(const Vec3&, double)> f;          // body force
  std::function<double(const Vec3&, double)> h;        // volumetric heat source
  std::function<double(const Vec3&, double)> theta_inf;  // wall ambient temperature
  std::function<double(const Vec3&, double)> q_e;        // wall enthalpy flux datum
  std::function<Vec3(const Vec3&, double)> u0;  // initial velocity, zero on walls
  std::function<double(const Vec3&, double)> e0;  // initial enthalpy
};

struct PicardReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> increments;  // stopping metric per outer iteration
  std::vector<double> ball_norms;  // velocity-ball surrogate of each iterate
  bool contracting = false;        // increments nonincreasing from iteration 2 on
};

// Owns the discrete spaces and both subsystem solvers for one scenario and
// drives the decoupled fixed-point iteration whose limit is the coupled
// solution: momentum with lagged convection and buoyancy, then energy with
// lagged diffusivity and fresh transport.
class CoupledSolver {
 public:
  explicit CoupledSolver(const Scenario& scenario, const AssemblyOptions& assembly = {},
                         const SaddleOptions& saddle = {}, const NewtonOptions& newton = {});
  CoupledSolver(const CoupledSolver&) = delete;
  CoupledSolver& operator=(const CoupledSolver&) = delete;

  const FeSpace& velocity_space() const { return *vel_; }
  const FeSpace& pressure_space() const { return *pres_; }
  const FeSpace& scalar_space() const { return *scalar_; }
  const MomentumSystem& momentum() const { return *msys_; }
  const EnergySystem& energy() const { return *esys_; }
  int nsteps() const { return nsteps_; }
  double dt() const { return scenario_.dt; }
  const std::vector<double>& initial_velocity() const { return u0_; }
  const std::vector<double>& initial_enthalpy() const { return e0_; }
  const Trajectory& body_force_frames() const { return f_frames_; }
  const std::vector<EnergyStepData>& energy_data_frames() const { return data_frames_; }
  // L2-in-time of the spatial L2 norms of f, the size entering the
  // smallness check
  double body_force_norm() const;
  Trajectory constant_extension(const std::vector<double>& frame) const {
    return constant_trajectory(frame);
  }

  struct MapResult {
    Trajectory u, p, e;
  };
  // one application of the decoupled solution map to the lagged pair
  MapResult apply_map(const Trajectory& u_lag, const Trajectory& e_lag) const;

  struct PicardResult {
    Trajectory u, p, e;
    PicardReport report;
  };
  // iterate the map from the constant-in-time extension of the initial data;
  // stopping metric: max over the time grid of H1(du) + L2(de), relative to
  // the first increment.  relax in (0,1] blends consecutive iterates.
  PicardResult picard_solve(double tol, int max_outer, double relax = 1.0) const;

  // assembled heat-functional load frames (volume source + wall data), the
  // right side the Gronwall diagnostic measures in the dual norm
  std::vector<std::vector<double>> thermal_loads() const;

 private:
  Trajectory constant_trajectory(const std::vector<double>& frame) const;

  Scenario scenario_;
  int nsteps_;
  std::unique_ptr<FeSpace> vel_, pres_, scalar_;
  std::unique_ptr<MomentumSystem> msys_;
  std::unique_ptr<EnergySystem> esys_;
  SaddleOptions saddle_;
  NewtonOptions newton_;
  Trajectory f_frames_;
  std::vector<EnergyStepData> data_frames_;
  std::vector<double> u0_, e0_;
};

struct SmallnessCheck {
  bool pass = false;
  double margin = 0.0;     // threshold - data_norm
  double threshold = 0.0;  // 1 / (4 c_s^2 T^{1/8})
  double data_norm = 0.0;  // rho_max ||f|| + ||u0||
};

// the main existence condition: 1/(4 c_s^2 T^{1/8}) >= rho_max ||f|| + ||u0||
SmallnessCheck check_smallness(double f_norm, double u0_norm, double horizon, double c_s,
                               double rho_max);

struct StokesConstantEstimate {
  double c_s = 0.0;  // max observed ratio; a lower bound for the mesh at hand
  int valid_samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> ratios;
};

// Randomized lower bound on the constant that maps data size to the
// velocity-ball norm over transient Stokes solves on this mesh: ratio
// ball_norm(u) / ||f||_{L2(I;L2)} over seeded random forcings with zero
// initial velocity.  Mesh-dependent; never a claim about the continuum
// constant.
StokesConstantEstimate estimate_stokes_constant(const PipeMesh& mesh, double nu, double dt,
                                                double horizon, int samples, std::uint64_t seed,
                                                double amplitude = 1.0);

}  // namespace pipeflow

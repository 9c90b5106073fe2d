#pragma once

#include <vector>

#include "pipeflow/assembly.hpp"
#include "pipeflow/fe_space.hpp"
#include "pipeflow/linsolve.hpp"
#include "pipeflow/material_law.hpp"

namespace pipeflow {

// Wall and volume data of one energy step, nodal on the scalar space and
// evaluated at the new time level.
struct EnergyStepData {
  std::vector<double> theta_inf;  // ambient temperature on the walls
  std::vector<double> q_e;        // enthalpy-side wall flux datum
  std::vector<double> h;          // volumetric heat source
};

struct NewtonOptions {
  double tol = 1e-11;  // residual norm relative to the load norm
  int max_iter = 30;
  double min_damping = 1.0 / 1024.0;
  SolverOptions linear;
};

struct EnergyStepReport {
  bool converged = false;
  int newton_iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
};

// Enthalpy subsystem: implicit Euler for
//   (M/dt + A_kappa(e_lag) + C(u)) e + wall alpha*beta(e) pairing
//     = M e_prev/dt + (h,phi) + wall (alpha theta_inf + q_e, phi) + nu d(u,u,phi)
// The diffusivity is frozen at the lagged iterate nodally; the wall
// nonlinearity beta(e) stays implicit and is resolved by damped Newton.
// Homogeneous Neumann on the cuts is imposed by omission.
class EnergySystem {
 public:
  EnergySystem(const FeSpace& scalar, const FeSpace& vel, const MaterialLaw& law, double nu,
               double dt, const AssemblyOptions& opt = {});
  EnergySystem(const EnergySystem&) = delete;
  EnergySystem& operator=(const EnergySystem&) = delete;

  EnergyStepReport step(const std::vector<double>& e_prev, const std::vector<double>& e_lag,
                        const std::vector<double>& u, const EnergyStepData& data,
                        std::vector<double>& e, const NewtonOptions& opt = {}) const;

  // damped Newton on F(e) = base e + gamma(e) - rhs given the frozen linear
  // part; exposed so the inner nonlinear solve is testable on its own
  EnergyStepReport newton_boundary_solve(const CsrMatrix& base, bool symmetric,
                                         const std::vector<double>& rhs, std::vector<double>& e,
                                         const NewtonOptions& opt = {}) const;

  // discrete wall pairing gamma(beta(e), w) = sum_w w_i (wall load of alpha beta(e))
  double wall_pairing(const std::vector<double>& e, const std::vector<double>& w) const;

  const FeSpace& space() const { return scalar_; }
  const FeSpace& velocity_space() const { return vel_; }
  const MaterialLaw& material() const { return law_; }
  const CsrMatrix& mass() const { return mass_; }
  double dt() const { return dt_; }

 private:
  const FeSpace& scalar_;
  const FeSpace& vel_;
  const MaterialLaw& law_;
  double nu_, dt_;
  double alpha_;
  AssemblyOptions opt_;
  CsrMatrix pattern_;  // cell pattern shared by every assembled operator
  CsrMatrix mass_;
};

struct TransientEnergyResult {
  std::vector<std::vector<double>> e;  // nsteps+1 frames
  std::vector<EnergyStepReport> reports;
};

TransientEnergyResult solve_energy_transient(const EnergySystem& sys,
                                             const std::vector<std::vector<double>>& e_lag,
                                             const std::vector<std::vector<double>>& u,
                                             const std::vector<EnergyStepData>& data,
                                             const std::vector<double>& e0,
                                             const NewtonOptions& opt = {});

}  // namespace pipeflow

#pragma once

#include <cstdint>
#include <vector>

#include "pipeflow/assembly.hpp"
#include "pipeflow/fe_space.hpp"
#include "pipeflow/linsolve.hpp"
#include "pipeflow/material_law.hpp"

namespace pipeflow {

// One velocity/pressure frame per grid time t_k = k dt.
using Trajectory = std::vector<std::vector<double>>;

struct MomentumStepReport {
  SolveReport saddle;
  double divergence_residual = 0.0;  // ||B u|| after the step
};

// Transient momentum/mass subsystem on a Taylor-Hood pair: implicit Euler
// for the linear problem
//   (M/dt + nu K) u - Bt P = M u_prev/dt + load,   B u = 0,   u = 0 on walls.
// Convection never enters the operator; the lagged iterate contributes only
// through momentum_rhs.  Walls are eliminated symmetrically; the do-nothing
// condition on the cuts is natural for the gradient-form stiffness and
// assembles nothing.
class MomentumSystem {
 public:
  MomentumSystem(const FeSpace& vel, const FeSpace& pres, double nu, double dt,
                 const AssemblyOptions& opt = {});
  MomentumSystem(const MomentumSystem&) = delete;
  MomentumSystem& operator=(const MomentumSystem&) = delete;

  // load_i = (rho(e_lag) f, v_i) - ((u_lag.grad) u_lag, v_i); e_lag nodal
  // on the scalar space, f and u_lag nodal on the velocity space
  std::vector<double> momentum_rhs(const FeSpace& scalar, const std::vector<double>& e_lag,
                                   const std::vector<double>& u_lag, const std::vector<double>& f,
                                   const MaterialLaw& law) const;

  MomentumStepReport step(const std::vector<double>& u_prev, const std::vector<double>& load,
                          std::vector<double>& u, std::vector<double>& p,
                          const SaddleOptions& opt = {}) const;

  const FeSpace& velocity_space() const { return vel_; }
  const FeSpace& pressure_space() const { return pres_; }
  const CsrMatrix& mass() const { return mass_; }
  const CsrMatrix& divergence() const { return div_; }
  double viscosity() const { return nu_; }
  double dt() const { return dt_; }
  // true when the mesh has no open cuts and the pressure level was fixed by
  // pinning one dof (enclosed flow has a constant-pressure nullspace)
  bool pressure_pinned() const { return pin_ >= 0; }

 private:
  const FeSpace& vel_;
  const FeSpace& pres_;
  double nu_, dt_;
  AssemblyOptions opt_;
  int pin_ = -1;
  std::vector<std::uint8_t> wall_mask_;
  CsrMatrix mass_;       // velocity mass, unconstrained (history load)
  CsrMatrix op_;         // M/dt + nu K, walls eliminated
  CsrMatrix div_;        // divergence with wall columns zeroed
  CsrMatrix pres_mass_;  // Schur surrogate
  CsrMatrix pres_stiff_;  // transient Schur term (cut dofs eliminated)
  mutable CsrMatrix conv_;  // scratch for the lagged convection pairing
};

struct TransientMomentumResult {
  Trajectory u;  // nsteps+1 frames, frame 0 = initial interpolant
  Trajectory p;  // frame 0 is all zeros (pressure has no initial condition)
  std::vector<MomentumStepReport> reports;
};

// Frames of the lagged trajectories and of f are consumed at the new time
// level of each implicit step.
TransientMomentumResult solve_momentum_transient(const MomentumSystem& sys, const FeSpace& scalar,
                                                 const Trajectory& e_lag, const Trajectory& u_lag,
                                                 const Trajectory& f, const std::vector<double>& u0,
                                                 const MaterialLaw& law,
                                                 const SaddleOptions& opt = {});

}  // namespace pipeflow

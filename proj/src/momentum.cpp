#include "pipeflow/momentum.hpp"

#include <cmath>
#include <stdexcept>

#include "pipeflow/log.hpp"

namespace pipeflow {

MomentumSystem::MomentumSystem(const FeSpace& vel, const FeSpace& pres, double nu, double dt,
                               const AssemblyOptions& opt)
    : vel_(vel), pres_(pres), nu_(nu), dt_(dt), opt_(opt) {
  if (&vel.mesh() != &pres.mesh())
    throw std::invalid_argument("momentum: velocity and pressure meshes differ");
  if (vel.ncomp() != vel.mesh().dim || pres.ncomp() != 1)
    throw std::invalid_argument("momentum: expected a vector velocity and scalar pressure space");
  if (!(nu > 0.0) || !(dt > 0.0)) throw std::invalid_argument("momentum: nu and dt must be positive");

  wall_mask_ = vel.wall_dof_mask();

  mass_ = make_cell_matrix(vel, vel);
  assemble_mass(mass_, vel, opt_);

  CsrMatrix stiff = make_cell_matrix(vel, vel);
  assemble_stiffness(stiff, vel, opt_);
  op_ = mass_;
  for (double& v : op_.vals) v /= dt_;
  op_.axpy_same_pattern(nu_, stiff);
  op_.eliminate_dirichlet(wall_mask_);

  div_ = make_cell_matrix(pres, vel);
  assemble_divergence(div_, pres, vel, opt_);
  div_.eliminate_dirichlet_columns(wall_mask_);

  pres_mass_ = make_cell_matrix(pres, pres);
  assemble_mass(pres_mass_, pres, opt_);

  // pressure Poisson surrogate for the M/dt part of the Schur complement:
  // Dirichlet where the velocity is free (cuts), natural on walls
  pres_stiff_ = make_cell_matrix(pres, pres);
  assemble_stiffness(pres_stiff_, pres, opt_);
  std::vector<std::uint8_t> cut_mask(static_cast<std::size_t>(pres.ndofs()), 0);
  const auto& mesh = vel.mesh();
  bool has_cut = false;
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    if (mesh.boundary[static_cast<std::size_t>(bf)].tag == kWallTag) continue;
    has_cut = true;
    const int* fn = pres.facet_nodes(bf);
    for (int i = 0; i < pres.nodes_per_facet(); ++i) cut_mask[static_cast<std::size_t>(fn[i])] = 1;
  }
  if (!has_cut) {
    pin_ = 0;
    log_info("momentum: mesh has no open cuts; pressure is defined up to a constant, pinning dof 0");
    cut_mask[0] = 1;
  }
  pres_stiff_.eliminate_dirichlet(cut_mask);

  conv_ = make_cell_matrix(vel, vel);
}

std::vector<double> MomentumSystem::momentum_rhs(const FeSpace& scalar,
                                                 const std::vector<double>& e_lag,
                                                 const std::vector<double>& u_lag,
                                                 const std::vector<double>& f,
                                                 const MaterialLaw& law) const {
  if (static_cast<int>(e_lag.size()) != scalar.ndofs())
    throw std::invalid_argument("momentum_rhs: enthalpy field length mismatch");
  std::vector<double> rho(e_lag.size());
  for (std::size_t i = 0; i < e_lag.size(); ++i) {
    if (!std::isfinite(e_lag[i])) throw std::invalid_argument("momentum_rhs: non-finite enthalpy");
    rho[i] = law.density_of_enthalpy(e_lag[i]);
  }
  std::vector<double> load = assemble_weighted_body_load(vel_, scalar, rho, f, opt_);

  bool moving = false;
  for (double v : u_lag) {
    if (!std::isfinite(v)) throw std::invalid_argument("momentum_rhs: non-finite lagged velocity");
    if (v != 0.0) moving = true;
  }
  if (moving) {
    assemble_convection(conv_, vel_, u_lag, opt_);
    std::vector<double> cu(load.size());
    conv_.mult(u_lag.data(), cu.data());
    for (std::size_t i = 0; i < load.size(); ++i) load[i] -= cu[i];
  }
  return load;
}

MomentumStepReport MomentumSystem::step(const std::vector<double>& u_prev,
                                        const std::vector<double>& load, std::vector<double>& u,
                                        std::vector<double>& p, const SaddleOptions& opt) const {
  const int nu_dofs = vel_.ndofs();
  if (static_cast<int>(u_prev.size()) != nu_dofs || static_cast<int>(load.size()) != nu_dofs)
    throw std::invalid_argument("stokes step: field length mismatch");

  std::vector<double> fu(static_cast<std::size_t>(nu_dofs));
  mass_.mult(u_prev.data(), fu.data());
  for (int i = 0; i < nu_dofs; ++i) {
    fu[static_cast<std::size_t>(i)] = fu[static_cast<std::size_t>(i)] / dt_ + load[static_cast<std::size_t>(i)];
    if (wall_mask_[static_cast<std::size_t>(i)]) fu[static_cast<std::size_t>(i)] = 0.0;
  }
  std::vector<double> fp(static_cast<std::size_t>(pres_.ndofs()), 0.0);

  SaddleSystem sys;
  sys.a = &op_;
  sys.b = &div_;
  sys.mp = &pres_mass_;
  sys.lp = &pres_stiff_;
  sys.schur_scale = nu_;
  sys.lp_scale = 1.0 / dt_;
  sys.pin = pin_;

  MomentumStepReport rep;
  rep.saddle = saddle_solve(sys, fu, fp, u, p, opt);
  if (!rep.saddle.converged)
    throw SolveError("stokes step: saddle solver stalled at relative residual " +
                     std::to_string(rep.saddle.residual));
  for (int i = 0; i < nu_dofs; ++i)
    if (wall_mask_[static_cast<std::size_t>(i)]) u[static_cast<std::size_t>(i)] = 0.0;

  std::vector<double> bu(static_cast<std::size_t>(pres_.ndofs()));
  div_.mult(u.data(), bu.data());
  if (pin_ >= 0) bu[static_cast<std::size_t>(pin_)] = 0.0;
  rep.divergence_residual = norm_vec(bu);
  return rep;
}

TransientMomentumResult solve_momentum_transient(const MomentumSystem& sys, const FeSpace& scalar,
                                                 const Trajectory& e_lag, const Trajectory& u_lag,
                                                 const Trajectory& f, const std::vector<double>& u0,
                                                 const MaterialLaw& law, const SaddleOptions& opt) {
  const std::size_t nframes = f.size();
  if (e_lag.size() != nframes || u_lag.size() != nframes || nframes == 0)
    throw std::invalid_argument("momentum transient: trajectory lengths differ");

  TransientMomentumResult out;
  out.u.resize(nframes);
  out.p.resize(nframes);
  out.u[0] = u0;
  out.p[0].assign(static_cast<std::size_t>(sys.pressure_space().ndofs()), 0.0);
  std::vector<double> u = u0, p = out.p[0];
  for (std::size_t k = 1; k < nframes; ++k) {
    const std::vector<double> load = sys.momentum_rhs(scalar, e_lag[k], u_lag[k], f[k], law);
    out.reports.push_back(sys.step(out.u[k - 1], load, u, p, opt));
    out.u[k] = u;
    out.p[k] = p;
  }
  return out;
}

}  // namespace pipeflow

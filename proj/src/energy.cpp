#include "pipeflow/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "pipeflow/log.hpp"

namespace pipeflow {

namespace {

bool all_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

}  // namespace

EnergySystem::EnergySystem(const FeSpace& scalar, const FeSpace& vel, const MaterialLaw& law,
                           double nu, double dt, const AssemblyOptions& opt)
    : scalar_(scalar), vel_(vel), law_(law), nu_(nu), dt_(dt), alpha_(law.law().alpha), opt_(opt) {
  if (&scalar.mesh() != &vel.mesh())
    throw std::invalid_argument("energy: scalar and velocity meshes differ");
  if (scalar.ncomp() != 1) throw std::invalid_argument("energy: scalar space expected");
  if (!(dt > 0.0)) throw std::invalid_argument("energy: dt must be positive");
  pattern_ = make_cell_matrix(scalar, scalar);
  mass_ = pattern_;
  assemble_mass(mass_, scalar, opt_);
}

double EnergySystem::wall_pairing(const std::vector<double>& e, const std::vector<double>& w) const {
  const std::vector<double> load = assemble_wall_composed_load(
      scalar_, e, [this](double ev) { return alpha_ * law_.temperature(ev); }, opt_);
  return dot_vec(load, w);
}

EnergyStepReport EnergySystem::newton_boundary_solve(const CsrMatrix& base, bool symmetric,
                                                     const std::vector<double>& rhs,
                                                     std::vector<double>& e,
                                                     const NewtonOptions& opt) const {
  const int n = scalar_.ndofs();
  if (static_cast<int>(e.size()) != n) e.assign(static_cast<std::size_t>(n), 0.0);

  const auto beta = [this](double ev) { return alpha_ * law_.temperature(ev); };
  const auto beta_slope = [this](double ev) { return alpha_ * law_.temperature_slope(ev); };

  const auto residual = [&](const std::vector<double>& ev, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(n), 0.0);
    base.mult(ev.data(), out.data());
    if (alpha_ > 0.0) {
      const std::vector<double> gamma = assemble_wall_composed_load(scalar_, ev, beta, opt_);
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] += gamma[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] -= rhs[static_cast<std::size_t>(i)];
  };

  EnergyStepReport rep;
  std::vector<double> f(static_cast<std::size_t>(n)), f_trial(static_cast<std::size_t>(n));
  residual(e, f);
  double res = norm_vec(f);
  rep.residual_history.push_back(res);
  const double scale = std::max({res, norm_vec(rhs), 1e-300});
  const double target = opt.tol * scale;

  CsrMatrix jac = pattern_;
  CsrMatrix wall_jac = pattern_;
  std::vector<double> delta(static_cast<std::size_t>(n)), neg_f(static_cast<std::size_t>(n));
  std::vector<double> e_trial(static_cast<std::size_t>(n));

  while (res > target) {
    if (rep.newton_iterations >= opt.max_iter) {
      rep.converged = false;
      rep.residual = res / scale;
      log_info("energy newton: no convergence after " + std::to_string(opt.max_iter) +
               " iterations, residual " + std::to_string(rep.residual));
      return rep;
    }
    jac.vals = base.vals;
    jac.symmetric = symmetric;
    if (alpha_ > 0.0) {
      assemble_wall_composed_jacobian(wall_jac, scalar_, e, beta_slope, opt_);
      jac.axpy_same_pattern(1.0, wall_jac);
    }
    for (int i = 0; i < n; ++i) neg_f[static_cast<std::size_t>(i)] = -f[static_cast<std::size_t>(i)];
    std::fill(delta.begin(), delta.end(), 0.0);
    const SolveReport lin = symmetric ? cg_solve(jac, neg_f, delta, opt.linear)
                                      : gmres_solve(jac, neg_f, delta, opt.linear);
    if (!lin.converged)
      throw SolveError("energy newton: inner linear solve stalled at residual " +
                       std::to_string(lin.residual));

    // monotone damping: beta' in (0, C] makes the semilinear residual
    // decrease for small enough steps
    double s = 1.0;
    double res_trial = res;
    for (;;) {
      for (int i = 0; i < n; ++i)
        e_trial[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i)] + s * delta[static_cast<std::size_t>(i)];
      residual(e_trial, f_trial);
      res_trial = norm_vec(f_trial);
      if (res_trial <= (1.0 - 0.25 * s) * res || s <= opt.min_damping) break;
      s *= 0.5;
    }
    e = e_trial;
    f = f_trial;
    res = res_trial;
    ++rep.newton_iterations;
    rep.residual_history.push_back(res);
  }
  rep.converged = true;
  rep.residual = res / scale;
  return rep;
}

EnergyStepReport EnergySystem::step(const std::vector<double>& e_prev,
                                    const std::vector<double>& e_lag, const std::vector<double>& u,
                                    const EnergyStepData& data, std::vector<double>& e,
                                    const NewtonOptions& opt) const {
  const int n = scalar_.ndofs();
  if (static_cast<int>(e_prev.size()) != n || static_cast<int>(e_lag.size()) != n)
    throw std::invalid_argument("energy step: enthalpy field length mismatch");
  if (static_cast<int>(data.theta_inf.size()) != n || static_cast<int>(data.q_e.size()) != n ||
      static_cast<int>(data.h.size()) != n)
    throw std::invalid_argument("energy step: data field length mismatch");

  std::vector<double> kappa(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double ev = e_lag[static_cast<std::size_t>(i)];
    if (!std::isfinite(ev)) throw std::invalid_argument("energy step: non-finite lagged enthalpy");
    kappa[static_cast<std::size_t>(i)] = law_.diffusivity(ev);
  }

  CsrMatrix base = mass_;
  for (double& v : base.vals) v /= dt_;
  CsrMatrix term = pattern_;
  assemble_scalar_diffusion(term, scalar_, kappa, opt_);
  base.axpy_same_pattern(1.0, term);
  const bool moving = !all_zero(u);
  if (moving) {
    assemble_scalar_transport(term, scalar_, vel_, u, opt_);
    base.axpy_same_pattern(1.0, term);
  }
  base.symmetric = !moving;

  std::vector<double> rhs(static_cast<std::size_t>(n));
  mass_.mult(e_prev.data(), rhs.data());
  for (double& v : rhs) v /= dt_;
  const std::vector<double> g = assemble_thermal_load(scalar_, data.theta_inf, data.q_e, data.h, alpha_, opt_);
  for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(i)];
  if (moving) {
    const std::vector<double> d = assemble_dissipation_load(scalar_, vel_, u, u, opt_);
    for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] += nu_ * d[static_cast<std::size_t>(i)];
  }

  e = e_prev;
  return newton_boundary_solve(base, !moving, rhs, e, opt);
}

TransientEnergyResult solve_energy_transient(const EnergySystem& sys,
                                             const std::vector<std::vector<double>>& e_lag,
                                             const std::vector<std::vector<double>>& u,
                                             const std::vector<EnergyStepData>& data,
                                             const std::vector<double>& e0,
                                             const NewtonOptions& opt) {
  const std::size_t nframes = e_lag.size();
  if (u.size() != nframes || data.size() != nframes || nframes == 0)
    throw std::invalid_argument("energy transient: trajectory lengths differ");

  TransientEnergyResult out;
  out.e.resize(nframes);
  out.e[0] = e0;
  std::vector<double> e = e0;
  for (std::size_t k = 1; k < nframes; ++k) {
    out.reports.push_back(sys.step(out.e[k - 1], e_lag[k], u[k], data[k], e, opt));
    if (!out.reports.back().converged)
      throw SolveError("energy transient: step " + std::to_string(k) + " did not converge");
    out.e[k] = e;
  }
  return out;
}

}  // namespace pipeflow

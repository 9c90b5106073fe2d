#include "pipeflow/coupler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "pipeflow/log.hpp"

namespace pipeflow {

CoupledSolver::CoupledSolver(const Scenario& scenario, const AssemblyOptions& assembly,
                             const SaddleOptions& saddle, const NewtonOptions& newton)
    : scenario_(scenario), saddle_(saddle), newton_(newton) {
  if (!scenario.mesh || !scenario.law) throw std::invalid_argument("scenario: mesh and material required");
  if (!(scenario.horizon > 0.0) || !(scenario.dt > 0.0))
    throw std::invalid_argument("scenario: horizon and dt must be positive");
  const double steps = scenario.horizon / scenario.dt;
  nsteps_ = static_cast<int>(std::lround(steps));
  if (nsteps_ < 1 || std::abs(steps - nsteps_) > 1e-9 * steps)
    throw std::invalid_argument("scenario: horizon must be an integer multiple of dt");
  if (!scenario.f || !scenario.h || !scenario.theta_inf || !scenario.q_e || !scenario.u0 ||
      !scenario.e0)
    throw std::invalid_argument("scenario: all data fields must be set");

  const PipeMesh& mesh = *scenario.mesh;
  vel_ = std::make_unique<FeSpace>(mesh, 2, mesh.dim);
  pres_ = std::make_unique<FeSpace>(mesh, 1, 1);
  scalar_ = std::make_unique<FeSpace>(mesh, 1, 1);
  const double nu = scenario.law->law().nu;
  msys_ = std::make_unique<MomentumSystem>(*vel_, *pres_, nu, scenario.dt, assembly);
  esys_ = std::make_unique<EnergySystem>(*scalar_, *vel_, *scenario.law, nu, scenario.dt, assembly);

  f_frames_.resize(static_cast<std::size_t>(nsteps_) + 1);
  data_frames_.resize(static_cast<std::size_t>(nsteps_) + 1);
  for (int k = 0; k <= nsteps_; ++k) {
    const double t = k * scenario.dt;
    f_frames_[static_cast<std::size_t>(k)] = vel_->interpolate_vector(scenario.f, t);
    auto& d = data_frames_[static_cast<std::size_t>(k)];
    d.theta_inf = scalar_->interpolate(scenario.theta_inf, t);
    d.q_e = scalar_->interpolate(scenario.q_e, t);
    d.h = scalar_->interpolate(scenario.h, t);
  }

  u0_ = vel_->interpolate_vector(scenario.u0, 0.0);
  e0_ = scalar_->interpolate(scenario.e0, 0.0);
  const auto mask = vel_->wall_dof_mask();
  double u0_scale = 0.0;
  for (double v : u0_) u0_scale = std::max(u0_scale, std::abs(v));
  for (std::size_t i = 0; i < u0_.size(); ++i) {
    if (!mask[i]) continue;
    if (std::abs(u0_[i]) > 1e-9 * (1.0 + u0_scale))
      throw std::invalid_argument("scenario: initial velocity does not vanish on the walls");
    u0_[i] = 0.0;
  }
}

double CoupledSolver::body_force_norm() const {
  const std::size_t nframes = f_frames_.size();
  std::vector<double> sq(nframes);
  for (std::size_t k = 0; k < nframes; ++k) {
    const double v = l2_norm(*vel_, f_frames_[k]);
    sq[k] = v * v;
  }
  double acc = 0.0;
  for (std::size_t k = 1; k < nframes; ++k) acc += 0.5 * scenario_.dt * (sq[k - 1] + sq[k]);
  return std::sqrt(acc);
}

Trajectory CoupledSolver::constant_trajectory(const std::vector<double>& frame) const {
  return Trajectory(static_cast<std::size_t>(nsteps_) + 1, frame);
}

CoupledSolver::MapResult CoupledSolver::apply_map(const Trajectory& u_lag,
                                                  const Trajectory& e_lag) const {
  TransientMomentumResult mom = solve_momentum_transient(*msys_, *scalar_, e_lag, u_lag, f_frames_,
                                                         u0_, *scenario_.law, saddle_);
  TransientEnergyResult en = solve_energy_transient(*esys_, e_lag, mom.u, data_frames_, e0_, newton_);
  MapResult out;
  out.u = std::move(mom.u);
  out.p = std::move(mom.p);
  out.e = std::move(en.e);
  return out;
}

CoupledSolver::PicardResult CoupledSolver::picard_solve(double tol, int max_outer,
                                                        double relax) const {
  if (!(relax > 0.0) || relax > 1.0) throw std::invalid_argument("picard: relax must be in (0,1]");
  PicardResult out;
  Trajectory u_lag = constant_trajectory(u0_);
  Trajectory e_lag = constant_trajectory(e0_);

  double first_increment = -1.0;
  for (int it = 1; it <= max_outer; ++it) {
    MapResult mapped = apply_map(u_lag, e_lag);
    out.report.ball_norms.push_back(ball_norm_surrogate(*vel_, mapped.u, scenario_.dt).value);

    double inc = 0.0;
    std::vector<double> du, de;
    for (int k = 0; k <= nsteps_; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      du = mapped.u[ku];
      for (std::size_t i = 0; i < du.size(); ++i) du[i] -= u_lag[ku][i];
      de = mapped.e[ku];
      for (std::size_t i = 0; i < de.size(); ++i) de[i] -= e_lag[ku][i];
      inc = std::max(inc, h1_norm(*vel_, du) + l2_norm(*scalar_, de));
    }
    out.report.increments.push_back(inc);
    out.report.iterations = it;
    if (first_increment < 0.0) first_increment = inc;
    log_debug("picard iteration " + std::to_string(it) + " increment " + std::to_string(inc));

    const bool done = first_increment == 0.0 || inc <= tol * first_increment;
    if (relax == 1.0 || done) {
      u_lag = std::move(mapped.u);
      e_lag = std::move(mapped.e);
      out.p = std::move(mapped.p);
    } else {
      for (int k = 0; k <= nsteps_; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < u_lag[ku].size(); ++i)
          u_lag[ku][i] += relax * (mapped.u[ku][i] - u_lag[ku][i]);
        for (std::size_t i = 0; i < e_lag[ku].size(); ++i)
          e_lag[ku][i] += relax * (mapped.e[ku][i] - e_lag[ku][i]);
      }
      out.p = std::move(mapped.p);
    }
    if (done) {
      out.report.converged = true;
      break;
    }
  }

  const auto& incs = out.report.increments;
  out.report.contracting = incs.size() >= 2;
  for (std::size_t i = 2; i < incs.size(); ++i)
    if (incs[i] > incs[i - 1]) out.report.contracting = false;
  if (!out.report.converged)
    log_info("picard: no convergence in " + std::to_string(max_outer) + " iterations");

  out.u = std::move(u_lag);
  out.e = std::move(e_lag);
  return out;
}

std::vector<std::vector<double>> CoupledSolver::thermal_loads() const {
  std::vector<std::vector<double>> out;
  out.reserve(data_frames_.size());
  const double alpha = scenario_.law->law().alpha;
  for (const auto& d : data_frames_)
    out.push_back(assemble_thermal_load(*scalar_, d.theta_inf, d.q_e, d.h, alpha));
  return out;
}

SmallnessCheck check_smallness(double f_norm, double u0_norm, double horizon, double c_s,
                               double rho_max) {
  if (!(horizon > 0.0) || !(c_s > 0.0) || !(rho_max > 0.0))
    throw std::invalid_argument("check_smallness: horizon, c_s, rho_max must be positive");
  SmallnessCheck out;
  out.threshold = 1.0 / (4.0 * c_s * c_s * std::pow(horizon, 0.125));
  out.data_norm = rho_max * f_norm + u0_norm;
  out.margin = out.threshold - out.data_norm;
  out.pass = out.margin >= 0.0;
  return out;
}

StokesConstantEstimate estimate_stokes_constant(const PipeMesh& mesh, double nu, double dt,
                                                double horizon, int samples, std::uint64_t seed,
                                                double amplitude) {
  if (samples < 1) throw std::invalid_argument("estimate_stokes_constant: at least one sample");
  const double steps = horizon / dt;
  const int nsteps = static_cast<int>(std::lround(steps));
  if (nsteps < 1 || std::abs(steps - nsteps) > 1e-9 * steps)
    throw std::invalid_argument("estimate_stokes_constant: horizon must be a multiple of dt");

  FeSpace vel(mesh, 2, mesh.dim);
  FeSpace pres(mesh, 1, 1);
  MomentumSystem msys(vel, pres, nu, dt);
  const std::vector<double> ones(static_cast<std::size_t>(pres.ndofs()), 1.0);
  const std::vector<double> u_zero(static_cast<std::size_t>(vel.ndofs()), 0.0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-amplitude, amplitude);

  StokesConstantEstimate out;
  out.seed = seed;
  for (int s = 0; s < samples; ++s) {
    // smooth random forcing: per component a few fixed space-time modes
    double c[3][4];
    for (int comp = 0; comp < 3; ++comp)
      for (int m = 0; m < 4; ++m) c[comp][m] = coeff(rng);
    const auto f = [&](const Vec3& x, double t) {
      Vec3 v;
      for (int comp = 0; comp < mesh.dim; ++comp)
        v[comp] = c[comp][0] + c[comp][1] * std::sin(x.x) + c[comp][2] * std::cos(x.y) +
                  c[comp][3] * std::sin(t);
      return v;
    };

    std::vector<double> f_l2(static_cast<std::size_t>(nsteps) + 1);
    Trajectory u(static_cast<std::size_t>(nsteps) + 1);
    u[0] = u_zero;
    std::vector<double> uk = u_zero, pk(static_cast<std::size_t>(pres.ndofs()), 0.0);
    for (int k = 0; k <= nsteps; ++k) {
      const std::vector<double> fk = vel.interpolate_vector(f, k * dt);
      f_l2[static_cast<std::size_t>(k)] = l2_norm(vel, fk);
      if (k == 0) continue;
      const std::vector<double> load = assemble_weighted_body_load(vel, pres, ones, fk);
      msys.step(u[static_cast<std::size_t>(k) - 1], load, uk, pk);
      u[static_cast<std::size_t>(k)] = uk;
    }

    double f_sq = 0.0;
    for (int k = 0; k < nsteps; ++k)
      f_sq += 0.5 * dt *
              (f_l2[static_cast<std::size_t>(k)] * f_l2[static_cast<std::size_t>(k)] +
               f_l2[static_cast<std::size_t>(k) + 1] * f_l2[static_cast<std::size_t>(k) + 1]);
    const double denom = std::sqrt(f_sq);
    if (denom <= 1e-14) {
      log_debug("estimate_stokes_constant: degenerate sample skipped");
      continue;
    }
    const double ratio = ball_norm_surrogate(vel, u, dt).value / denom;
    out.ratios.push_back(ratio);
    out.c_s = std::max(out.c_s, ratio);
    ++out.valid_samples;
  }
  if (out.valid_samples == 0)
    throw std::runtime_error("estimate_stokes_constant: every sample was degenerate");
  return out;
}

}  // namespace pipeflow

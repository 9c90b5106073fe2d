#include "pipeflow/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "pipeflow/assembly.hpp"
#include "pipeflow/linsolve.hpp"
#include "pipeflow/quadrature.hpp"

namespace pipeflow {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite field value");
}

int norm_degree(const FeSpace& space, int quad_degree) {
  return quad_degree > 0 ? quad_degree : 2 * space.degree() + 1;
}

// integral of fn(value, gradient-rows) over the mesh; the callable receives
// the interpolated field components and per-component physical gradients
template <class Fn>
double integrate_cells(const FeSpace& space, const std::vector<double>& v, int quad_degree, Fn&& fn) {
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, quad_degree);
  const BasisTable bt = tabulate_basis(mesh.dim, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  const int nc = space.ncomp();
  double total = 0.0;
  std::vector<Vec3> g(static_cast<std::size_t>(n));
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    CellMap cm;
    cm.compute(mesh, c);
    const int* nodes = space.cell_nodes(c);
    for (int q = 0; q < nq; ++q) {
      const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
      const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
      for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = cm.grad(bt.ref_grad[static_cast<std::size_t>(q * n + i)]);
      double val[3] = {0.0, 0.0, 0.0};
      Vec3 grad[3];
      for (int k = 0; k < n; ++k) {
        for (int comp = 0; comp < nc; ++comp) {
          const double vk = v[static_cast<std::size_t>(nodes[k] * nc + comp)];
          val[comp] += nv[k] * vk;
          grad[comp] = grad[comp] + vk * g[static_cast<std::size_t>(k)];
        }
      }
      total += w * fn(cm.point(rule.points[static_cast<std::size_t>(q)]), val, grad);
    }
  }
  return total;
}

// integral of fn over the facets of one boundary tag; fn sees the facet
// normal and the interpolated trace values of the fields
template <class Fn>
double integrate_cut_facets(const FeSpace& space, int tag, const std::vector<double>& v, Fn&& fn) {
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim - 1, 2 * space.degree() + 1);
  const BasisTable bt = tabulate_basis(mesh.dim - 1, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  const int nc = space.ncomp();
  double total = 0.0;
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    const auto& facet = mesh.boundary[static_cast<std::size_t>(bf)];
    if (facet.tag != tag) continue;
    FacetMap fm;
    fm.compute(mesh, bf);
    const int* fn_nodes = space.facet_nodes(bf);
    for (int q = 0; q < nq; ++q) {
      const double w = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
      const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
      double val[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < n; ++k)
        for (int comp = 0; comp < nc; ++comp)
          val[comp] += nv[k] * v[static_cast<std::size_t>(fn_nodes[k] * nc + comp)];
      total += w * fn(facet.normal, val);
    }
  }
  return total;
}

}  // namespace

double lp_norm(const FeSpace& space, const std::vector<double>& v, double p, int quad_degree) {
  check_finite(v, "lp_norm");
  const double integral = integrate_cells(
      space, v, norm_degree(space, quad_degree), [&](const Vec3&, const double* val, const Vec3*) {
        double m2 = 0.0;
        for (int c = 0; c < space.ncomp(); ++c) m2 += val[c] * val[c];
        return std::pow(m2, 0.5 * p);
      });
  return std::pow(integral, 1.0 / p);
}

double w1p_seminorm(const FeSpace& space, const std::vector<double>& v, double p, int quad_degree) {
  check_finite(v, "w1p_seminorm");
  const double integral = integrate_cells(
      space, v, norm_degree(space, quad_degree), [&](const Vec3&, const double*, const Vec3* grad) {
        double m2 = 0.0;
        for (int c = 0; c < space.ncomp(); ++c) m2 += dot(grad[c], grad[c]);
        return std::pow(m2, 0.5 * p);
      });
  return std::pow(integral, 1.0 / p);
}

double w1p_norm(const FeSpace& space, const std::vector<double>& v, double p, int quad_degree) {
  check_finite(v, "w1p_norm");
  const double integral = integrate_cells(
      space, v, norm_degree(space, quad_degree), [&](const Vec3&, const double* val, const Vec3* grad) {
        double v2 = 0.0, g2 = 0.0;
        for (int c = 0; c < space.ncomp(); ++c) {
          v2 += val[c] * val[c];
          g2 += dot(grad[c], grad[c]);
        }
        return std::pow(v2, 0.5 * p) + std::pow(g2, 0.5 * p);
      });
  return std::pow(integral, 1.0 / p);
}

double l2_norm(const FeSpace& space, const std::vector<double>& v) { return lp_norm(space, v, 2.0); }

double h1_norm(const FeSpace& space, const std::vector<double>& v) { return w1p_norm(space, v, 2.0); }

double l2_error(const FeSpace& space, const std::vector<double>& v,
                const std::function<double(const Vec3&)>& exact, int quad_degree) {
  check_finite(v, "l2_error");
  const double integral = integrate_cells(
      space, v, norm_degree(space, quad_degree), [&](const Vec3& x, const double* val, const Vec3*) {
        const double d = val[0] - exact(x);
        return d * d;
      });
  return std::sqrt(integral);
}

double l2_error_vector(const FeSpace& space, const std::vector<double>& v,
                       const std::function<Vec3(const Vec3&)>& exact, int quad_degree) {
  check_finite(v, "l2_error_vector");
  const double integral = integrate_cells(
      space, v, norm_degree(space, quad_degree), [&](const Vec3& x, const double* val, const Vec3*) {
        const Vec3 ex = exact(x);
        double d2 = 0.0;
        for (int c = 0; c < space.ncomp(); ++c) {
          const double d = val[c] - ex[c];
          d2 += d * d;
        }
        return d2;
      });
  return std::sqrt(integral);
}

namespace {

// trapezoid integral of per-frame samples^power over the uniform grid
double trapz_pow(const std::vector<double>& samples, double dt, double power) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k)
    s += 0.5 * dt * (std::pow(samples[k], power) + std::pow(samples[k + 1], power));
  return s;
}

}  // namespace

BallNormSurrogate ball_norm_surrogate(const FeSpace& vel, const std::vector<std::vector<double>>& u,
                                      double dt, int quad_degree) {
  if (u.empty()) throw std::invalid_argument("ball_norm_surrogate: empty trajectory");
  BallNormSurrogate out;
  out.quad_degree = norm_degree(vel, quad_degree);
  std::vector<double> a(u.size()), b(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    a[k] = lp_norm(vel, u[k], 24.0, out.quad_degree);
    b[k] = w1p_norm(vel, u[k], 24.0 / 11.0, out.quad_degree);
  }
  out.l4_l24 = std::pow(trapz_pow(a, dt, 4.0), 0.25);
  out.l8_w = std::pow(trapz_pow(b, dt, 8.0), 0.125);
  out.value = out.l4_l24 + out.l8_w;
  return out;
}

std::vector<double> backflow_energy(const FeSpace& vel, const std::vector<double>& u) {
  check_finite(u, "backflow_energy");
  const int ncuts = vel.mesh().n_cuts();
  std::vector<double> out(static_cast<std::size_t>(ncuts), 0.0);
  for (int tag = 1; tag <= ncuts; ++tag) {
    out[static_cast<std::size_t>(tag - 1)] =
        integrate_cut_facets(vel, tag, u, [&](const Vec3& normal, const double* val) {
          const Vec3 uv{val[0], val[1], val[2]};
          const double un = dot(uv, normal);
          return un < 0.0 ? 0.5 * (-un) * dot(uv, uv) : 0.0;
        });
  }
  return out;
}

std::vector<double> cut_fluxes(const FeSpace& vel, const std::vector<double>& u) {
  check_finite(u, "cut_fluxes");
  const int ncuts = vel.mesh().n_cuts();
  std::vector<double> out(static_cast<std::size_t>(ncuts), 0.0);
  for (int tag = 1; tag <= ncuts; ++tag) {
    out[static_cast<std::size_t>(tag - 1)] =
        integrate_cut_facets(vel, tag, u, [&](const Vec3& normal, const double* val) {
          return dot(Vec3{val[0], val[1], val[2]}, normal);
        });
  }
  return out;
}

EnergyBudget energy_budget(const FeSpace& vel, const std::vector<std::vector<double>>& u) {
  EnergyBudget out;
  out.kinetic.reserve(u.size());
  out.dissipation.reserve(u.size());
  out.fluxes.reserve(u.size());
  for (const auto& frame : u) {
    const double l2 = l2_norm(vel, frame);
    out.kinetic.push_back(0.5 * l2 * l2);
    const double semi = w1p_seminorm(vel, frame, 2.0);
    out.dissipation.push_back(semi * semi);
    out.fluxes.push_back(cut_fluxes(vel, frame));
  }
  return out;
}

CsrMatrix make_h1_riesz_matrix(const FeSpace& scalar) {
  CsrMatrix k = make_cell_matrix(scalar, scalar);
  assemble_stiffness(k, scalar);
  CsrMatrix m = make_cell_matrix(scalar, scalar);
  assemble_mass(m, scalar);
  k.axpy_same_pattern(1.0, m);
  k.symmetric = true;
  return k;
}

double dual_norm(const CsrMatrix& riesz, const std::vector<double>& g) {
  check_finite(g, "dual_norm");
  std::vector<double> z(g.size(), 0.0);
  SolverOptions opt;
  opt.tol = 1e-12;
  const SolveReport rep = cg_solve(riesz, g, z, opt);
  if (!rep.converged) throw SolveError("dual_norm: Riesz solve stalled");
  const double v = dot_vec(g, z);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

GronwallResult gronwall_bound(const FeSpace& scalar, const FeSpace& vel,
                              const std::vector<std::vector<double>>& e,
                              const std::vector<std::vector<double>>& u,
                              const std::vector<std::vector<double>>& g, double dt, double c1,
                              double c2, double c3) {
  const std::size_t nframes = e.size();
  if (u.size() != nframes || g.size() != nframes || nframes == 0)
    throw std::invalid_argument("gronwall_bound: trajectory lengths differ");

  const CsrMatrix riesz = make_h1_riesz_matrix(scalar);
  std::vector<double> growth(nframes), source(nframes);
  for (std::size_t k = 0; k < nframes; ++k) {
    const double u_l4 = lp_norm(vel, u[k], 4.0);
    growth[k] = c2 * std::pow(u_l4, 8.0) + c3;
    const double w = w1p_norm(vel, u[k], 12.0 / 5.0);
    const double gd = dual_norm(riesz, g[k]);
    source[k] = c1 * (gd + w * w) * (gd + w * w);
  }

  GronwallResult out;
  out.bound.resize(nframes);
  out.lhs.resize(nframes);
  const double e0 = l2_norm(scalar, e[0]);
  double growth_int = 0.0, source_int = 0.0;
  out.satisfied = true;
  for (std::size_t k = 0; k < nframes; ++k) {
    if (k > 0) {
      growth_int += 0.5 * dt * (growth[k - 1] + growth[k]);
      source_int += 0.5 * dt * (source[k - 1] + source[k]);
    }
    out.bound[k] = std::exp(growth_int) * (e0 * e0 + source_int);
    const double ek = l2_norm(scalar, e[k]);
    out.lhs[k] = ek * ek;
    if (out.lhs[k] > out.bound[k] * (1.0 + 1e-12)) out.satisfied = false;
  }
  return out;
}

double convection_pairing(const FeSpace& vel, const std::vector<double>& w,
                          const std::vector<double>& u, const std::vector<double>& v) {
  CsrMatrix c = make_cell_matrix(vel, vel);
  assemble_convection(c, vel, w);
  std::vector<double> cu(u.size());
  c.mult(u.data(), cu.data());
  return dot_vec(v, cu);
}

double transport_pairing(const FeSpace& scalar, const FeSpace& vel, const std::vector<double>& w,
                         const std::vector<double>& e, const std::vector<double>& phi) {
  CsrMatrix c = make_cell_matrix(scalar, scalar);
  assemble_scalar_transport(c, scalar, vel, w);
  std::vector<double> ce(e.size());
  c.mult(e.data(), ce.data());
  return dot_vec(phi, ce);
}

double cut_weighted_energy(const FeSpace& vel, const std::vector<double>& w,
                           const std::vector<double>& v) {
  // both fields live on the velocity space; interpolate the pair jointly by
  // stacking the integrand evaluation
  const auto& mesh = vel.mesh();
  double total = 0.0;
  for (int tag = 1; tag <= mesh.n_cuts(); ++tag) {
    // evaluate w.n and |v|^2 from their own traces: integrate_cut_facets
    // walks one field, so interleave manually
    const auto& rule = simplex_rule(mesh.dim - 1, 2 * vel.degree() + 1);
    const BasisTable bt = tabulate_basis(mesh.dim - 1, vel.degree(), rule);
    const int n = bt.n, nq = static_cast<int>(rule.points.size());
    const int nc = vel.ncomp();
    for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
      const auto& facet = mesh.boundary[static_cast<std::size_t>(bf)];
      if (facet.tag != tag) continue;
      FacetMap fm;
      fm.compute(mesh, bf);
      const int* fn_nodes = vel.facet_nodes(bf);
      for (int q = 0; q < nq; ++q) {
        const double wq = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
        const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
        Vec3 wv, vv;
        for (int k = 0; k < n; ++k) {
          for (int comp = 0; comp < nc; ++comp) {
            wv[comp] += nv[k] * w[static_cast<std::size_t>(fn_nodes[k] * nc + comp)];
            vv[comp] += nv[k] * v[static_cast<std::size_t>(fn_nodes[k] * nc + comp)];
          }
        }
        total += wq * 0.5 * dot(wv, facet.normal) * dot(vv, vv);
      }
    }
  }
  return total;
}

double cut_weighted_scalar(const FeSpace& scalar, const FeSpace& vel, const std::vector<double>& w,
                           const std::vector<double>& phi) {
  const auto& mesh = scalar.mesh();
  double total = 0.0;
  const auto& rule = simplex_rule(mesh.dim - 1, 2 * std::max(scalar.degree(), vel.degree()) + 1);
  const BasisTable bs = tabulate_basis(mesh.dim - 1, scalar.degree(), rule);
  const BasisTable bv = tabulate_basis(mesh.dim - 1, vel.degree(), rule);
  const int ns = bs.n, nvb = bv.n, nq = static_cast<int>(rule.points.size());
  const int nc = vel.ncomp();
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    const auto& facet = mesh.boundary[static_cast<std::size_t>(bf)];
    if (facet.tag == kWallTag) continue;
    FacetMap fm;
    fm.compute(mesh, bf);
    const int* sn = scalar.facet_nodes(bf);
    const int* vn = vel.facet_nodes(bf);
    for (int q = 0; q < nq; ++q) {
      const double wq = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
      const double* sv = bs.val.data() + static_cast<std::size_t>(q * ns);
      const double* vv = bv.val.data() + static_cast<std::size_t>(q * nvb);
      Vec3 wv;
      double pv = 0.0;
      for (int k = 0; k < nvb; ++k)
        for (int comp = 0; comp < nc; ++comp) wv[comp] += vv[k] * w[static_cast<std::size_t>(vn[k] * nc + comp)];
      for (int k = 0; k < ns; ++k) pv += sv[k] * phi[static_cast<std::size_t>(sn[k])];
      total += wq * 0.5 * dot(wv, facet.normal) * pv * pv;
    }
  }
  return total;
}

double do_nothing_residual(const FeSpace& vel, const FeSpace& pres, const std::vector<double>& u,
                           const std::vector<double>& p, double nu) {
  const auto& mesh = vel.mesh();
  const auto& rule = simplex_rule(mesh.dim - 1, 2 * vel.degree() + 1);
  const int nq = static_cast<int>(rule.points.size());
  const int nvb = basis_size(mesh.dim, vel.degree());
  const int npb = basis_size(mesh.dim, pres.degree());
  const int nc = vel.ncomp();
  std::vector<double> val(static_cast<std::size_t>(nvb)), pval(static_cast<std::size_t>(npb));
  std::vector<Vec3> gref(static_cast<std::size_t>(nvb)), pgref(static_cast<std::size_t>(npb));
  double total = 0.0;
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    const auto& facet = mesh.boundary[static_cast<std::size_t>(bf)];
    if (facet.tag == kWallTag) continue;
    FacetMap fm;
    fm.compute(mesh, bf);
    CellMap cm;
    cm.compute(mesh, facet.cell);
    const int* vn = vel.cell_nodes(facet.cell);
    const int* pn = pres.cell_nodes(facet.cell);
    for (int q = 0; q < nq; ++q) {
      const double wq = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
      const Vec3 x = fm.point(rule.points[static_cast<std::size_t>(q)]);
      const Vec3 ref = cm.ref_point(x);
      eval_basis(mesh.dim, vel.degree(), ref, val.data(), gref.data());
      eval_basis(mesh.dim, pres.degree(), ref, pval.data(), pgref.data());
      Vec3 dudn;
      for (int k = 0; k < nvb; ++k) {
        const Vec3 g = cm.grad(gref[static_cast<std::size_t>(k)]);
        const double gn = dot(g, facet.normal);
        for (int comp = 0; comp < nc; ++comp)
          dudn[comp] += gn * u[static_cast<std::size_t>(vn[k] * nc + comp)];
      }
      double pq = 0.0;
      for (int k = 0; k < npb; ++k) pq += pval[static_cast<std::size_t>(k)] * p[static_cast<std::size_t>(pn[k])];
      const Vec3 r = nu * dudn - pq * facet.normal;
      total += wq * dot(r, r);
    }
  }
  return std::sqrt(total);
}

}  // namespace pipeflow

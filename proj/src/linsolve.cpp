#include "pipeflow/linsolve.hpp"

#include <algorithm>
#include <cmath>

namespace pipeflow {

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_vec(const std::vector<double>& a) { return std::sqrt(dot_vec(a, a)); }

namespace {

std::vector<double> jacobi_inverse(const CsrMatrix& a, bool require_positive) {
  std::vector<double> d = a.diagonal();
  for (double& v : d) {
    if (require_positive && v <= 0.0) throw SolveError("jacobi: nonpositive diagonal entry");
    if (v == 0.0) v = 1.0;
    v = 1.0 / v;
  }
  return d;
}

}  // namespace

SolveReport cg_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                     const SolverOptions& opt) {
  const int n = a.nrows;
  if (a.ncols != n || static_cast<int>(b.size()) != n)
    throw SolveError("cg: dimension mismatch");
  if (static_cast<int>(x.size()) != n) x.assign(static_cast<std::size_t>(n), 0.0);

  SolveReport rep;
  const double bnorm = norm_vec(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  const std::vector<double> dinv = jacobi_inverse(a, true);

  std::vector<double> r(static_cast<std::size_t>(n)), z(r), p(r), ap(r);
  a.mult(x.data(), ap.data());
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - ap[static_cast<std::size_t>(i)];
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = dinv[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
  p = z;
  double rz = dot_vec(r, z);
  double relres = norm_vec(r) / bnorm;

  for (int it = 0; it < opt.max_iter; ++it) {
    if (relres <= opt.tol) {
      rep.converged = true;
      break;
    }
    a.mult(p.data(), ap.data());
    const double pap = dot_vec(p, ap);
    if (pap <= 0.0) throw SolveError("cg: operator is not positive definite");
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] += alpha * p[static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] -= alpha * ap[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = dinv[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
    const double rz_new = dot_vec(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] + beta * p[static_cast<std::size_t>(i)];
    relres = norm_vec(r) / bnorm;
    rep.iterations = it + 1;
    if (opt.observer) opt.observer(rep.iterations, relres);
  }
  if (relres <= opt.tol) rep.converged = true;
  rep.residual = relres;
  return rep;
}

namespace {

using ApplyFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// flexible GMRES core; prec may change between iterations
SolveReport fgmres_core(int n, const ApplyFn& op, const ApplyFn& prec, const std::vector<double>& b,
                        std::vector<double>& x, double tol, int max_iter, int restart,
                        const IterObserver& observer) {
  SolveReport rep;
  const double bnorm = norm_vec(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  if (static_cast<int>(x.size()) != n) x.assign(static_cast<std::size_t>(n), 0.0);

  const int ld = restart + 1;
  std::vector<std::vector<double>> v(static_cast<std::size_t>(restart + 1));
  std::vector<std::vector<double>> z(static_cast<std::size_t>(restart));
  std::vector<double> h(static_cast<std::size_t>(ld * restart), 0.0);  // h[i + j*ld]
  std::vector<double> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart));
  std::vector<double> g(static_cast<std::size_t>(ld));
  std::vector<double> w(static_cast<std::size_t>(n)), r(static_cast<std::size_t>(n));

  int total = 0;
  double relres = 1.0;
  while (total < max_iter) {
    op(x, r);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
    const double beta = norm_vec(r);
    relres = beta / bnorm;
    if (relres <= tol) {
      rep.converged = true;
      break;
    }
    v[0] = r;
    for (double& t : v[0]) t /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    bool breakdown = false;
    for (; j < restart && total < max_iter; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (z[ju].empty()) z[ju].assign(static_cast<std::size_t>(n), 0.0);
      prec(v[ju], z[ju]);
      op(z[ju], w);
      for (int i = 0; i <= j; ++i) {
        const double hij = dot_vec(w, v[static_cast<std::size_t>(i)]);
        h[static_cast<std::size_t>(i + j * ld)] = hij;
        const auto& vi = v[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] -= hij * vi[static_cast<std::size_t>(k)];
      }
      const double hn = norm_vec(w);
      h[static_cast<std::size_t>(j + 1 + j * ld)] = hn;
      if (v[ju + 1].empty()) v[ju + 1].assign(static_cast<std::size_t>(n), 0.0);
      if (hn > 0.0)
        for (int k = 0; k < n; ++k) v[ju + 1][static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)] / hn;
      else
        breakdown = true;  // happy breakdown: solution lies in the current space

      for (int i = 0; i < j; ++i) {
        const auto hi = static_cast<std::size_t>(i + j * ld);
        const double t = cs[static_cast<std::size_t>(i)] * h[hi] + sn[static_cast<std::size_t>(i)] * h[hi + 1];
        h[hi + 1] = -sn[static_cast<std::size_t>(i)] * h[hi] + cs[static_cast<std::size_t>(i)] * h[hi + 1];
        h[hi] = t;
      }
      const auto hj = static_cast<std::size_t>(j + j * ld);
      const double rr = std::hypot(h[hj], h[hj + 1]);
      if (rr == 0.0) {
        cs[ju] = 1.0;
        sn[ju] = 0.0;
      } else {
        cs[ju] = h[hj] / rr;
        sn[ju] = h[hj + 1] / rr;
      }
      h[hj] = rr;
      h[hj + 1] = 0.0;
      g[ju + 1] = -sn[ju] * g[ju];
      g[ju] = cs[ju] * g[ju];

      ++total;
      relres = std::abs(g[ju + 1]) / bnorm;
      if (observer) observer(total, relres);
      if (relres <= tol || breakdown) {
        ++j;
        break;
      }
    }

    std::vector<double> y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < j; ++k) s -= h[static_cast<std::size_t>(i + k * ld)] * y[static_cast<std::size_t>(k)];
      const double hii = h[static_cast<std::size_t>(i + i * ld)];
      y[static_cast<std::size_t>(i)] = hii != 0.0 ? s / hii : 0.0;
    }
    for (int k = 0; k < j; ++k) {
      const auto& zk = z[static_cast<std::size_t>(k)];
      const double yk = y[static_cast<std::size_t>(k)];
      for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += yk * zk[static_cast<std::size_t>(i)];
    }

    if (relres <= tol || breakdown) {
      op(x, r);
      for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
      relres = norm_vec(r) / bnorm;
      if (relres <= tol * 10.0 || breakdown) {
        rep.converged = relres <= tol * 10.0;
        break;
      }
    }
  }
  rep.iterations = total;
  rep.residual = relres;
  return rep;
}

}  // namespace

SolveReport gmres_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                        const SolverOptions& opt) {
  const int n = a.nrows;
  if (a.ncols != n || static_cast<int>(b.size()) != n)
    throw SolveError("gmres: dimension mismatch");
  const std::vector<double> dinv = jacobi_inverse(a, false);
  const ApplyFn op = [&a](const std::vector<double>& xv, std::vector<double>& yv) {
    a.mult(xv.data(), yv.data());
  };
  const ApplyFn prec = [&dinv, n](const std::vector<double>& rv, std::vector<double>& zv) {
    for (int i = 0; i < n; ++i) zv[static_cast<std::size_t>(i)] = dinv[static_cast<std::size_t>(i)] * rv[static_cast<std::size_t>(i)];
  };
  return fgmres_core(n, op, prec, b, x, opt.tol, opt.max_iter, opt.restart, opt.observer);
}

void SaddleSystem::apply(const std::vector<double>& u, const std::vector<double>& p,
                         std::vector<double>& yu, std::vector<double>& yp) const {
  const int nu = a->nrows, np = b->nrows;
  yu.assign(static_cast<std::size_t>(nu), 0.0);
  yp.assign(static_cast<std::size_t>(np), 0.0);
  a->mult(u.data(), yu.data());
  std::vector<double> pm = p;
  if (pin >= 0) pm[static_cast<std::size_t>(pin)] = 0.0;
  std::vector<double> btp(static_cast<std::size_t>(nu), 0.0);
  b->mult_transpose(pm.data(), btp.data());
  for (int i = 0; i < nu; ++i) yu[static_cast<std::size_t>(i)] -= btp[static_cast<std::size_t>(i)];
  b->mult(u.data(), yp.data());
  if (pin >= 0) yp[static_cast<std::size_t>(pin)] = p[static_cast<std::size_t>(pin)];
}

SolveReport saddle_solve(const SaddleSystem& sys, const std::vector<double>& fu,
                         const std::vector<double>& fp, std::vector<double>& u,
                         std::vector<double>& p, const SaddleOptions& opt) {
  if (!sys.a || !sys.b || !sys.mp) throw SolveError("saddle: system blocks missing");
  const int nu = sys.a->nrows, np = sys.b->nrows;
  if (static_cast<int>(fu.size()) != nu || static_cast<int>(fp.size()) != np)
    throw SolveError("saddle: dimension mismatch");
  if (static_cast<int>(u.size()) != nu) u.assign(static_cast<std::size_t>(nu), 0.0);
  if (static_cast<int>(p.size()) != np) p.assign(static_cast<std::size_t>(np), 0.0);
  const int n = nu + np;

  std::vector<double> rhs(static_cast<std::size_t>(n));
  std::copy(fu.begin(), fu.end(), rhs.begin());
  std::copy(fp.begin(), fp.end(), rhs.begin() + nu);
  std::vector<double> x(static_cast<std::size_t>(n));
  std::copy(u.begin(), u.end(), x.begin());
  std::copy(p.begin(), p.end(), x.begin() + nu);

  // scratch shared by the operator and preconditioner closures
  std::vector<double> su(static_cast<std::size_t>(nu)), sp(static_cast<std::size_t>(np));
  std::vector<double> tu(static_cast<std::size_t>(nu)), tp(static_cast<std::size_t>(np));

  const ApplyFn op = [&](const std::vector<double>& xv, std::vector<double>& yv) {
    std::copy(xv.begin(), xv.begin() + nu, su.begin());
    std::copy(xv.begin() + nu, xv.end(), sp.begin());
    sys.apply(su, sp, tu, tp);
    std::copy(tu.begin(), tu.end(), yv.begin());
    std::copy(tp.begin(), tp.end(), yv.begin() + nu);
  };

  SolverOptions inner;
  inner.tol = opt.inner_tol;
  inner.max_iter = opt.inner_max_iter;

  const ApplyFn prec = [&](const std::vector<double>& rv, std::vector<double>& zv) {
    std::copy(rv.begin(), rv.begin() + nu, su.begin());
    std::copy(rv.begin() + nu, rv.end(), sp.begin());

    // z_p = -(schur_scale Mp^{-1} + lp_scale Lp^{-1}) r_p
    std::vector<double> zp(static_cast<std::size_t>(np), 0.0);
    std::vector<double> tmp(static_cast<std::size_t>(np), 0.0);
    cg_solve(*sys.mp, sp, tmp, inner);
    for (int i = 0; i < np; ++i) zp[static_cast<std::size_t>(i)] = -sys.schur_scale * tmp[static_cast<std::size_t>(i)];
    if (sys.lp && sys.lp_scale != 0.0) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      cg_solve(*sys.lp, sp, tmp, inner);
      for (int i = 0; i < np; ++i) zp[static_cast<std::size_t>(i)] -= sys.lp_scale * tmp[static_cast<std::size_t>(i)];
    }
    if (sys.pin >= 0) zp[static_cast<std::size_t>(sys.pin)] = sp[static_cast<std::size_t>(sys.pin)];

    // z_u = A^{-1} (r_u + Bt z_p)
    std::vector<double> zpm = zp;
    if (sys.pin >= 0) zpm[static_cast<std::size_t>(sys.pin)] = 0.0;
    std::vector<double> btz(static_cast<std::size_t>(nu), 0.0);
    sys.b->mult_transpose(zpm.data(), btz.data());
    for (int i = 0; i < nu; ++i) btz[static_cast<std::size_t>(i)] += su[static_cast<std::size_t>(i)];
    std::vector<double> zu(static_cast<std::size_t>(nu), 0.0);
    cg_solve(*sys.a, btz, zu, inner);

    std::copy(zu.begin(), zu.end(), zv.begin());
    std::copy(zp.begin(), zp.end(), zv.begin() + nu);
  };

  SolveReport rep = fgmres_core(n, op, prec, rhs, x, opt.tol, opt.max_iter, opt.restart, opt.observer);
  std::copy(x.begin(), x.begin() + nu, u.begin());
  std::copy(x.begin() + nu, x.end(), p.begin());
  return rep;
}

}  // namespace pipeflow

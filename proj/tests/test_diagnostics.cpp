#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pipeflow/assembly.hpp"
#include "pipeflow/diagnostics.hpp"
#include "test_helpers.hpp"

using namespace pipeflow;
using testing::channel;
using testing::unit_square;

namespace {

std::vector<std::vector<double>> dense_of(const CsrMatrix& a) {
  std::vector<std::vector<double>> d(static_cast<std::size_t>(a.nrows),
                                     std::vector<double>(static_cast<std::size_t>(a.ncols), 0.0));
  for (int r = 0; r < a.nrows; ++r)
    for (int k = a.row_ptr[static_cast<std::size_t>(r)]; k < a.row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
      d[static_cast<std::size_t>(r)][static_cast<std::size_t>(a.col_idx[static_cast<std::size_t>(k)])] =
          a.vals[static_cast<std::size_t>(k)];
  return d;
}

std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= a[k][c] * x[c];
    x[k] = s / a[k][k];
  }
  return x;
}

std::vector<double> poiseuille(const FeSpace& vel) {
  return vel.interpolate_vector([](const Vec3& x, double) { return Vec3{1.0 - x.y * x.y, 0.0, 0.0}; },
                                0.0);
}

}  // namespace

TEST_CASE("diagnostics: closed-form norms on the channel") {
  // area 8 rectangle [0,4] x [-1,1]
  const PipeMesh mesh = channel(0.3);
  const FeSpace scalar(mesh, 1, 1), vel(mesh, 2, 2);

  const std::vector<double> c3(static_cast<std::size_t>(scalar.ndofs()), 3.0);
  CHECK(l2_norm(scalar, c3) == doctest::Approx(3.0 * std::sqrt(8.0)).epsilon(1e-12));
  CHECK(lp_norm(scalar, c3, 4.0) == doctest::Approx(3.0 * std::pow(8.0, 0.25)).epsilon(1e-12));
  CHECK(w1p_seminorm(scalar, c3, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(h1_norm(scalar, c3) == doctest::Approx(l2_norm(scalar, c3)).epsilon(1e-13));

  const auto vx = scalar.interpolate([](const Vec3& x, double) { return x.x; }, 0.0);
  CHECK(l2_norm(scalar, vx) == doctest::Approx(std::sqrt(128.0 / 3.0)).epsilon(1e-12));
  CHECK(w1p_seminorm(scalar, vx, 2.0) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
  CHECK(h1_norm(scalar, vx) == doctest::Approx(std::sqrt(128.0 / 3.0 + 8.0)).epsilon(1e-12));

  // fractional exponent: constant field makes it exact
  CHECK(lp_norm(scalar, c3, 24.0 / 11.0) ==
        doctest::Approx(3.0 * std::pow(8.0, 11.0 / 24.0)).epsilon(1e-12));

  const auto u = poiseuille(vel);
  CHECK(l2_norm(vel, u) == doctest::Approx(std::sqrt(64.0 / 15.0)).epsilon(1e-12));
  CHECK(w1p_seminorm(vel, u, 2.0) == doctest::Approx(std::sqrt(32.0 / 3.0)).epsilon(1e-12));

  // homogeneity
  std::vector<double> u2 = u;
  for (double& v : u2) v *= 2.0;
  CHECK(lp_norm(vel, u2, 24.0) == doctest::Approx(2.0 * lp_norm(vel, u, 24.0)).epsilon(1e-11));

  CHECK(l2_error_vector(vel, u, [](const Vec3& x) {
          return Vec3{1.0 - x.y * x.y, 0.0, 0.0};
        }) <= 1e-13);
  CHECK(l2_error(scalar, vx, [](const Vec3& x) { return x.x + 1.0; }) ==
        doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));

  std::vector<double> bad = vx;
  bad[0] = std::nan("");
  CHECK_THROWS_AS(l2_norm(scalar, bad), std::invalid_argument);
}

TEST_CASE("diagnostics: ball norm surrogate closed forms") {
  const PipeMesh mesh = channel(0.3);
  const FeSpace vel(mesh, 2, 2);
  const double c = 0.7;
  const std::vector<double> u = vel.interpolate_vector(
      [c](const Vec3&, double) { return Vec3{c, 0.0, 0.0}; }, 0.0);

  const double a = c * std::pow(8.0, 1.0 / 24.0);        // L24 of the constant
  const double b = c * std::pow(8.0, 11.0 / 24.0);       // W^{1,24/11}, zero gradient

  // constant trajectory over T = 1 and T = 16: trapz of a constant is exact
  {
    const auto s = ball_norm_surrogate(vel, {u, u, u}, 0.5);
    CHECK(s.l4_l24 == doctest::Approx(a).epsilon(1e-11));
    CHECK(s.l8_w == doctest::Approx(b).epsilon(1e-11));
    CHECK(s.value == doctest::Approx(a + b).epsilon(1e-11));
    CHECK(s.quad_degree == 5);
  }
  {
    const auto s = ball_norm_surrogate(vel, {u, u, u, u, u}, 4.0);
    CHECK(s.l4_l24 == doctest::Approx(2.0 * a).epsilon(1e-11));       // 16^{1/4}
    CHECK(s.l8_w == doctest::Approx(std::sqrt(2.0) * b).epsilon(1e-11));  // 16^{1/8}
  }

  // trapezoid endpoint weights: ramp from rest over one step
  {
    const std::vector<double> zero(u.size(), 0.0);
    const double dt = 0.25;
    const auto s = ball_norm_surrogate(vel, {zero, u}, dt);
    CHECK(s.l4_l24 == doctest::Approx(std::pow(0.5 * dt, 0.25) * a).epsilon(1e-11));
    CHECK(s.l8_w == doctest::Approx(std::pow(0.5 * dt, 0.125) * b).epsilon(1e-11));
  }

  CHECK_THROWS_AS(ball_norm_surrogate(vel, {}, 0.5), std::invalid_argument);
}

TEST_CASE("diagnostics: cut fluxes and backflow of the channel profile") {
  const PipeMesh mesh = channel(0.15);
  const FeSpace vel(mesh, 2, 2);
  const auto u = poiseuille(vel);

  // inflow cut x=0 (outward normal -x), outflow cut x=4
  const auto flux = cut_fluxes(vel, u);
  REQUIRE(flux.size() == 2);
  CHECK(flux[0] == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
  CHECK(flux[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // (1/2) integral of |u.n| |u|^2 where u enters: only the inflow cut
  const auto back = backflow_energy(vel, u);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == doctest::Approx(16.0 / 35.0).epsilon(1e-7));
  CHECK(back[1] == doctest::Approx(0.0).epsilon(1e-12));

  // reversing the flow swaps the classification
  std::vector<double> ur = u;
  for (double& v : ur) v = -v;
  const auto fr = cut_fluxes(vel, ur);
  CHECK(fr[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(fr[1] == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
  const auto br = backflow_energy(vel, ur);
  CHECK(br[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(br[1] == doctest::Approx(16.0 / 35.0).epsilon(1e-7));
}

TEST_CASE("diagnostics: energy budget of a steady trajectory") {
  const PipeMesh mesh = channel(0.3);
  const FeSpace vel(mesh, 2, 2);
  const auto u = poiseuille(vel);

  const auto budget = energy_budget(vel, {u, u});
  REQUIRE(budget.kinetic.size() == 2);
  for (double k : budget.kinetic) CHECK(k == doctest::Approx(32.0 / 15.0).epsilon(1e-12));
  for (double d : budget.dissipation) CHECK(d == doctest::Approx(32.0 / 3.0).epsilon(1e-12));
  REQUIRE(budget.fluxes.size() == 2);
  for (const auto& f : budget.fluxes) {
    CHECK(f[0] == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("diagnostics: dual norm matches a dense Riesz solve") {
  const PipeMesh mesh = unit_square(0.45);
  const FeSpace scalar(mesh, 1, 1);
  const CsrMatrix riesz = make_h1_riesz_matrix(scalar);

  // the H1 Riesz image of the constant-1 load is the constant 1, so the
  // dual norm collapses to sqrt(volume)
  CsrMatrix mass = make_cell_matrix(scalar, scalar);
  assemble_mass(mass, scalar);
  const std::vector<double> ones(static_cast<std::size_t>(scalar.ndofs()), 1.0);
  std::vector<double> m1(ones.size());
  mass.mult(ones.data(), m1.data());
  CHECK(dual_norm(riesz, m1) == doctest::Approx(1.0).epsilon(1e-9));

  const auto g = scalar.interpolate([](const Vec3& x, double) { return std::sin(2.0 * x.x) - x.y; }, 0.0);
  const auto z = gauss_solve(dense_of(riesz), g);
  double gz = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) gz += g[i] * z[i];
  CHECK(dual_norm(riesz, g) == doctest::Approx(std::sqrt(gz)).epsilon(1e-9));
}

TEST_CASE("diagnostics: trilinear pairings and the cut identity") {
  const PipeMesh mesh = channel(0.3);
  const FeSpace scalar(mesh, 1, 1), vel(mesh, 2, 2);

  const auto wind = vel.interpolate_vector([](const Vec3&, double) { return Vec3{1.0, 0.0, 0.0}; }, 0.0);
  const auto ux = vel.interpolate_vector([](const Vec3& x, double) { return Vec3{x.x, 0.0, 0.0}; }, 0.0);
  const auto ex = scalar.interpolate([](const Vec3& x, double) { return x.x; }, 0.0);
  const std::vector<double> e1(static_cast<std::size_t>(scalar.ndofs()), 1.0);

  // ((1,0).grad)(x,0) = (1,0): pairings against (1,0) and (x,0)
  CHECK(convection_pairing(vel, wind, ux, wind) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(convection_pairing(vel, wind, ux, ux) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(transport_pairing(scalar, vel, wind, ex, e1) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(transport_pairing(scalar, vel, wind, ex, ex) == doctest::Approx(16.0).epsilon(1e-12));

  // cut weights carry the half: (1/2)(w.n)|v|^2 vanishes at x=0 for
  // v=(x,0) and integrates to 16 at x=4
  CHECK(cut_weighted_energy(vel, wind, ux) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(cut_weighted_scalar(scalar, vel, wind, ex) == doctest::Approx(16.0).epsilon(1e-12));

  // ((w.grad)v, v) = (1/2) sum_cuts (w.n)|v|^2 for solenoidal wall-vanishing w
  const auto w = poiseuille(vel);
  const double lhs_v = convection_pairing(vel, w, ux, ux);
  CHECK(lhs_v == doctest::Approx(32.0 / 3.0).epsilon(1e-12));
  CHECK(lhs_v == doctest::Approx(cut_weighted_energy(vel, w, ux)).epsilon(1e-12));
  const double lhs_e = transport_pairing(scalar, vel, w, ex, ex);
  CHECK(lhs_e == doctest::Approx(cut_weighted_scalar(scalar, vel, w, ex)).epsilon(1e-12));
}

TEST_CASE("diagnostics: natural outflow residual") {
  const PipeMesh mesh = channel(0.3);
  const FeSpace vel(mesh, 2, 2), pres(mesh, 1, 1);
  const auto u = poiseuille(vel);
  const std::vector<double> p0(static_cast<std::size_t>(pres.ndofs()), 0.0);

  // the channel profile with zero pressure satisfies nu du/dn = P n exactly
  CHECK(do_nothing_residual(vel, pres, u, p0, 0.8) <= 1e-12);

  // u = (x, 0): nu du/dn has magnitude nu on both cuts of total length 4
  const auto ux = vel.interpolate_vector([](const Vec3& x, double) { return Vec3{x.x, 0.0, 0.0}; }, 0.0);
  const double nu = 2.0;
  CHECK(do_nothing_residual(vel, pres, ux, p0, nu) == doctest::Approx(2.0 * nu).epsilon(1e-12));

  // a uniform pressure offset is visible through the P n term
  const std::vector<double> p1(static_cast<std::size_t>(pres.ndofs()), 1.0);
  CHECK(do_nothing_residual(vel, pres, u, p1, 0.8) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("diagnostics: gronwall bound on trivial and violating data") {
  const PipeMesh mesh = unit_square(0.45);
  const FeSpace scalar(mesh, 1, 1), vel(mesh, 2, 2);
  const int n = scalar.ndofs();
  const std::vector<double> zero_e(static_cast<std::size_t>(n), 0.0);
  const std::vector<double> zero_u(static_cast<std::size_t>(vel.ndofs()), 0.0);
  const std::vector<double> zero_g(static_cast<std::size_t>(n), 0.0);
  const int nf = 4;
  const std::vector<std::vector<double>> eu(nf, zero_e), uu(nf, zero_u), gu(nf, zero_g);

  // zero data: both sides vanish and the bound holds with equality
  const auto trivial = gronwall_bound(scalar, vel, eu, uu, gu, 0.5);
  CHECK(trivial.satisfied);
  for (double v : trivial.lhs) CHECK(v == 0.0);
  for (double v : trivial.bound) CHECK(std::abs(v) <= 1e-14);

  // initial state only: lhs stays put while the bound grows exponentially
  const auto e0 = scalar.interpolate([](const Vec3& x, double) { return 1.0 + x.x * x.y; }, 0.0);
  const auto steady = gronwall_bound(scalar, vel, std::vector<std::vector<double>>(nf, e0), uu, gu, 0.5);
  CHECK(steady.satisfied);
  CHECK(steady.bound[0] == doctest::Approx(steady.lhs[0]).epsilon(1e-12));
  for (int k = 1; k < nf; ++k) {
    CHECK(steady.bound[static_cast<std::size_t>(k)] > steady.bound[static_cast<std::size_t>(k - 1)]);
    CHECK(steady.lhs[static_cast<std::size_t>(k)] == doctest::Approx(steady.lhs[0]).epsilon(1e-12));
  }

  // blow-up without data violates the inequality
  std::vector<std::vector<double>> grow(nf, e0);
  for (int k = 0; k < nf; ++k)
    for (double& v : grow[static_cast<std::size_t>(k)]) v *= std::exp(2.0 * k);
  const auto violated = gronwall_bound(scalar, vel, grow, uu, gu, 0.5);
  CHECK_FALSE(violated.satisfied);

  CHECK_THROWS_AS(gronwall_bound(scalar, vel, eu, std::vector<std::vector<double>>(nf - 1, zero_u), gu, 0.5),
                  std::invalid_argument);
}

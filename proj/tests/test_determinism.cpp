#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "pipeflow/assembly.hpp"
#include "pipeflow/coupler.hpp"
#include "test_helpers.hpp"

using namespace pipeflow;
using testing::channel;

namespace {

PipeMesh duct3d(double h) {
  PipeSpec spec;
  spec.dim = 3;
  spec.h = h;
  spec.cylindrical = false;
  spec.branches.push_back({{0.0, 0.0, 0.0}, {0.0, 0.0, 1.5}, 0.5});
  return generate_pipe(spec);
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i] || std::signbit(a[i]) != std::signbit(b[i])) return false;
  return true;
}

// every matrix assembler in both modes; returns true when the value arrays
// agree bit for bit
void check_matrix_assemblers(const PipeMesh& mesh) {
  const FeSpace scalar(mesh, 1, 1), vel(mesh, 2, mesh.dim), pres(mesh, 1, 1);
  const AssemblyOptions serial{AssemblyMode::Serial, -1};
  const AssemblyOptions parallel{AssemblyMode::Parallel, -1};

  const auto wind = vel.interpolate_vector(
      [](const Vec3& x, double) { return Vec3{x.y, -0.2 * x.x, 0.1}; }, 0.0);
  const auto coeff = scalar.interpolate([](const Vec3& x, double) { return 1.0 + 0.5 * x.x; }, 0.0);
  const auto e = scalar.interpolate([](const Vec3& x, double) { return std::sin(x.x) + x.y; }, 0.0);
  const auto slope = [](double v) { return 1.0 + 0.1 * v * v; };

  {
    CsrMatrix a = make_cell_matrix(vel, vel), b = make_cell_matrix(vel, vel);
    assemble_stiffness(a, vel, serial);
    assemble_stiffness(b, vel, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
    assemble_mass(a, vel, serial);
    assemble_mass(b, vel, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
    assemble_convection(a, vel, wind, serial);
    assemble_convection(b, vel, wind, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
  }
  {
    CsrMatrix a = make_cell_matrix(pres, vel), b = make_cell_matrix(pres, vel);
    assemble_divergence(a, pres, vel, serial);
    assemble_divergence(b, pres, vel, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
  }
  {
    CsrMatrix a = make_cell_matrix(scalar, scalar), b = make_cell_matrix(scalar, scalar);
    assemble_scalar_diffusion(a, scalar, coeff, serial);
    assemble_scalar_diffusion(b, scalar, coeff, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
    assemble_scalar_transport(a, scalar, vel, wind, serial);
    assemble_scalar_transport(b, scalar, vel, wind, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
  }
  {
    CsrMatrix a = make_wall_matrix(scalar), b = make_wall_matrix(scalar);
    assemble_wall_mass(a, scalar, serial);
    assemble_wall_mass(b, scalar, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
    assemble_wall_composed_jacobian(a, scalar, e, slope, serial);
    assemble_wall_composed_jacobian(b, scalar, e, slope, parallel);
    CHECK(bitwise_equal(a.vals, b.vals));
  }
}

void check_load_assemblers(const PipeMesh& mesh) {
  const FeSpace scalar(mesh, 1, 1), vel(mesh, 2, mesh.dim);
  const AssemblyOptions serial{AssemblyMode::Serial, -1};
  const AssemblyOptions parallel{AssemblyMode::Parallel, -1};

  const auto u = vel.interpolate_vector(
      [](const Vec3& x, double) { return Vec3{x.y * x.y, 0.3 * x.x, -0.1 * x.y}; }, 0.0);
  const auto f = vel.interpolate_vector(
      [](const Vec3& x, double) { return Vec3{std::cos(x.x), x.y, 0.2}; }, 0.0);
  const auto rho = scalar.interpolate([](const Vec3& x, double) { return 2.0 - 0.1 * x.y; }, 0.0);
  const auto e = scalar.interpolate([](const Vec3& x, double) { return x.x - x.y; }, 0.0);
  const auto theta = scalar.interpolate([](const Vec3& x, double) { return 1.0 + x.y; }, 0.0);
  const auto q = scalar.interpolate([](const Vec3& x, double) { return 0.25 * x.x; }, 0.0);
  const auto h = scalar.interpolate([](const Vec3& x, double) { return std::sin(x.y); }, 0.0);
  const auto map = [](double v) { return v * std::abs(v); };

  CHECK(bitwise_equal(assemble_weighted_body_load(vel, scalar, rho, f, serial),
                      assemble_weighted_body_load(vel, scalar, rho, f, parallel)));
  CHECK(bitwise_equal(assemble_dissipation_load(scalar, vel, u, u, serial),
                      assemble_dissipation_load(scalar, vel, u, u, parallel)));
  CHECK(bitwise_equal(assemble_wall_composed_load(scalar, e, map, serial),
                      assemble_wall_composed_load(scalar, e, map, parallel)));
  CHECK(bitwise_equal(assemble_thermal_load(scalar, theta, q, h, 0.7, serial),
                      assemble_thermal_load(scalar, theta, q, h, 0.7, parallel)));
}

}  // namespace

TEST_CASE("determinism: parallel assembly is bit-identical to serial, 2d") {
  const PipeMesh mesh = channel(0.3);
  check_matrix_assemblers(mesh);
  check_load_assemblers(mesh);
}

TEST_CASE("determinism: parallel assembly is bit-identical to serial, 3d") {
  const PipeMesh mesh = duct3d(0.3);
  check_matrix_assemblers(mesh);
  check_load_assemblers(mesh);
}

TEST_CASE("determinism: sparse products reproduce bit for bit") {
  const PipeMesh mesh = channel(0.25);
  const FeSpace vel(mesh, 2, 2);
  CsrMatrix k = make_cell_matrix(vel, vel);
  assemble_stiffness(k, vel);

  const auto x = vel.interpolate_vector(
      [](const Vec3& p, double) { return Vec3{std::sin(3.0 * p.x), std::cos(2.0 * p.y), 0.0}; }, 0.0);
  std::vector<double> y1(x.size()), y2(x.size());
  k.mult(x.data(), y1.data());
  for (int rep = 0; rep < 10; ++rep) {
    k.mult(x.data(), y2.data());
    CHECK(bitwise_equal(y1, y2));
  }

  std::vector<double> t1(x.size()), t2(x.size());
  k.mult_transpose(x.data(), t1.data());
  k.mult_transpose(x.data(), t2.data());
  CHECK(bitwise_equal(t1, t2));
}

TEST_CASE("determinism: the full coupled solve replays bit for bit") {
  const PipeMesh mesh = channel(0.45);
  DensityLaw d;
  d.theta = {0.0, 10.0};
  d.rho = {2.0, 1.0};
  d.alpha = 0.5;
  const MaterialLaw law(d);

  Scenario s;
  s.mesh = &mesh;
  s.law = &law;
  s.horizon = 0.5;
  s.dt = 0.25;
  s.f = [](const Vec3& x, double t) { return Vec3{0.05 * std::sin(x.x + t), 0.0, 0.0}; };
  s.h = [](const Vec3&, double) { return 0.05; };
  s.theta_inf = [](const Vec3&, double) { return 2.0; };
  s.q_e = [](const Vec3&, double) { return 0.0; };
  s.u0 = [](const Vec3&, double) { return Vec3{}; };
  s.e0 = [](const Vec3&, double) { return 0.5; };

  const CoupledSolver solver(s);
  const auto a = solver.picard_solve(1e-8, 20);
  const auto b = solver.picard_solve(1e-8, 20);
  REQUIRE(a.report.converged);
  CHECK(a.report.iterations == b.report.iterations);
  for (std::size_t k = 0; k < a.u.size(); ++k) {
    CHECK(bitwise_equal(a.u[k], b.u[k]));
    CHECK(bitwise_equal(a.p[k], b.p[k]));
    CHECK(bitwise_equal(a.e[k], b.e[k]));
  }
  CHECK(a.report.increments == b.report.increments);
  CHECK(a.report.ball_norms == b.report.ball_norms);
}

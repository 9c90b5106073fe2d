#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "pipeflow/quadrature.hpp"

using namespace pipeflow;

namespace {

// exact reference-simplex moment: integral of x^a y^b z^c equals
// a! b! c! / (a+b+c+dim)!
double monomial_moment(int dim, int a, int b, int c) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + dim);
}

double apply(const QuadratureRule& q, int a, int b, int c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i)
    acc += q.weights[i] * std::pow(q.points[i].x, a) * std::pow(q.points[i].y, b) *
           std::pow(q.points[i].z, c);
  return acc;
}

// highest tabulated degree per dimension
int max_degree(int dim) { return dim == 2 ? 6 : 9; }

}  // namespace

TEST_CASE("quadrature: every rule integrates all monomials of its degree") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int degree = 1; degree <= max_degree(dim); ++degree) {
      const QuadratureRule& q = simplex_rule(dim, degree);
      CHECK(q.degree >= degree);
      for (int a = 0; a <= degree; ++a)
        for (int b = 0; b <= (dim >= 2 ? degree - a : 0); ++b)
          for (int cc = 0; cc <= (dim >= 3 ? degree - a - b : 0); ++cc) {
            const double got = apply(q, a, b, cc);
            const double expect = monomial_moment(dim, a, b, cc);
            CAPTURE(dim);
            CAPTURE(degree);
            CAPTURE(a);
            CAPTURE(b);
            CAPTURE(cc);
            CHECK(got == doctest::Approx(expect).epsilon(1e-12));
          }
    }
  }
}

TEST_CASE("quadrature: weights sum to the reference measure") {
  const double measures[4] = {0.0, 1.0, 0.5, 1.0 / 6.0};
  for (int dim = 1; dim <= 3; ++dim)
    for (int degree = 1; degree <= max_degree(dim); ++degree) {
      const QuadratureRule& q = simplex_rule(dim, degree);
      double s = 0.0;
      for (double w : q.weights) s += w;
      CHECK(s == doctest::Approx(measures[dim]).epsilon(1e-14));
    }
}

TEST_CASE("quadrature: segment and triangle weights stay positive") {
  for (int dim = 1; dim <= 2; ++dim)
    for (int degree = 1; degree <= max_degree(dim); ++degree)
      for (double w : simplex_rule(dim, degree).weights) CHECK(w > 0.0);
}

TEST_CASE("quadrature: points lie inside the reference simplex") {
  for (int dim = 1; dim <= 3; ++dim)
    for (int degree = 1; degree <= max_degree(dim); ++degree)
      for (const Vec3& p : simplex_rule(dim, degree).points) {
        CHECK(p.x >= -1e-14);
        CHECK(p.y >= -1e-14);
        CHECK(p.z >= -1e-14);
        CHECK(p.x + p.y + p.z <= 1.0 + 1e-14);
      }
}

TEST_CASE("quadrature: a rule beyond a polynomial's degree changes nothing") {
  // degree-3 polynomial on the triangle under rules of degree 3 and 9
  auto integrate = [](const QuadratureRule& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const double x = q.points[i].x, y = q.points[i].y;
      acc += q.weights[i] * (1.0 + 2.0 * x - y + 3.0 * x * x * y);
    }
    return acc;
  };
  const double lo = integrate(simplex_rule(2, 3));
  const double hi = integrate(simplex_rule(2, 6));
  CHECK(lo == doctest::Approx(hi).epsilon(1e-13));
}

TEST_CASE("quadrature: invalid requests are rejected") {
  CHECK_THROWS_AS(simplex_rule(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(simplex_rule(4, 2), std::invalid_argument);
  CHECK_THROWS_AS(simplex_rule(1, 10), std::invalid_argument);
  CHECK_THROWS_AS(simplex_rule(2, 7), std::invalid_argument);
  CHECK_THROWS_AS(simplex_rule(3, 10), std::invalid_argument);
}

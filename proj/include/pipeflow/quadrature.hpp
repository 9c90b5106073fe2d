#pragma once

#include <vector>

#include "pipeflow/geometry.hpp"

namespace pipeflow {

// Quadrature on the reference simplex: [0,1] (dim 1), the triangle
// (0,0)-(1,0)-(0,1) (dim 2), the unit tetrahedron (dim 3).  Weights sum to
// the reference measure (1, 1/2, 1/6).  The returned rule integrates
// polynomials up to the requested total degree exactly.
//
// Segment and triangle rules have strictly positive weights, which keeps
// boundary integrals of sign-definite integrands sign-definite.  Tetrahedron
// rules are Grundmann-Moller constructions and may carry negative weights;
// they are only used for volume terms where exactness is what matters.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;              // guaranteed exactness degree
  std::vector<Vec3> points;    // reference coordinates (unused components 0)
  std::vector<double> weights;
};

const QuadratureRule& simplex_rule(int dim, int degree);

}  // namespace pipeflow

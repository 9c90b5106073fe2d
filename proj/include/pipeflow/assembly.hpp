#pragma once

#include <functional>
#include <vector>

#include "pipeflow/fe_space.hpp"
#include "pipeflow/quadrature.hpp"
#include "pipeflow/sparse.hpp"

namespace pipeflow {

// All element loops exist in two modes.  Parallel mode computes the local
// contributions concurrently and scatters them serially in element order,
// which makes the result bit-identical to serial mode for any thread count.
// Serial mode is the reference implementation kept for testing.
enum class AssemblyMode { Serial, Parallel };

struct AssemblyOptions {
  AssemblyMode mode = AssemblyMode::Parallel;
  int quad_degree = -1;  // -1: 2 * (max element degree involved) + 1
};

// zeroed matrices with the deterministic cell/facet sparsity pattern
CsrMatrix make_cell_matrix(const FeSpace& rows, const FeSpace& cols);
CsrMatrix make_wall_matrix(const FeSpace& space);

// integral of grad(u) : grad(v), componentwise (full-gradient form)
void assemble_stiffness(CsrMatrix& m, const FeSpace& space, const AssemblyOptions& opt = {});
// integral of u . v
void assemble_mass(CsrMatrix& m, const FeSpace& space, const AssemblyOptions& opt = {});
// integral of (wind . grad u) . v on a vector space; wind lives in `space`
void assemble_convection(CsrMatrix& m, const FeSpace& space, const std::vector<double>& wind,
                         const AssemblyOptions& opt = {});
// integral of q * div(u); rows in the pressure space, columns in the velocity space
void assemble_divergence(CsrMatrix& m, const FeSpace& pres, const FeSpace& vel,
                         const AssemblyOptions& opt = {});
// integral of coeff * grad(phi) . grad(psi); coeff given nodally on `space`
void assemble_scalar_diffusion(CsrMatrix& m, const FeSpace& space, const std::vector<double>& coeff,
                               const AssemblyOptions& opt = {});
// integral of (u . grad phi) * psi; u lives in the velocity space
void assemble_scalar_transport(CsrMatrix& m, const FeSpace& space, const FeSpace& vel,
                               const std::vector<double>& u, const AssemblyOptions& opt = {});

// wall boundary mass: integral over the wall of phi * psi
void assemble_wall_mass(CsrMatrix& m, const FeSpace& space, const AssemblyOptions& opt = {});
// integral over the wall of slope(e(x)) * phi * psi, e interpolated at
// quadrature points before applying `slope`
void assemble_wall_composed_jacobian(CsrMatrix& m, const FeSpace& space,
                                     const std::vector<double>& e,
                                     const std::function<double(double)>& slope,
                                     const AssemblyOptions& opt = {});
// load: integral over the wall of map(e(x)) * phi
std::vector<double> assemble_wall_composed_load(const FeSpace& space, const std::vector<double>& e,
                                                const std::function<double(double)>& map,
                                                const AssemblyOptions& opt = {});

// load: integral of weight * (f . v); weight nodal on `weight_space`, f nodal on `space`
std::vector<double> assemble_weighted_body_load(const FeSpace& space, const FeSpace& weight_space,
                                                const std::vector<double>& weight,
                                                const std::vector<double>& f,
                                                const AssemblyOptions& opt = {});
// load: integral of D(u):D(v) * phi into the scalar space (D = symmetric gradient)
std::vector<double> assemble_dissipation_load(const FeSpace& space, const FeSpace& vel,
                                              const std::vector<double>& u,
                                              const std::vector<double>& v,
                                              const AssemblyOptions& opt = {});
// load: integral of h * phi plus the wall integral of (alpha*theta_inf + q) * phi
std::vector<double> assemble_thermal_load(const FeSpace& space, const std::vector<double>& theta_inf,
                                          const std::vector<double>& q, const std::vector<double>& h,
                                          double alpha, const AssemblyOptions& opt = {});

// --- low-level evaluation utilities shared with diagnostics ---

struct BasisTable {
  int n = 0;                   // nodes per cell/facet
  std::vector<double> val;     // [q * n + i]
  std::vector<Vec3> ref_grad;  // [q * n + i]
};
BasisTable tabulate_basis(int dim, int degree, const QuadratureRule& rule);

// affine geometry of one cell
struct CellMap {
  Vec3 v0;
  double jac[3][3];     // columns v_i - v_0
  double inv_jac[3][3];
  double detj = 0.0;    // absolute value
  void compute(const PipeMesh& mesh, int cell);
  Vec3 grad(const Vec3& ref_grad) const;   // inv_jac^T * ref_grad
  Vec3 point(const Vec3& ref) const;       // v0 + J * ref
  Vec3 ref_point(const Vec3& phys) const;  // inverse map
};

// geometry of one boundary facet: physical point and integration factor
struct FacetMap {
  Vec3 origin, e1, e2;  // x = origin + xi*e1 + eta*e2
  double jac = 0.0;     // length (2D) or twice the area (3D)
  void compute(const PipeMesh& mesh, int bf);
  Vec3 point(const Vec3& ref) const;
};

}  // namespace pipeflow

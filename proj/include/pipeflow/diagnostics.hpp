#pragma once

#include <vector>

#include "pipeflow/fe_space.hpp"
#include "pipeflow/sparse.hpp"

namespace pipeflow {

// Spatial norms by element quadrature.  Vector fields use the euclidean
// pointwise magnitude, gradients the Frobenius norm.  quad_degree < 0 picks
// 2*degree+1; fractional exponents make these quadrature-dependent, so the
// degree used is part of any reported metadata.
double lp_norm(const FeSpace& space, const std::vector<double>& v, double p, int quad_degree = -1);
double w1p_seminorm(const FeSpace& space, const std::vector<double>& v, double p,
                    int quad_degree = -1);
double w1p_norm(const FeSpace& space, const std::vector<double>& v, double p,
                int quad_degree = -1);
double l2_norm(const FeSpace& space, const std::vector<double>& v);
double h1_norm(const FeSpace& space, const std::vector<double>& v);

// L2 distance to a closed-form field, for convergence studies
double l2_error(const FeSpace& space, const std::vector<double>& v,
                const std::function<double(const Vec3&)>& exact, int quad_degree = -1);
double l2_error_vector(const FeSpace& space, const std::vector<double>& v,
                       const std::function<Vec3(const Vec3&)>& exact, int quad_degree = -1);

struct BallNormSurrogate {
  double value = 0.0;      // l4_l24 + l8_w
  double l4_l24 = 0.0;     // (trapz ||u||_{L24}^4)^{1/4}
  double l8_w = 0.0;       // (trapz ||u||_{W^{1,24/11}}^8)^{1/8}
  int quad_degree = 0;
};

// Surrogate of the space-time norm defining the velocity ball of the
// contraction regime: time integrals by trapezoid over the uniform grid of
// frames spaced dt apart.
BallNormSurrogate ball_norm_surrogate(const FeSpace& vel, const std::vector<std::vector<double>>& u,
                                      double dt, int quad_degree = -1);

// Kinetic energy entering through each cut against the nominal outflow
// direction: (1/2) integral over the cut of |min(u.n, 0)| |u|^2, one value
// per cut tag.
std::vector<double> backflow_energy(const FeSpace& vel, const std::vector<double>& u);

// volumetric flux integral of u.n per cut
std::vector<double> cut_fluxes(const FeSpace& vel, const std::vector<double>& u);

struct EnergyBudget {
  std::vector<double> kinetic;              // (1/2)||u||_{L2}^2 per frame
  std::vector<double> dissipation;          // integral |grad u|^2 per frame
  std::vector<std::vector<double>> fluxes;  // per frame, per cut
};
EnergyBudget energy_budget(const FeSpace& vel, const std::vector<std::vector<double>>& u);

struct GronwallResult {
  std::vector<double> bound;  // right side per frame
  std::vector<double> lhs;    // ||e||_{L2}^2 per frame
  bool satisfied = false;
};

// Checks ||e(t)||^2 <= exp(int c2||u||^8_{L4} + c3) (||e0||^2
// + int c1 (||g||_{-1} + ||u||^2_{W^{1,12/5}})^2) with the dual norm realized
// by a Riesz solve against the H1 inner product.  g frames are assembled
// load vectors on the scalar space.
GronwallResult gronwall_bound(const FeSpace& scalar, const FeSpace& vel,
                              const std::vector<std::vector<double>>& e,
                              const std::vector<std::vector<double>>& u,
                              const std::vector<std::vector<double>>& g, double dt, double c1 = 1.0,
                              double c2 = 1.0, double c3 = 1.0);

// dual-norm surrogate ||g||_{W^{-1,2}} via (K+M) z = g, value sqrt(g.z);
// riesz must be the assembled H1 matrix of the scalar space
double dual_norm(const CsrMatrix& riesz, const std::vector<double>& g);
CsrMatrix make_h1_riesz_matrix(const FeSpace& scalar);

// trilinear pairings and their cut-boundary counterparts; the identity
// ((w.grad)v, v) = (1/2) integral over the cuts of (w.n)|v|^2 holds for
// divergence-free w vanishing on the walls
double convection_pairing(const FeSpace& vel, const std::vector<double>& w,
                          const std::vector<double>& u, const std::vector<double>& v);
double transport_pairing(const FeSpace& scalar, const FeSpace& vel, const std::vector<double>& w,
                         const std::vector<double>& e, const std::vector<double>& phi);
double cut_weighted_energy(const FeSpace& vel, const std::vector<double>& w,
                           const std::vector<double>& v);
double cut_weighted_scalar(const FeSpace& scalar, const FeSpace& vel, const std::vector<double>& w,
                           const std::vector<double>& phi);

// facet-wise L2 residual of the natural outflow condition
// nu du/dn - P n = 0 accumulated over all cuts
double do_nothing_residual(const FeSpace& vel, const FeSpace& pres, const std::vector<double>& u,
                           const std::vector<double>& p, double nu);

}  // namespace pipeflow

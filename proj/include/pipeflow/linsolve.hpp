#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pipeflow/sparse.hpp"

namespace pipeflow {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // final residual relative to the load norm
};

// called once per iteration with the current relative residual
using IterObserver = std::function<void(int iter, double relres)>;

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 5000;
  int restart = 60;  // GMRES restart length
  IterObserver observer;
};

// serial reductions keep results identical across thread counts
double dot_vec(const std::vector<double>& a, const std::vector<double>& b);
double norm_vec(const std::vector<double>& a);

// Jacobi-preconditioned conjugate gradients.  Throws SolveError when the
// operator reveals itself indefinite (p^T A p <= 0) or a diagonal entry is
// not positive.
SolveReport cg_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                     const SolverOptions& opt = {});

// Jacobi right-preconditioned restarted GMRES for nonsymmetric systems.
SolveReport gmres_solve(const CsrMatrix& a, const std::vector<double>& b, std::vector<double>& x,
                        const SolverOptions& opt = {});

// Velocity-pressure saddle system
//   [ A  -Bt ] [u]   [fu]
//   [ B   0  ] [p] = [fp]
// A is the eliminated SPD velocity block, B the divergence matrix with
// Dirichlet velocity columns zeroed.  pin >= 0 replaces that continuity row
// with the identity to fix the pressure level of enclosed flows.
struct SaddleSystem {
  const CsrMatrix* a = nullptr;   // velocity block
  const CsrMatrix* b = nullptr;   // divergence: pressure rows, velocity cols
  const CsrMatrix* mp = nullptr;  // pressure mass, Schur complement surrogate
  const CsrMatrix* lp = nullptr;  // optional pressure stiffness for the transient Schur term
  double schur_scale = 1.0;       // S^{-1} ~ schur_scale Mp^{-1} (+ lp_scale Lp^{-1})
  double lp_scale = 0.0;
  int pin = -1;

  void apply(const std::vector<double>& u, const std::vector<double>& p, std::vector<double>& yu,
             std::vector<double>& yp) const;
};

struct SaddleOptions {
  double tol = 1e-10;
  int max_iter = 400;
  int restart = 100;
  double inner_tol = 1e-3;  // relative tolerance of the inner Jacobi-CG sweeps
  int inner_max_iter = 600;
  IterObserver observer;
};

// Flexible GMRES with the block upper triangular preconditioner
//   z_p = -(schur_scale Mp^{-1} + lp_scale Lp^{-1}) r_p
//   z_u = A^{-1} (r_u + Bt z_p)
// where the inner inverses are loose Jacobi-CG solves.  u, p are warm
// starts and receive the solution.
SolveReport saddle_solve(const SaddleSystem& sys, const std::vector<double>& fu,
                         const std::vector<double>& fp, std::vector<double>& u,
                         std::vector<double>& p, const SaddleOptions& opt = {});

}  // namespace pipeflow

// Timing harness for the element loops and the sparse product: the serial
// reference implementation against the parallel mode, plus a bitwise
// comparison of their outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "pipeflow/assembly.hpp"
#include "pipeflow/fe_space.hpp"
#include "pipeflow/mesh.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double best_seconds(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const std::chrono::duration<double> dt = Clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  double h = 0.03;
  int reps = 5;
  int threads = 0;
  CLI::App app{"serial vs parallel kernel timings"};
  app.add_option("--size", h, "mesh size of the benchmark channel");
  app.add_option("--reps", reps, "repetitions per kernel, best time wins");
  app.add_option("--threads", threads, "worker thread count");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
  const int nthreads = omp_get_max_threads();
#else
  const int nthreads = 1;
  (void)threads;
#endif

  using namespace pipeflow;
  PipeSpec spec;
  spec.dim = 2;
  spec.branches = {{Vec3{0.0, 0.0, 0.0}, Vec3{4.0, 0.0, 0.0}, 1.0}};
  spec.h = h;
  const PipeMesh mesh = generate_pipe(spec);
  const FeSpace vel(mesh, 2, mesh.dim);
  const FeSpace scalar(mesh, 1, 1);
  std::printf("channel h=%g: %zu cells, %d velocity dofs, %d threads\n", h, mesh.cells.size(),
              vel.ndofs(), nthreads);

  const AssemblyOptions serial{AssemblyMode::Serial, -1};
  const AssemblyOptions parallel{AssemblyMode::Parallel, -1};
  CsrMatrix a = make_cell_matrix(vel, vel);
  CsrMatrix b = make_cell_matrix(vel, vel);
  const std::vector<double> wind = vel.interpolate_vector(
      [](const Vec3& x, double) { return Vec3{x.y * (1.0 - x.y), 0.25 * x.x, 0.0}; }, 0.0);

  struct Kernel {
    const char* name;
    std::function<void(CsrMatrix&, const AssemblyOptions&)> run;
  };
  const std::vector<Kernel> kernels = {
      {"stiffness", [&](CsrMatrix& m, const AssemblyOptions& o) { assemble_stiffness(m, vel, o); }},
      {"mass", [&](CsrMatrix& m, const AssemblyOptions& o) { assemble_mass(m, vel, o); }},
      {"convection",
       [&](CsrMatrix& m, const AssemblyOptions& o) { assemble_convection(m, vel, wind, o); }},
  };

  std::printf("%-12s %12s %12s %9s %12s\n", "kernel", "serial [ms]", "parallel[ms]", "speedup",
              "max |diff|");
  for (const auto& k : kernels) {
    const double ts = best_seconds(reps, [&] { k.run(a, serial); });
    const double tp = best_seconds(reps, [&] { k.run(b, parallel); });
    std::printf("%-12s %12.3f %12.3f %9.2f %12.3g\n", k.name, ts * 1e3, tp * 1e3, ts / tp,
                max_abs_diff(a.vals, b.vals));
  }

  // sparse product; row-parallel, so identical results for any thread count
  std::vector<double> x(static_cast<std::size_t>(vel.ndofs()));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * static_cast<double>(i));
  std::vector<double> y(x.size());
  const double tm = best_seconds(reps, [&] {
    for (int r = 0; r < 50; ++r) a.mult(x.data(), y.data());
  });
  std::printf("%-12s %12.3f ms per 50 products\n", "spmv", tm * 1e3);
  return 0;
}

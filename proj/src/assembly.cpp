#include "pipeflow/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace pipeflow {

namespace {

void check_field(const std::vector<double>& v, const FeSpace& s, const char* what) {
  if (static_cast<int>(v.size()) != s.ndofs())
    throw std::invalid_argument(std::string(what) + ": field length does not match the space");
  for (double x : v)
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite field value");
}

int default_degree(int deg_a, int deg_b = 0, int deg_c = 0) {
  const int d = std::max(deg_a, std::max(deg_b, deg_c));
  return 2 * d + 1;
}

// Generic two-phase element driver.  `compute` fills the local block of
// size `local_size` for one cell; `scatter` consumes it.  Parallel mode
// evaluates all local blocks concurrently and scatters them in cell order,
// bit-identical to the serial reference path.
template <class Compute, class Scatter>
void run_cells(int ncells, int local_size, Compute&& compute, Scatter&& scatter, AssemblyMode mode) {
  if (mode == AssemblyMode::Serial) {
    std::vector<double> local(static_cast<std::size_t>(local_size));
    for (int c = 0; c < ncells; ++c) {
      compute(c, local.data());
      scatter(c, local.data());
    }
    return;
  }
  std::vector<double> buffer(static_cast<std::size_t>(ncells) * static_cast<std::size_t>(local_size));
#ifdef PIPEFLOW_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < ncells; ++c)
    compute(c, buffer.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(local_size));
  for (int c = 0; c < ncells; ++c)
    scatter(c, buffer.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(local_size));
}

// scatter a scalar-block local matrix replicated over components
void scatter_block(CsrMatrix& m, const FeSpace& rows, const FeSpace& cols, int cell,
                   const double* local, bool replicate) {
  const int* rn = rows.cell_nodes(cell);
  const int* cn = cols.cell_nodes(cell);
  const int nr = rows.nodes_per_cell(), nc = cols.nodes_per_cell();
  if (replicate) {
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nc; ++j) {
        const double v = local[i * nc + j];
        for (int comp = 0; comp < rows.ncomp(); ++comp)
          m.add(rn[i] * rows.ncomp() + comp, cn[j] * cols.ncomp() + comp, v);
      }
    }
  } else {
    // local is already indexed over full dof blocks
    const int rdofs = nr * rows.ncomp(), cdofs = nc * cols.ncomp();
    for (int i = 0; i < rdofs; ++i) {
      const int gr = rn[i / rows.ncomp()] * rows.ncomp() + i % rows.ncomp();
      for (int j = 0; j < cdofs; ++j) {
        const int gc = cn[j / cols.ncomp()] * cols.ncomp() + j % cols.ncomp();
        m.add(gr, gc, local[i * cdofs + j]);
      }
    }
  }
}

void check_same_mesh(const FeSpace& a, const FeSpace& b, const char* what) {
  if (&a.mesh() != &b.mesh())
    throw std::invalid_argument(std::string(what) + ": spaces live on different meshes");
}

}  // namespace

BasisTable tabulate_basis(int dim, int degree, const QuadratureRule& rule) {
  BasisTable t;
  t.n = basis_size(dim, degree);
  const int nq = static_cast<int>(rule.points.size());
  t.val.resize(static_cast<std::size_t>(nq) * static_cast<std::size_t>(t.n));
  t.ref_grad.resize(t.val.size());
  for (int q = 0; q < nq; ++q)
    eval_basis(dim, degree, rule.points[static_cast<std::size_t>(q)],
               t.val.data() + static_cast<std::size_t>(q) * static_cast<std::size_t>(t.n),
               t.ref_grad.data() + static_cast<std::size_t>(q) * static_cast<std::size_t>(t.n));
  return t;
}

void CellMap::compute(const PipeMesh& mesh, int cell) {
  const auto& cl = mesh.cells[static_cast<std::size_t>(cell)];
  v0 = mesh.vertices[static_cast<std::size_t>(cl[0])];
  const int dim = mesh.dim;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) jac[r][c] = r == c ? 1.0 : 0.0;
  for (int c = 0; c < dim; ++c) {
    const Vec3 e = mesh.vertices[static_cast<std::size_t>(cl[static_cast<std::size_t>(c) + 1])] - v0;
    jac[0][c] = e.x;
    jac[1][c] = e.y;
    jac[2][c] = e.z;
  }
  // inverse and determinant (the unused third dimension is the identity)
  const double a = jac[0][0], b = jac[0][1], c2 = jac[0][2];
  const double d = jac[1][0], e = jac[1][1], f = jac[1][2];
  const double g = jac[2][0], h = jac[2][1], i = jac[2][2];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c2 * (e * h - d * g);
  detj = std::abs(det);
  const double inv = 1.0 / det;
  inv_jac[0][0] = (e * i - f * h) * inv;
  inv_jac[0][1] = (c2 * h - b * i) * inv;
  inv_jac[0][2] = (b * f - c2 * e) * inv;
  inv_jac[1][0] = (f * g - d * i) * inv;
  inv_jac[1][1] = (a * i - c2 * g) * inv;
  inv_jac[1][2] = (c2 * d - a * f) * inv;
  inv_jac[2][0] = (d * h - e * g) * inv;
  inv_jac[2][1] = (b * g - a * h) * inv;
  inv_jac[2][2] = (a * e - b * d) * inv;
}

Vec3 CellMap::grad(const Vec3& rg) const {
  // inv_jac^T * rg
  return {inv_jac[0][0] * rg.x + inv_jac[1][0] * rg.y + inv_jac[2][0] * rg.z,
          inv_jac[0][1] * rg.x + inv_jac[1][1] * rg.y + inv_jac[2][1] * rg.z,
          inv_jac[0][2] * rg.x + inv_jac[1][2] * rg.y + inv_jac[2][2] * rg.z};
}

Vec3 CellMap::point(const Vec3& ref) const {
  return {v0.x + jac[0][0] * ref.x + jac[0][1] * ref.y + jac[0][2] * ref.z,
          v0.y + jac[1][0] * ref.x + jac[1][1] * ref.y + jac[1][2] * ref.z,
          v0.z + jac[2][0] * ref.x + jac[2][1] * ref.y + jac[2][2] * ref.z};
}

Vec3 CellMap::ref_point(const Vec3& phys) const {
  const Vec3 d = phys - v0;
  return {inv_jac[0][0] * d.x + inv_jac[0][1] * d.y + inv_jac[0][2] * d.z,
          inv_jac[1][0] * d.x + inv_jac[1][1] * d.y + inv_jac[1][2] * d.z,
          inv_jac[2][0] * d.x + inv_jac[2][1] * d.y + inv_jac[2][2] * d.z};
}

void FacetMap::compute(const PipeMesh& mesh, int bf) {
  const auto& f = mesh.boundary[static_cast<std::size_t>(bf)];
  origin = mesh.vertices[static_cast<std::size_t>(f.v[0])];
  e1 = mesh.vertices[static_cast<std::size_t>(f.v[1])] - origin;
  if (mesh.dim == 2) {
    e2 = {0.0, 0.0, 0.0};
    jac = norm(e1);
  } else {
    e2 = mesh.vertices[static_cast<std::size_t>(f.v[2])] - origin;
    jac = norm(cross(e1, e2));
  }
}

Vec3 FacetMap::point(const Vec3& ref) const { return origin + ref.x * e1 + ref.y * e2; }

CsrMatrix make_cell_matrix(const FeSpace& rows, const FeSpace& cols) {
  check_same_mesh(rows, cols, "make_cell_matrix");
  PatternBuilder pb(rows.ndofs(), cols.ndofs());
  const int nr = rows.nodes_per_cell(), nc = cols.nodes_per_cell();
  std::vector<int> rd(static_cast<std::size_t>(nr) * static_cast<std::size_t>(rows.ncomp()));
  std::vector<int> cd(static_cast<std::size_t>(nc) * static_cast<std::size_t>(cols.ncomp()));
  for (int c = 0; c < static_cast<int>(rows.mesh().cells.size()); ++c) {
    const int* rn = rows.cell_nodes(c);
    const int* cn = cols.cell_nodes(c);
    for (int i = 0; i < nr; ++i)
      for (int k = 0; k < rows.ncomp(); ++k) rd[static_cast<std::size_t>(i * rows.ncomp() + k)] = rn[i] * rows.ncomp() + k;
    for (int j = 0; j < nc; ++j)
      for (int k = 0; k < cols.ncomp(); ++k) cd[static_cast<std::size_t>(j * cols.ncomp() + k)] = cn[j] * cols.ncomp() + k;
    pb.add_element(rd.data(), static_cast<int>(rd.size()), cd.data(), static_cast<int>(cd.size()));
  }
  return pb.build();
}

CsrMatrix make_wall_matrix(const FeSpace& space) {
  PatternBuilder pb(space.ndofs(), space.ndofs());
  const auto& mesh = space.mesh();
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    if (mesh.boundary[static_cast<std::size_t>(bf)].tag != kWallTag) continue;
    const int* fn = space.facet_nodes(bf);
    pb.add_element(fn, space.nodes_per_facet(), fn, space.nodes_per_facet());
  }
  return pb.build();
}

void assemble_stiffness(CsrMatrix& m, const FeSpace& space, const AssemblyOptions& opt) {
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree()));
  const BasisTable bt = tabulate_basis(mesh.dim, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  m.set_zero();
  m.symmetric = true;

  run_cells(
      static_cast<int>(mesh.cells.size()), n * n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        std::fill(local, local + n * n, 0.0);
        std::vector<Vec3> g(static_cast<std::size_t>(n));
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = cm.grad(bt.ref_grad[static_cast<std::size_t>(q * n + i)]);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) local[i * n + j] += w * dot(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
        }
      },
      [&](int c, const double* local) { scatter_block(m, space, space, c, local, true); }, opt.mode);
}

void assemble_mass(CsrMatrix& m, const FeSpace& space, const AssemblyOptions& opt) {
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree()));
  const BasisTable bt = tabulate_basis(mesh.dim, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  m.set_zero();
  m.symmetric = true;

  run_cells(
      static_cast<int>(mesh.cells.size()), n * n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        std::fill(local, local + n * n, 0.0);
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) local[i * n + j] += w * nv[i] * nv[j];
        }
      },
      [&](int c, const double* local) { scatter_block(m, space, space, c, local, true); }, opt.mode);
}

void assemble_convection(CsrMatrix& m, const FeSpace& space, const std::vector<double>& wind,
                         const AssemblyOptions& opt) {
  check_field(wind, space, "assemble_convection");
  if (space.ncomp() != space.mesh().dim)
    throw std::invalid_argument("assemble_convection: vector space expected");
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree()));
  const BasisTable bt = tabulate_basis(mesh.dim, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  const int nc = space.ncomp();
  m.set_zero();
  m.symmetric = false;

  run_cells(
      static_cast<int>(mesh.cells.size()), n * n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        const int* nodes = space.cell_nodes(c);
        std::fill(local, local + n * n, 0.0);
        std::vector<Vec3> g(static_cast<std::size_t>(n));
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
          for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = cm.grad(bt.ref_grad[static_cast<std::size_t>(q * n + i)]);
          Vec3 wq;
          for (int k = 0; k < n; ++k)
            for (int comp = 0; comp < nc; ++comp) wq[comp] += nv[k] * wind[static_cast<std::size_t>(nodes[k] * nc + comp)];
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) local[i * n + j] += w * nv[i] * dot(wq, g[static_cast<std::size_t>(j)]);
        }
      },
      [&](int c, const double* local) { scatter_block(m, space, space, c, local, true); }, opt.mode);
}

void assemble_divergence(CsrMatrix& m, const FeSpace& pres, const FeSpace& vel,
                         const AssemblyOptions& opt) {
  check_same_mesh(pres, vel, "assemble_divergence");
  if (pres.ncomp() != 1 || vel.ncomp() != vel.mesh().dim)
    throw std::invalid_argument("assemble_divergence: scalar pressure and vector velocity expected");
  const auto& mesh = vel.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(pres.degree(), vel.degree()));
  const BasisTable bp = tabulate_basis(mesh.dim, pres.degree(), rule);
  const BasisTable bv = tabulate_basis(mesh.dim, vel.degree(), rule);
  const int np = bp.n, nv = bv.n, nq = static_cast<int>(rule.points.size());
  const int dim = mesh.dim;
  m.set_zero();
  m.symmetric = false;

  run_cells(
      static_cast<int>(mesh.cells.size()), np * nv * dim,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        std::fill(local, local + np * nv * dim, 0.0);
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* pv = bp.val.data() + static_cast<std::size_t>(q * np);
          for (int j = 0; j < nv; ++j) {
            const Vec3 g = cm.grad(bv.ref_grad[static_cast<std::size_t>(q * nv + j)]);
            for (int a = 0; a < np; ++a)
              for (int comp = 0; comp < dim; ++comp) local[(a * nv + j) * dim + comp] += w * pv[a] * g[comp];
          }
        }
      },
      [&](int c, const double* local) {
        const int* pn = pres.cell_nodes(c);
        const int* vn = vel.cell_nodes(c);
        for (int a = 0; a < np; ++a)
          for (int j = 0; j < nv; ++j)
            for (int comp = 0; comp < dim; ++comp)
              m.add(pn[a], vn[j] * dim + comp, local[(a * nv + j) * dim + comp]);
      },
      opt.mode);
}

void assemble_scalar_diffusion(CsrMatrix& m, const FeSpace& space, const std::vector<double>& coeff,
                               const AssemblyOptions& opt) {
  check_field(coeff, space, "assemble_scalar_diffusion");
  if (space.ncomp() != 1) throw std::invalid_argument("assemble_scalar_diffusion: scalar space expected");
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree()) + space.degree());
  const BasisTable bt = tabulate_basis(mesh.dim, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  m.set_zero();
  m.symmetric = true;

  run_cells(
      static_cast<int>(mesh.cells.size()), n * n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        const int* nodes = space.cell_nodes(c);
        std::fill(local, local + n * n, 0.0);
        std::vector<Vec3> g(static_cast<std::size_t>(n));
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
          double cq = 0.0;
          for (int k = 0; k < n; ++k) cq += nv[k] * coeff[static_cast<std::size_t>(nodes[k])];
          for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = cm.grad(bt.ref_grad[static_cast<std::size_t>(q * n + i)]);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) local[i * n + j] += w * cq * dot(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
        }
      },
      [&](int c, const double* local) { scatter_block(m, space, space, c, local, true); }, opt.mode);
}

void assemble_scalar_transport(CsrMatrix& m, const FeSpace& space, const FeSpace& vel,
                               const std::vector<double>& u, const AssemblyOptions& opt) {
  check_same_mesh(space, vel, "assemble_scalar_transport");
  check_field(u, vel, "assemble_scalar_transport");
  if (space.ncomp() != 1) throw std::invalid_argument("assemble_scalar_transport: scalar space expected");
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree(), vel.degree()));
  const BasisTable bs = tabulate_basis(mesh.dim, space.degree(), rule);
  const BasisTable bv = tabulate_basis(mesh.dim, vel.degree(), rule);
  const int n = bs.n, nvb = bv.n, nq = static_cast<int>(rule.points.size());
  const int dim = mesh.dim;
  m.set_zero();
  m.symmetric = false;

  run_cells(
      static_cast<int>(mesh.cells.size()), n * n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        const int* snodes = space.cell_nodes(c);
        (void)snodes;
        const int* vnodes = vel.cell_nodes(c);
        std::fill(local, local + n * n, 0.0);
        std::vector<Vec3> g(static_cast<std::size_t>(n));
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* sv = bs.val.data() + static_cast<std::size_t>(q * n);
          const double* vv = bv.val.data() + static_cast<std::size_t>(q * nvb);
          Vec3 uq;
          for (int k = 0; k < nvb; ++k)
            for (int comp = 0; comp < dim; ++comp) uq[comp] += vv[k] * u[static_cast<std::size_t>(vnodes[k] * dim + comp)];
          for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = cm.grad(bs.ref_grad[static_cast<std::size_t>(q * n + i)]);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) local[i * n + j] += w * sv[i] * dot(uq, g[static_cast<std::size_t>(j)]);
        }
      },
      [&](int c, const double* local) { scatter_block(m, space, space, c, local, true); }, opt.mode);
}

namespace {

// shared facet-loop driver for wall integrals (serial; the wall is lower
// dimensional and cheap)
template <class Body>
void for_wall_facets(const FeSpace& space, int quad_degree, Body&& body) {
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim - 1, quad_degree);
  const BasisTable bt = tabulate_basis(mesh.dim - 1, space.degree(), rule);
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    if (mesh.boundary[static_cast<std::size_t>(bf)].tag != kWallTag) continue;
    FacetMap fm;
    fm.compute(mesh, bf);
    body(bf, rule, bt, fm);
  }
}

}  // namespace

void assemble_wall_mass(CsrMatrix& m, const FeSpace& space, const AssemblyOptions& opt) {
  if (space.ncomp() != 1) throw std::invalid_argument("assemble_wall_mass: scalar space expected");
  m.set_zero();
  m.symmetric = true;
  const int qd = opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree());
  for_wall_facets(space, qd, [&](int bf, const QuadratureRule& rule, const BasisTable& bt, const FacetMap& fm) {
    const int* fn = space.facet_nodes(bf);
    const int n = bt.n;
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const double w = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
      const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add(fn[i], fn[j], w * nv[i] * nv[j]);
    }
  });
}

void assemble_wall_composed_jacobian(CsrMatrix& m, const FeSpace& space, const std::vector<double>& e,
                                     const std::function<double(double)>& slope,
                                     const AssemblyOptions& opt) {
  check_field(e, space, "assemble_wall_composed_jacobian");
  m.set_zero();
  m.symmetric = true;
  const int qd = opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree());
  for_wall_facets(space, qd, [&](int bf, const QuadratureRule& rule, const BasisTable& bt, const FacetMap& fm) {
    const int* fn = space.facet_nodes(bf);
    const int n = bt.n;
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const double w = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
      const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
      double eq = 0.0;
      for (int k = 0; k < n; ++k) eq += nv[k] * e[static_cast<std::size_t>(fn[k])];
      const double s = slope(eq);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.add(fn[i], fn[j], w * s * nv[i] * nv[j]);
    }
  });
}

std::vector<double> assemble_wall_composed_load(const FeSpace& space, const std::vector<double>& e,
                                                const std::function<double(double)>& map,
                                                const AssemblyOptions& opt) {
  check_field(e, space, "assemble_wall_composed_load");
  std::vector<double> load(static_cast<std::size_t>(space.ndofs()), 0.0);
  const int qd = opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree());
  for_wall_facets(space, qd, [&](int bf, const QuadratureRule& rule, const BasisTable& bt, const FacetMap& fm) {
    const int* fn = space.facet_nodes(bf);
    const int n = bt.n;
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const double w = rule.weights[static_cast<std::size_t>(q)] * fm.jac;
      const double* nv = bt.val.data() + static_cast<std::size_t>(q * n);
      double eq = 0.0;
      for (int k = 0; k < n; ++k) eq += nv[k] * e[static_cast<std::size_t>(fn[k])];
      const double v = map(eq);
      for (int i = 0; i < n; ++i) load[static_cast<std::size_t>(fn[i])] += w * v * nv[i];
    }
  });
  return load;
}

std::vector<double> assemble_weighted_body_load(const FeSpace& space, const FeSpace& weight_space,
                                                const std::vector<double>& weight,
                                                const std::vector<double>& f,
                                                const AssemblyOptions& opt) {
  check_same_mesh(space, weight_space, "assemble_weighted_body_load");
  check_field(weight, weight_space, "assemble_weighted_body_load(weight)");
  check_field(f, space, "assemble_weighted_body_load(f)");
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree(), weight_space.degree()));
  const BasisTable bs = tabulate_basis(mesh.dim, space.degree(), rule);
  const BasisTable bw = tabulate_basis(mesh.dim, weight_space.degree(), rule);
  const int n = bs.n, nw = bw.n, nq = static_cast<int>(rule.points.size());
  const int nc = space.ncomp();
  std::vector<double> load(static_cast<std::size_t>(space.ndofs()), 0.0);

  run_cells(
      static_cast<int>(mesh.cells.size()), n * nc,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        const int* snodes = space.cell_nodes(c);
        const int* wnodes = weight_space.cell_nodes(c);
        std::fill(local, local + n * nc, 0.0);
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* sv = bs.val.data() + static_cast<std::size_t>(q * n);
          const double* wv = bw.val.data() + static_cast<std::size_t>(q * nw);
          double rho = 0.0;
          for (int k = 0; k < nw; ++k) rho += wv[k] * weight[static_cast<std::size_t>(wnodes[k])];
          double fq[3] = {0.0, 0.0, 0.0};
          for (int k = 0; k < n; ++k)
            for (int comp = 0; comp < nc; ++comp) fq[comp] += sv[k] * f[static_cast<std::size_t>(snodes[k] * nc + comp)];
          for (int i = 0; i < n; ++i)
            for (int comp = 0; comp < nc; ++comp) local[i * nc + comp] += w * rho * fq[comp] * sv[i];
        }
      },
      [&](int c, const double* local) {
        const int* snodes = space.cell_nodes(c);
        for (int i = 0; i < n; ++i)
          for (int comp = 0; comp < nc; ++comp)
            load[static_cast<std::size_t>(snodes[i] * nc + comp)] += local[i * nc + comp];
      },
      opt.mode);
  return load;
}

std::vector<double> assemble_dissipation_load(const FeSpace& space, const FeSpace& vel,
                                              const std::vector<double>& u,
                                              const std::vector<double>& v,
                                              const AssemblyOptions& opt) {
  check_same_mesh(space, vel, "assemble_dissipation_load");
  check_field(u, vel, "assemble_dissipation_load(u)");
  check_field(v, vel, "assemble_dissipation_load(v)");
  if (space.ncomp() != 1) throw std::invalid_argument("assemble_dissipation_load: scalar space expected");
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree(), vel.degree()));
  const BasisTable bs = tabulate_basis(mesh.dim, space.degree(), rule);
  const BasisTable bv = tabulate_basis(mesh.dim, vel.degree(), rule);
  const int n = bs.n, nvb = bv.n, nq = static_cast<int>(rule.points.size());
  const int dim = mesh.dim;
  std::vector<double> load(static_cast<std::size_t>(space.ndofs()), 0.0);

  run_cells(
      static_cast<int>(mesh.cells.size()), n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        const int* vnodes = vel.cell_nodes(c);
        std::fill(local, local + n, 0.0);
        std::vector<Vec3> g(static_cast<std::size_t>(nvb));
        for (int q = 0; q < nq; ++q) {
          const double w = rule.weights[static_cast<std::size_t>(q)] * cm.detj;
          const double* sv = bs.val.data() + static_cast<std::size_t>(q * n);
          for (int k = 0; k < nvb; ++k) g[static_cast<std::size_t>(k)] = cm.grad(bv.ref_grad[static_cast<std::size_t>(q * nvb + k)]);
          double gu[3][3] = {}, gv[3][3] = {};
          for (int k = 0; k < nvb; ++k) {
            for (int comp = 0; comp < dim; ++comp) {
              const double uk = u[static_cast<std::size_t>(vnodes[k] * dim + comp)];
              const double vk = v[static_cast<std::size_t>(vnodes[k] * dim + comp)];
              for (int a = 0; a < dim; ++a) {
                gu[a][comp] += g[static_cast<std::size_t>(k)][a] * uk;
                gv[a][comp] += g[static_cast<std::size_t>(k)][a] * vk;
              }
            }
          }
          double dd = 0.0;
          for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
              dd += 0.25 * (gu[a][b] + gu[b][a]) * (gv[a][b] + gv[b][a]);
          for (int i = 0; i < n; ++i) local[i] += w * dd * sv[i];
        }
      },
      [&](int c, const double* local) {
        const int* snodes = space.cell_nodes(c);
        for (int i = 0; i < n; ++i) load[static_cast<std::size_t>(snodes[i])] += local[i];
      },
      opt.mode);
  return load;
}

std::vector<double> assemble_thermal_load(const FeSpace& space, const std::vector<double>& theta_inf,
                                          const std::vector<double>& q, const std::vector<double>& h,
                                          double alpha, const AssemblyOptions& opt) {
  check_field(theta_inf, space, "assemble_thermal_load(theta_inf)");
  check_field(q, space, "assemble_thermal_load(q)");
  check_field(h, space, "assemble_thermal_load(h)");
  if (space.ncomp() != 1) throw std::invalid_argument("assemble_thermal_load: scalar space expected");
  const auto& mesh = space.mesh();
  const auto& rule = simplex_rule(mesh.dim, opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree()));
  const BasisTable bt = tabulate_basis(mesh.dim, space.degree(), rule);
  const int n = bt.n, nq = static_cast<int>(rule.points.size());
  std::vector<double> load(static_cast<std::size_t>(space.ndofs()), 0.0);

  run_cells(
      static_cast<int>(mesh.cells.size()), n,
      [&](int c, double* local) {
        CellMap cm;
        cm.compute(mesh, c);
        const int* nodes = space.cell_nodes(c);
        std::fill(local, local + n, 0.0);
        for (int qq = 0; qq < nq; ++qq) {
          const double w = rule.weights[static_cast<std::size_t>(qq)] * cm.detj;
          const double* nv = bt.val.data() + static_cast<std::size_t>(qq * n);
          double hq = 0.0;
          for (int k = 0; k < n; ++k) hq += nv[k] * h[static_cast<std::size_t>(nodes[k])];
          for (int i = 0; i < n; ++i) local[i] += w * hq * nv[i];
        }
      },
      [&](int c, const double* local) {
        const int* nodes = space.cell_nodes(c);
        for (int i = 0; i < n; ++i) load[static_cast<std::size_t>(nodes[i])] += local[i];
      },
      opt.mode);

  const int qd = opt.quad_degree > 0 ? opt.quad_degree : default_degree(space.degree());
  for_wall_facets(space, qd, [&](int bf, const QuadratureRule& rule_f, const BasisTable& bt_f, const FacetMap& fm) {
    const int* fn = space.facet_nodes(bf);
    const int nf = bt_f.n;
    for (int qq = 0; qq < static_cast<int>(rule_f.points.size()); ++qq) {
      const double w = rule_f.weights[static_cast<std::size_t>(qq)] * fm.jac;
      const double* nv = bt_f.val.data() + static_cast<std::size_t>(qq * nf);
      double ti = 0.0, qi = 0.0;
      for (int k = 0; k < nf; ++k) {
        ti += nv[k] * theta_inf[static_cast<std::size_t>(fn[k])];
        qi += nv[k] * q[static_cast<std::size_t>(fn[k])];
      }
      for (int i = 0; i < nf; ++i) load[static_cast<std::size_t>(fn[i])] += w * (alpha * ti + qi) * nv[i];
    }
  });
  return load;
}

}  // namespace pipeflow

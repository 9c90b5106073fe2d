#include "pipeflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "pipeflow/log.hpp"

namespace pipeflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

int axis_direction(const Vec3& a, const Vec3& b, int dim) {
  // Returns the coordinate index along which the segment runs (positively);
  // throws if the segment is not axis-aligned or runs backwards.
  int axis = -1;
  for (int c = 0; c < dim; ++c) {
    if (a[c] == b[c]) continue;
    if (axis != -1) throw std::invalid_argument("pipe branch axis must be axis-aligned");
    axis = c;
  }
  if (axis == -1) throw std::invalid_argument("pipe branch axis is degenerate");
  if (b[axis] <= a[axis])
    throw std::invalid_argument("pipe branch axis must run in the positive coordinate sense");
  return axis;
}

std::vector<double> uniform_ticks(double a, double b, double h) {
  const int n = std::max(1, static_cast<int>(std::lround((b - a) / h)));
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  return t;
}

// Ticks covering the union of intervals with all breakpoints kept exact.
std::vector<double> union_ticks(std::vector<double> breaks, double h) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> t{breaks.front()};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto seg = uniform_ticks(breaks[i], breaks[i + 1], h);
    t.insert(t.end(), seg.begin() + 1, seg.end());
  }
  return t;
}

struct Section {
  std::vector<Vec3> pts;                 // (x, y) used, z = 0
  std::vector<std::array<int, 3>> tris;  // counterclockwise
};

Section disk_section(double radius, double h) {
  Section s;
  const int nr = std::max(1, static_cast<int>(std::lround(radius / h)));
  const int na = std::max(8, static_cast<int>(std::lround(2.0 * kPi * radius / h)));
  s.pts.push_back({0.0, 0.0, 0.0});
  for (int k = 1; k <= nr; ++k) {
    const double r = radius * k / nr;
    for (int m = 0; m < na; ++m) {
      const double phi = 2.0 * kPi * m / na;
      s.pts.push_back({r * std::cos(phi), r * std::sin(phi), 0.0});
    }
  }
  auto ring = [&](int k, int m) { return 1 + (k - 1) * na + ((m % na + na) % na); };
  for (int m = 0; m < na; ++m) s.tris.push_back({0, ring(1, m), ring(1, m + 1)});
  for (int k = 1; k < nr; ++k) {
    for (int m = 0; m < na; ++m) {
      const int a = ring(k, m), b = ring(k, m + 1);
      const int c = ring(k + 1, m + 1), d = ring(k + 1, m);
      s.tris.push_back({a, b, c});
      s.tris.push_back({a, c, d});
    }
  }
  return s;
}

Section rect_section(double half_width, double h) {
  Section s;
  const auto ys = uniform_ticks(-half_width, half_width, h);
  const int ny = static_cast<int>(ys.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < ny; ++i) s.pts.push_back({ys[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], 0.0});
  auto id = [&](int i, int j) { return j * ny + i; };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < ny; ++i) {
      s.tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      s.tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return s;
}

// Extrudes a 2D section along the canonical x axis into tetrahedra.  Each
// prism splits into 3 tets with quad diagonals anchored at the smaller
// section index, which makes the split conforming across neighbouring prisms
// and layers.
void extrude_section(const Section& s, double length, double h, PipeMesh& mesh) {
  const int nz = std::max(1, static_cast<int>(std::lround(length / h)));
  const int np = static_cast<int>(s.pts.size());
  for (int j = 0; j <= nz; ++j) {
    const double t = length * j / nz;
    for (const auto& p : s.pts) mesh.vertices.push_back({t, p.x, p.y});
  }
  auto vid = [&](int layer, int i) { return layer * np + i; };
  for (int j = 0; j < nz; ++j) {
    for (const auto& tri : s.tris) {
      std::array<int, 3> n = tri;
      std::sort(n.begin(), n.end());
      const int a0 = vid(j, n[0]), b0 = vid(j, n[1]), c0 = vid(j, n[2]);
      const int a1 = vid(j + 1, n[0]), b1 = vid(j + 1, n[1]), c1 = vid(j + 1, n[2]);
      mesh.cells.push_back({a0, b0, c0, c1});
      mesh.cells.push_back({a0, b0, c1, b1});
      mesh.cells.push_back({a0, b1, c1, a1});
    }
  }
}

// Maps canonical coordinates (t, s1, s2) onto the global frame where `axis`
// carries t and the remaining coordinates, in increasing order, carry s1, s2.
Vec3 place(const Vec3& canonical, int axis, int dim, const Vec3& origin) {
  Vec3 p = origin;
  p[axis] += canonical.x;
  if (dim == 2) {
    p[axis == 0 ? 1 : 0] += canonical.y;
  } else {
    const int o1 = axis == 0 ? 1 : 0;
    const int o2 = axis == 2 ? 1 : 2;
    p[o1] += canonical.y;
    p[o2] += canonical.z;
  }
  return p;
}

void orient_cells(PipeMesh& mesh) {
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (mesh.cell_volume(static_cast<int>(c)) < 0.0) std::swap(mesh.cells[c][1], mesh.cells[c][2]);
  }
}

PipeMesh straight_pipe(const PipeSpec& spec) {
  const PipeBranch& br = spec.branches[0];
  const int axis = axis_direction(br.a, br.b, spec.dim);
  const double length = br.b[axis] - br.a[axis];
  if (!(br.half_width > 0.0)) throw std::invalid_argument("pipe branch half-width must be positive");

  PipeMesh mesh;
  mesh.dim = spec.dim;
  if (spec.dim == 2) {
    const auto xs = uniform_ticks(0.0, length, spec.h);
    const auto ys = uniform_ticks(-br.half_width, br.half_width, spec.h);
    const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.vertices.push_back(place({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], 0.0}, axis, 2, br.a));
    auto id = [&](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        mesh.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), -1});
        mesh.cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1), -1});
      }
    }
  } else {
    const Section s = spec.cylindrical ? disk_section(br.half_width, spec.h)
                                       : rect_section(br.half_width, spec.h);
    extrude_section(s, length, spec.h, mesh);
    for (auto& v : mesh.vertices) v = place(v, axis, 3, br.a);
  }

  Vec3 n_out;
  n_out[axis] = 1.0;
  // circumscribed in-plane extent: square-duct caps reach the corners
  const double extent =
      (spec.dim == 3 && !spec.cylindrical) ? br.half_width * std::sqrt(2.0) : br.half_width;
  mesh.cuts.push_back({br.a, -1.0 * n_out, extent});
  mesh.cuts.push_back({br.b, n_out, extent});
  orient_cells(mesh);
  finalize_boundary(mesh);
  return mesh;
}

PipeMesh tjunction_pipe(const PipeSpec& spec) {
  const PipeBranch& main = spec.branches[0];
  const PipeBranch& side = spec.branches[1];
  if (axis_direction(main.a, main.b, 2) != 0)
    throw std::invalid_argument("T-junction: main branch must run along +x");
  if (axis_direction(side.a, side.b, 2) != 1)
    throw std::invalid_argument("T-junction: side branch must run along +y");
  const double x0 = main.a.x, x1 = main.b.x;
  const double yc = main.a.y, w = main.half_width;
  const double ylo = yc - w, yhi = yc + w;
  const double bx0 = side.a.x - side.half_width, bx1 = side.a.x + side.half_width;
  const double ytop = side.b.y;
  if (!(bx0 > x0 && bx1 < x1))
    throw std::invalid_argument("T-junction: side branch must attach strictly inside the main run");
  if (!(side.a.y > ylo && side.a.y < yhi) || !(ytop > yhi))
    throw std::invalid_argument("T-junction: side branch must start inside the main channel and exit through its top wall");

  const auto xs = union_ticks({x0, bx0, bx1, x1}, spec.h);
  const auto ys = union_ticks({ylo, yhi, ytop}, spec.h);
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());

  auto inside = [&](double cx, double cy) {
    const bool in_main = cx > x0 && cx < x1 && cy > ylo && cy < yhi;
    const bool in_side = cx > bx0 && cx < bx1 && cy > yhi && cy < ytop;
    return in_main || in_side;
  };

  PipeMesh mesh;
  mesh.dim = 2;
  std::vector<int> vmap(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), -1);
  auto use_vertex = [&](int i, int j) {
    int& id = vmap[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)];
    if (id < 0) {
      id = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)], 0.0});
    }
    return id;
  };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const double cx = 0.5 * (xs[static_cast<std::size_t>(i)] + xs[static_cast<std::size_t>(i) + 1]);
      const double cy = 0.5 * (ys[static_cast<std::size_t>(j)] + ys[static_cast<std::size_t>(j) + 1]);
      if (!inside(cx, cy)) continue;
      const int v00 = use_vertex(i, j), v10 = use_vertex(i + 1, j);
      const int v11 = use_vertex(i + 1, j + 1), v01 = use_vertex(i, j + 1);
      mesh.cells.push_back({v00, v10, v11, -1});
      mesh.cells.push_back({v00, v11, v01, -1});
    }
  }

  mesh.cuts.push_back({{x0, yc, 0.0}, {-1.0, 0.0, 0.0}, w});
  mesh.cuts.push_back({{x1, yc, 0.0}, {1.0, 0.0, 0.0}, w});
  mesh.cuts.push_back({{side.a.x, ytop, 0.0}, {0.0, 1.0, 0.0}, side.half_width});
  orient_cells(mesh);
  finalize_boundary(mesh);
  return mesh;
}

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace

double PipeMesh::cell_volume(int c) const {
  const auto& cl = cells[static_cast<std::size_t>(c)];
  const Vec3 a = vertices[static_cast<std::size_t>(cl[0])];
  const Vec3 b = vertices[static_cast<std::size_t>(cl[1])];
  const Vec3 d = vertices[static_cast<std::size_t>(cl[2])];
  if (dim == 2) return 0.5 * cross(b - a, d - a).z;
  const Vec3 e = vertices[static_cast<std::size_t>(cl[3])];
  return dot(cross(b - a, d - a), e - a) / 6.0;
}

double PipeMesh::diameter() const {
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const auto& v : vertices) {
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], v[c]);
      hi[c] = std::max(hi[c], v[c]);
    }
  }
  return norm(hi - lo);
}

double PipeMesh::total_volume() const {
  double v = 0.0;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) v += cell_volume(c);
  return v;
}

PipeMesh generate_pipe(const PipeSpec& spec) {
  if (spec.dim != 2 && spec.dim != 3) throw std::invalid_argument("generate_pipe: dim must be 2 or 3");
  if (!(spec.h > 0.0)) throw std::invalid_argument("generate_pipe: target size h must be positive");
  if (spec.branches.empty()) throw std::invalid_argument("generate_pipe: no branches given");
  if (spec.dim == 3 && spec.branches.size() != 1)
    throw std::invalid_argument("generate_pipe: 3D supports a single straight branch");
  if (spec.branches.size() > 2)
    throw std::invalid_argument("generate_pipe: at most two branches supported");
  PipeMesh mesh = spec.branches.size() == 1 ? straight_pipe(spec) : tjunction_pipe(spec);
  log_debug("generated pipe mesh: " + std::to_string(mesh.vertices.size()) + " vertices, " +
            std::to_string(mesh.cells.size()) + " cells, " + std::to_string(mesh.boundary.size()) +
            " boundary facets");
  return mesh;
}

void finalize_boundary(PipeMesh& mesh) {
  const int nfv = mesh.dim;  // vertices per facet
  using Key = std::array<int, 3>;
  struct FaceInfo {
    int count = 0;
    int cell = -1;
    std::array<int, 3> verts = {-1, -1, -1};
  };
  std::map<Key, FaceInfo> faces;

  auto face_key = [&](std::array<int, 3> v) {
    std::sort(v.begin(), v.begin() + nfv);
    return v;
  };

  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    const auto& cl = mesh.cells[static_cast<std::size_t>(c)];
    std::vector<std::array<int, 3>> local;
    if (mesh.dim == 2) {
      local = {{cl[0], cl[1], -1}, {cl[1], cl[2], -1}, {cl[2], cl[0], -1}};
    } else {
      local = {{cl[1], cl[2], cl[3]}, {cl[0], cl[2], cl[3]}, {cl[0], cl[1], cl[3]}, {cl[0], cl[1], cl[2]}};
    }
    for (const auto& f : local) {
      auto& info = faces[face_key(f)];
      ++info.count;
      if (info.count == 1) {
        info.cell = c;
        info.verts = f;
      }
    }
  }

  const double diam = mesh.diameter();
  const double plane_tol = 1e-12 * std::max(diam, 1.0) * 10.0;

  auto cut_tag = [&](const std::array<int, 3>& verts) {
    Vec3 centroid;
    for (int k = 0; k < nfv; ++k) centroid = centroid + (1.0 / nfv) * mesh.vertices[static_cast<std::size_t>(verts[static_cast<std::size_t>(k)])];
    for (int i = 0; i < mesh.n_cuts(); ++i) {
      const CutPlane& cp = mesh.cuts[static_cast<std::size_t>(i)];
      bool on_plane = true;
      for (int k = 0; k < nfv && on_plane; ++k) {
        const Vec3 v = mesh.vertices[static_cast<std::size_t>(verts[static_cast<std::size_t>(k)])];
        if (std::abs(dot(v - cp.point, cp.normal)) > plane_tol) on_plane = false;
      }
      if (!on_plane) continue;
      const Vec3 d = centroid - cp.point;
      const Vec3 in_plane = d - dot(d, cp.normal) * cp.normal;
      if (norm(in_plane) <= cp.radius * (1.0 + 1e-9) + plane_tol) return i + 1;
    }
    return kWallTag;
  };

  auto fill_geometry = [&](BoundaryFacet& f) {
    const Vec3 a = mesh.vertices[static_cast<std::size_t>(f.v[0])];
    const Vec3 b = mesh.vertices[static_cast<std::size_t>(f.v[1])];
    Vec3 n;
    Vec3 fc;
    if (mesh.dim == 2) {
      const Vec3 t = b - a;
      f.measure = norm(t);
      n = {t.y / f.measure, -t.x / f.measure, 0.0};
      fc = 0.5 * (a + b);
    } else {
      const Vec3 c = mesh.vertices[static_cast<std::size_t>(f.v[2])];
      const Vec3 cr = cross(b - a, c - a);
      f.measure = 0.5 * norm(cr);
      n = (1.0 / (2.0 * f.measure)) * cr;
      fc = (1.0 / 3.0) * (a + b + c);
    }
    // orient outward: away from the parent cell centroid
    const auto& cl = mesh.cells[static_cast<std::size_t>(f.cell)];
    Vec3 cc;
    const int ncv = mesh.dim + 1;
    for (int k = 0; k < ncv; ++k) cc = cc + (1.0 / ncv) * mesh.vertices[static_cast<std::size_t>(cl[static_cast<std::size_t>(k)])];
    if (dot(n, fc - cc) < 0.0) n = -1.0 * n;
    f.normal = n;
  };

  if (mesh.boundary.empty()) {
    // Generator path: collect boundary faces in deterministic cell order.
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
      const auto& cl = mesh.cells[static_cast<std::size_t>(c)];
      std::vector<std::array<int, 3>> local;
      if (mesh.dim == 2) {
        local = {{cl[0], cl[1], -1}, {cl[1], cl[2], -1}, {cl[2], cl[0], -1}};
      } else {
        local = {{cl[1], cl[2], cl[3]}, {cl[0], cl[2], cl[3]}, {cl[0], cl[1], cl[3]}, {cl[0], cl[1], cl[2]}};
      }
      for (const auto& fv : local) {
        const auto& info = faces.at(face_key(fv));
        if (info.count != 1 || info.cell != c) continue;
        BoundaryFacet f;
        f.v = fv;
        f.cell = c;
        f.tag = cut_tag(fv);
        fill_geometry(f);
        mesh.boundary.push_back(f);
      }
    }
  } else {
    // Importer path: the listed facets must exactly cover the boundary.
    std::map<Key, int> seen;
    for (auto& f : mesh.boundary) {
      const Key key = face_key(f.v);
      const auto it = faces.find(key);
      if (it == faces.end() || it->second.count == 0)
        throw std::runtime_error("mesh boundary: tagged facet does not match any cell face");
      if (it->second.count > 1)
        throw std::runtime_error("mesh boundary: tagged facet is interior (non-manifold tagging)");
      if (++seen[key] > 1) throw std::runtime_error("mesh boundary: facet tagged more than once");
      f.cell = it->second.cell;
      fill_geometry(f);
    }
    std::size_t n_boundary = 0;
    for (const auto& [key, info] : faces)
      if (info.count == 1) ++n_boundary;
    if (seen.size() != n_boundary)
      throw std::runtime_error("mesh boundary: boundary facets without a tag");
  }

  bool has_wall = false, has_cut = false;
  for (const auto& f : mesh.boundary) {
    if (f.tag == kWallTag) has_wall = true;
    if (f.tag > 0) has_cut = true;
  }
  if (!has_cut) throw std::runtime_error("mesh boundary: no truncation cuts (pipe must be open)");
  if (!has_wall) throw std::runtime_error("mesh boundary: no lateral wall facets");
}

GeometryReport validate_geometry(const PipeMesh& mesh) {
  GeometryReport rep;
  const double diam = mesh.diameter();

  rep.min_cell_volume = std::numeric_limits<double>::max();
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    const double v = mesh.cell_volume(c);
    rep.min_cell_volume = std::min(rep.min_cell_volume, v);
    const auto& cl = mesh.cells[static_cast<std::size_t>(c)];
    double lmax = 0.0;
    const int ncv = mesh.dim + 1;
    for (int i = 0; i < ncv; ++i)
      for (int j = i + 1; j < ncv; ++j)
        lmax = std::max(lmax, norm(mesh.vertices[static_cast<std::size_t>(cl[static_cast<std::size_t>(i)])] -
                                   mesh.vertices[static_cast<std::size_t>(cl[static_cast<std::size_t>(j)])]));
    double rin;
    if (mesh.dim == 2) {
      const Vec3 a = mesh.vertices[static_cast<std::size_t>(cl[0])], b = mesh.vertices[static_cast<std::size_t>(cl[1])],
                 d = mesh.vertices[static_cast<std::size_t>(cl[2])];
      const double per = norm(b - a) + norm(d - b) + norm(a - d);
      rin = 2.0 * std::abs(v) / per;
      rep.min_cell_quality = std::min(rep.min_cell_quality, 2.0 * std::sqrt(3.0) * rin / lmax);
    } else {
      const Vec3 a = mesh.vertices[static_cast<std::size_t>(cl[0])], b = mesh.vertices[static_cast<std::size_t>(cl[1])],
                 d = mesh.vertices[static_cast<std::size_t>(cl[2])], e = mesh.vertices[static_cast<std::size_t>(cl[3])];
      const double area = tri_area(b, d, e) + tri_area(a, d, e) + tri_area(a, b, e) + tri_area(a, b, d);
      rin = 3.0 * std::abs(v) / area;
      rep.min_cell_quality = std::min(rep.min_cell_quality, 2.0 * std::sqrt(6.0) * rin / lmax);
    }
    if (v <= 0.0) {
      rep.ok = false;
      rep.failures.push_back("cell " + std::to_string(c) + " has nonpositive volume");
    }
  }

  for (const auto& f : mesh.boundary) {
    if (f.tag == kWallTag) continue;
    const CutPlane& cp = mesh.cuts[static_cast<std::size_t>(f.tag - 1)];
    for (int k = 0; k < mesh.dim; ++k) {
      const Vec3 v = mesh.vertices[static_cast<std::size_t>(f.v[static_cast<std::size_t>(k)])];
      rep.max_cut_deviation = std::max(rep.max_cut_deviation, std::abs(dot(v - cp.point, cp.normal)));
    }
  }
  if (rep.max_cut_deviation > 1e-8 * diam) {
    rep.ok = false;
    rep.failures.push_back("cut facets deviate from their plane beyond 1e-8 of the diameter");
  }

  // Wall facets adjacent to a cut facet must meet it at a right angle.
  std::map<std::array<int, 2>, std::vector<int>> iface;  // shared edge (3D) / vertex (2D)
  for (int bf = 0; bf < static_cast<int>(mesh.boundary.size()); ++bf) {
    const auto& f = mesh.boundary[static_cast<std::size_t>(bf)];
    if (mesh.dim == 2) {
      iface[{f.v[0], -1}].push_back(bf);
      iface[{f.v[1], -1}].push_back(bf);
    } else {
      for (int k = 0; k < 3; ++k) {
        std::array<int, 2> e = {f.v[static_cast<std::size_t>(k)], f.v[static_cast<std::size_t>((k + 1) % 3)]};
        if (e[0] > e[1]) std::swap(e[0], e[1]);
        iface[e].push_back(bf);
      }
    }
  }
  for (const auto& [key, lst] : iface) {
    for (std::size_t i = 0; i < lst.size(); ++i) {
      for (std::size_t j = i + 1; j < lst.size(); ++j) {
        const auto& fi = mesh.boundary[static_cast<std::size_t>(lst[i])];
        const auto& fj = mesh.boundary[static_cast<std::size_t>(lst[j])];
        const bool wall_cut = (fi.tag == kWallTag) != (fj.tag == kWallTag);
        if (!wall_cut) continue;
        const double c = std::clamp(dot(fi.normal, fj.normal), -1.0, 1.0);
        const double dev = std::abs(90.0 - std::acos(c) * 180.0 / kPi);
        rep.max_angle_deviation = std::max(rep.max_angle_deviation, dev);
      }
    }
  }
  if (rep.max_angle_deviation > 2.0) {
    rep.ok = false;
    rep.failures.push_back("wall meets a cut at an angle deviating more than 2 degrees from 90");
  }

  return rep;
}

}  // namespace pipeflow

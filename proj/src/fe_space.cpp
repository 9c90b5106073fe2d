#include "pipeflow/fe_space.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace pipeflow {

namespace {

// local edges in the order used for degree-2 nodes
constexpr int kTriEdges[3][2] = {{0, 1}, {1, 2}, {2, 0}};
constexpr int kTetEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

}  // namespace

int basis_size(int dim, int degree) {
  if (degree == 1) return dim + 1;
  return dim == 1 ? 3 : (dim == 2 ? 6 : 10);
}

void eval_basis(int dim, int degree, const Vec3& xi, double* values, Vec3* grads) {
  // barycentric coordinates and their reference gradients
  double lam[4];
  Vec3 dlam[4];
  lam[0] = 1.0;
  for (int c = 0; c < dim; ++c) {
    lam[0] -= xi[c];
    lam[c + 1] = xi[c];
    dlam[0][c] = -1.0;
    Vec3 g;
    g[c] = 1.0;
    dlam[c + 1] = g;
  }
  const int nv = dim + 1;
  if (degree == 1) {
    for (int i = 0; i < nv; ++i) {
      values[i] = lam[i];
      grads[i] = dlam[i];
    }
    return;
  }
  for (int i = 0; i < nv; ++i) {
    values[i] = lam[i] * (2.0 * lam[i] - 1.0);
    grads[i] = (4.0 * lam[i] - 1.0) * dlam[i];
  }
  const int ne = dim == 1 ? 1 : (dim == 2 ? 3 : 6);
  for (int e = 0; e < ne; ++e) {
    int a, b;
    if (dim == 1) {
      a = 0;
      b = 1;
    } else if (dim == 2) {
      a = kTriEdges[e][0];
      b = kTriEdges[e][1];
    } else {
      a = kTetEdges[e][0];
      b = kTetEdges[e][1];
    }
    values[nv + e] = 4.0 * lam[a] * lam[b];
    grads[nv + e] = 4.0 * lam[b] * dlam[a] + 4.0 * lam[a] * dlam[b];
  }
}

FeSpace::FeSpace(const PipeMesh& mesh, int degree, int ncomp)
    : mesh_(&mesh), degree_(degree), ncomp_(ncomp) {
  if (degree != 1 && degree != 2) throw std::invalid_argument("FeSpace: degree must be 1 or 2");
  if (ncomp < 1) throw std::invalid_argument("FeSpace: ncomp must be >= 1");
  const int dim = mesh.dim;
  const int nv_cell = dim + 1;
  const int ne_cell = dim == 2 ? 3 : 6;
  nodes_per_cell_ = degree == 1 ? nv_cell : nv_cell + ne_cell;
  nodes_per_facet_ = degree == 1 ? dim : (dim == 2 ? 3 : 6);

  const int nverts = static_cast<int>(mesh.vertices.size());
  node_coords_.assign(mesh.vertices.begin(), mesh.vertices.end());

  std::map<std::array<int, 2>, int> edge_ids;
  if (degree == 2) {
    // collect and sort edges for deterministic numbering
    std::vector<std::array<int, 2>> edges;
    for (const auto& cl : mesh.cells) {
      for (int e = 0; e < ne_cell; ++e) {
        int a = dim == 2 ? cl[static_cast<std::size_t>(kTriEdges[e][0])] : cl[static_cast<std::size_t>(kTetEdges[e][0])];
        int b = dim == 2 ? cl[static_cast<std::size_t>(kTriEdges[e][1])] : cl[static_cast<std::size_t>(kTetEdges[e][1])];
        if (a > b) std::swap(a, b);
        edges.push_back({a, b});
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edge_ids[edges[i]] = nverts + static_cast<int>(i);
      node_coords_.push_back(0.5 * (mesh.vertices[static_cast<std::size_t>(edges[i][0])] +
                                    mesh.vertices[static_cast<std::size_t>(edges[i][1])]));
    }
  }
  n_scalar_ = static_cast<int>(node_coords_.size());

  auto edge_node = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return edge_ids.at({a, b});
  };

  cell_nodes_.resize(mesh.cells.size() * static_cast<std::size_t>(nodes_per_cell_));
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cl = mesh.cells[c];
    int* out = cell_nodes_.data() + c * static_cast<std::size_t>(nodes_per_cell_);
    for (int i = 0; i < nv_cell; ++i) out[i] = cl[static_cast<std::size_t>(i)];
    if (degree == 2) {
      for (int e = 0; e < ne_cell; ++e) {
        const int a = dim == 2 ? cl[static_cast<std::size_t>(kTriEdges[e][0])] : cl[static_cast<std::size_t>(kTetEdges[e][0])];
        const int b = dim == 2 ? cl[static_cast<std::size_t>(kTriEdges[e][1])] : cl[static_cast<std::size_t>(kTetEdges[e][1])];
        out[nv_cell + e] = edge_node(a, b);
      }
    }
  }

  facet_nodes_.resize(mesh.boundary.size() * static_cast<std::size_t>(nodes_per_facet_));
  for (std::size_t bf = 0; bf < mesh.boundary.size(); ++bf) {
    const auto& f = mesh.boundary[bf];
    int* out = facet_nodes_.data() + bf * static_cast<std::size_t>(nodes_per_facet_);
    for (int i = 0; i < dim; ++i) out[i] = f.v[static_cast<std::size_t>(i)];
    if (degree == 2) {
      if (dim == 2) {
        out[2] = edge_node(f.v[0], f.v[1]);
      } else {
        out[3] = edge_node(f.v[0], f.v[1]);
        out[4] = edge_node(f.v[1], f.v[2]);
        out[5] = edge_node(f.v[2], f.v[0]);
      }
    }
  }

  on_wall_.assign(static_cast<std::size_t>(n_scalar_), 0);
  for (std::size_t bf = 0; bf < mesh.boundary.size(); ++bf) {
    if (mesh.boundary[bf].tag != kWallTag) continue;
    const int* fn = facet_nodes(static_cast<int>(bf));
    for (int i = 0; i < nodes_per_facet_; ++i) on_wall_[static_cast<std::size_t>(fn[i])] = 1;
  }
}

std::vector<std::uint8_t> FeSpace::wall_dof_mask() const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(ndofs()), 0);
  for (int n = 0; n < n_scalar_; ++n) {
    if (!on_wall(n)) continue;
    for (int c = 0; c < ncomp_; ++c) mask[static_cast<std::size_t>(n * ncomp_ + c)] = 1;
  }
  return mask;
}

std::vector<double> FeSpace::interpolate(const std::function<double(const Vec3&, double)>& f,
                                         double t) const {
  if (ncomp_ != 1) throw std::invalid_argument("interpolate: scalar space expected");
  std::vector<double> v(static_cast<std::size_t>(ndofs()));
  for (int n = 0; n < n_scalar_; ++n) v[static_cast<std::size_t>(n)] = f(node_coords_[static_cast<std::size_t>(n)], t);
  return v;
}

std::vector<double> FeSpace::interpolate_vector(const std::function<Vec3(const Vec3&, double)>& f,
                                                double t) const {
  if (ncomp_ != mesh_->dim) throw std::invalid_argument("interpolate_vector: vector space expected");
  std::vector<double> v(static_cast<std::size_t>(ndofs()));
  for (int n = 0; n < n_scalar_; ++n) {
    const Vec3 val = f(node_coords_[static_cast<std::size_t>(n)], t);
    for (int c = 0; c < ncomp_; ++c) v[static_cast<std::size_t>(n * ncomp_ + c)] = val[c];
  }
  return v;
}

}  // namespace pipeflow

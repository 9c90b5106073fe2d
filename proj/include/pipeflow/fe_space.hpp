#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "pipeflow/mesh.hpp"

namespace pipeflow {

// Continuous Lagrange space of degree 1 or 2 on a simplicial pipe mesh,
// with `ncomp` interleaved components (dof = scalar_node * ncomp + comp).
// Scalar nodes are the mesh vertices followed, for degree 2, by the edge
// midpoints in lexicographic edge order, which makes dof numbering
// deterministic and independent of construction order.
class FeSpace {
 public:
  FeSpace(const PipeMesh& mesh, int degree, int ncomp);

  const PipeMesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int ncomp() const { return ncomp_; }
  int n_scalar_nodes() const { return n_scalar_; }
  int ndofs() const { return n_scalar_ * ncomp_; }
  int nodes_per_cell() const { return nodes_per_cell_; }
  int nodes_per_facet() const { return nodes_per_facet_; }

  // scalar node ids of a cell, in reference order (vertices then edges)
  const int* cell_nodes(int c) const { return cell_nodes_.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(nodes_per_cell_); }
  // scalar node ids of a boundary facet (vertices then facet edges)
  const int* facet_nodes(int bf) const { return facet_nodes_.data() + static_cast<std::size_t>(bf) * static_cast<std::size_t>(nodes_per_facet_); }

  const Vec3& node_coord(int n) const { return node_coords_[static_cast<std::size_t>(n)]; }
  // true if the scalar node lies on the closure of the lateral wall; this
  // includes every node shared between wall and cut facets
  bool on_wall(int n) const { return on_wall_[static_cast<std::size_t>(n)] != 0; }

  std::vector<std::uint8_t> wall_dof_mask() const;  // per dof, 1 = constrained

  // nodal interpolation of time-dependent data
  std::vector<double> interpolate(const std::function<double(const Vec3&, double)>& f, double t) const;
  std::vector<double> interpolate_vector(const std::function<Vec3(const Vec3&, double)>& f, double t) const;

 private:
  const PipeMesh* mesh_;
  int degree_, ncomp_;
  int n_scalar_ = 0, nodes_per_cell_ = 0, nodes_per_facet_ = 0;
  std::vector<int> cell_nodes_;
  std::vector<int> facet_nodes_;
  std::vector<Vec3> node_coords_;
  std::vector<std::uint8_t> on_wall_;
};

// Reference basis evaluation at a reference point.  `dim` is the simplex
// dimension, `degree` 1 or 2; writes nodes(dim,degree) values and reference
// gradients.  Node order matches FeSpace::cell_nodes / facet_nodes.
int basis_size(int dim, int degree);
void eval_basis(int dim, int degree, const Vec3& xi, double* values, Vec3* grads);

}  // namespace pipeflow

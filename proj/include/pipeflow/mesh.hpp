#pragma once

#include <array>
#include <string>
#include <vector>

#include "pipeflow/geometry.hpp"

namespace pipeflow {

// Boundary tag convention: 0 is the lateral wall, i >= 1 is the i-th
// truncation cut.  Every boundary facet carries exactly one tag.
inline constexpr int kWallTag = 0;

struct BoundaryFacet {
  std::array<int, 3> v = {-1, -1, -1};  // vertex ids, 2 in 2D, 3 in 3D
  int cell = -1;                        // parent cell
  int tag = kWallTag;
  Vec3 normal;                          // unit outward normal
  double measure = 0.0;                 // length (2D) or area (3D)
};

struct CutPlane {
  Vec3 point;    // a point on the plane
  Vec3 normal;   // unit outward normal
  double radius = 0.0;  // extent around `point` (half-width or section radius)
};

struct PipeMesh {
  int dim = 2;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;  // triangles use slots 0..2, [3] = -1
  std::vector<BoundaryFacet> boundary;
  std::vector<CutPlane> cuts;  // cuts[i] describes tag i+1

  int verts_per_cell() const { return dim + 1; }
  int n_cuts() const { return static_cast<int>(cuts.size()); }
  double cell_volume(int c) const;  // signed; positive after construction
  double diameter() const;          // bounding-box diagonal
  double total_volume() const;
};

// One straight branch of a pipe system.  The axis must be aligned with a
// coordinate direction and run in its positive sense; cut planes are the
// orthogonal planes through the endpoints.
struct PipeBranch {
  Vec3 a, b;
  double half_width = 1.0;  // half-width in 2D, section radius in 3D
};

struct PipeSpec {
  int dim = 2;
  std::vector<PipeBranch> branches;  // 1 = straight pipe; 2 = 2D T-junction
  double h = 0.1;                    // target mesh size
  bool cylindrical = true;           // 3D section: disk (true) or square duct
};

// Structured generator.  Supported configurations:
//  - 2D, 1 branch: rectangular channel, cuts at both ends;
//  - 2D, 2 branches: T-junction, the second branch grafted onto the first,
//    cuts at the three free ends;
//  - 3D, 1 branch: extruded cylinder or square duct, cuts at both caps.
PipeMesh generate_pipe(const PipeSpec& spec);

struct GeometryReport {
  bool ok = true;
  double max_cut_deviation = 0.0;      // distance of cut facet vertices to plane
  double max_angle_deviation = 0.0;    // wall/cut dihedral deviation from 90 deg
  double min_cell_quality = 1.0;       // scaled inradius/longest-edge, 1 = regular
  double min_cell_volume = 0.0;
  std::vector<std::string> failures;
};

// Coplanarity threshold is relative to the mesh diameter; the angle threshold
// is 2 degrees.  Quality is reported but not thresholded.
GeometryReport validate_geometry(const PipeMesh& mesh);

// Rebuilds facet normals/measures/parents for `mesh.boundary`, checks that
// tagged facets exactly cover the topological boundary.  Used by the
// generator and the importer.
void finalize_boundary(PipeMesh& mesh);

}  // namespace pipeflow

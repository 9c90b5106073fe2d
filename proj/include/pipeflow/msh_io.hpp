#pragma once

#include <string>

#include "pipeflow/mesh.hpp"

namespace pipeflow {

// ASCII MSH version 2 import.  Physical groups name the boundary pieces:
// "wall" for the lateral wall and "cut_1", "cut_2", ... for the truncation
// cuts.  Volume elements are triangles (2D) or tetrahedra (3D); boundary
// elements are lines resp. triangles.  Unknown group names, unsupported
// element types and non-manifold boundary tagging are errors.
PipeMesh import_msh(const std::string& path);

// Matching writer, mainly for round-trip fixtures and mesh export.
void write_msh(const PipeMesh& mesh, const std::string& path);

}  // namespace pipeflow

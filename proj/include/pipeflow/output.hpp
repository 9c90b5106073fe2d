#pragma once

#include <string>
#include <vector>

#include "pipeflow/mesh.hpp"
#include "pipeflow/momentum.hpp"

namespace pipeflow {

// fixed 17-significant-digit formatting shared by every text artifact
std::string format_float(double v);

struct VtkField {
  std::string name;
  int ncomp = 1;             // 1, 2 or 3; vectors are padded to 3 on output
  std::vector<double> data;  // one tuple per mesh vertex, interleaved
};

// legacy ASCII unstructured grid with linear cells and point data
void write_vtk(const std::string& path, const PipeMesh& mesh, const std::vector<VtkField>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// raw frame archive so subsystem runs can feed each other
void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path);

}  // namespace pipeflow

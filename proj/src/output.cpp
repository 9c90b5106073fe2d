#include "pipeflow/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pipeflow {

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vtk(const std::string& path, const PipeMesh& mesh, const std::vector<VtkField>& fields) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  const int nverts = static_cast<int>(mesh.vertices.size());
  const int ncells = static_cast<int>(mesh.cells.size());
  const int vpc = mesh.verts_per_cell();

  out << "# vtk DataFile Version 3.0\n";
  out << "pipeflow fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nverts << " double\n";
  for (const Vec3& v : mesh.vertices)
    out << format_float(v.x) << " " << format_float(v.y) << " " << format_float(v.z) << "\n";
  out << "CELLS " << ncells << " " << ncells * (1 + vpc) << "\n";
  for (const auto& c : mesh.cells) {
    out << vpc;
    for (int i = 0; i < vpc; ++i) out << " " << c[static_cast<std::size_t>(i)];
    out << "\n";
  }
  out << "CELL_TYPES " << ncells << "\n";
  for (int c = 0; c < ncells; ++c) out << (mesh.dim == 2 ? 5 : 10) << "\n";

  if (fields.empty()) return;
  out << "POINT_DATA " << nverts << "\n";
  for (const auto& f : fields) {
    if (static_cast<int>(f.data.size()) != nverts * f.ncomp)
      throw std::invalid_argument("write_vtk: field '" + f.name + "' has wrong length");
    if (f.ncomp == 1) {
      out << "SCALARS " << f.name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double v : f.data) out << format_float(v) << "\n";
    } else {
      out << "VECTORS " << f.name << " double\n";
      for (int i = 0; i < nverts; ++i) {
        for (int c = 0; c < 3; ++c) {
          const double v = c < f.ncomp ? f.data[static_cast<std::size_t>(i * f.ncomp + c)] : 0.0;
          out << (c ? " " : "") << format_float(v);
        }
        out << "\n";
      }
    }
  }
  if (!out) throw std::runtime_error("write_vtk: write failed for " + path);
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("write_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

namespace {
constexpr char kTrajMagic[] = "PFTRAJ1\n";
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_trajectory: cannot open " + path);
  out.write(kTrajMagic, sizeof(kTrajMagic) - 1);
  const std::uint64_t nframes = traj.size();
  const std::uint64_t frame = traj.empty() ? 0 : traj.front().size();
  out.write(reinterpret_cast<const char*>(&nframes), sizeof(nframes));
  out.write(reinterpret_cast<const char*>(&frame), sizeof(frame));
  for (const auto& f : traj) {
    if (f.size() != frame) throw std::invalid_argument("save_trajectory: ragged frames");
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(frame * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_trajectory: write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);
  char magic[sizeof(kTrajMagic) - 1];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, sizeof(magic)) != std::string(kTrajMagic, sizeof(magic)))
    throw std::runtime_error("load_trajectory: " + path + " is not a trajectory archive");
  std::uint64_t nframes = 0, frame = 0;
  in.read(reinterpret_cast<char*>(&nframes), sizeof(nframes));
  in.read(reinterpret_cast<char*>(&frame), sizeof(frame));
  Trajectory traj(nframes, std::vector<double>(frame));
  for (auto& f : traj)
    in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(frame * sizeof(double)));
  if (!in) throw std::runtime_error("load_trajectory: truncated archive " + path);
  return traj;
}

}  // namespace pipeflow

#include "pipeflow/msh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pipeflow {

namespace {

std::string next_content_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw std::runtime_error("msh import: unexpected end of file");
}

struct RawElement {
  int type = 0;
  int phys = 0;
  std::array<int, 4> nodes = {-1, -1, -1, -1};
};

// Fits the cut planes from the tagged facets once normals are available.
void fit_cut_planes(PipeMesh& mesh, int max_cut) {
  mesh.cuts.assign(static_cast<std::size_t>(max_cut), CutPlane{});
  std::vector<double> area(static_cast<std::size_t>(max_cut), 0.0);
  for (const auto& f : mesh.boundary) {
    if (f.tag == kWallTag) continue;
    auto& cp = mesh.cuts[static_cast<std::size_t>(f.tag - 1)];
    Vec3 centroid;
    for (int k = 0; k < mesh.dim; ++k)
      centroid = centroid + (1.0 / mesh.dim) * mesh.vertices[static_cast<std::size_t>(f.v[static_cast<std::size_t>(k)])];
    cp.point = cp.point + f.measure * centroid;
    cp.normal = cp.normal + f.measure * f.normal;
    area[static_cast<std::size_t>(f.tag - 1)] += f.measure;
  }
  for (int i = 0; i < max_cut; ++i) {
    auto& cp = mesh.cuts[static_cast<std::size_t>(i)];
    if (area[static_cast<std::size_t>(i)] == 0.0)
      throw std::runtime_error("msh import: cut_" + std::to_string(i + 1) + " has no facets");
    cp.point = (1.0 / area[static_cast<std::size_t>(i)]) * cp.point;
    const double nn = norm(cp.normal);
    if (nn == 0.0) throw std::runtime_error("msh import: degenerate cut normal");
    cp.normal = (1.0 / nn) * cp.normal;
  }
  for (const auto& f : mesh.boundary) {
    if (f.tag == kWallTag) continue;
    auto& cp = mesh.cuts[static_cast<std::size_t>(f.tag - 1)];
    for (int k = 0; k < mesh.dim; ++k) {
      const Vec3 d = mesh.vertices[static_cast<std::size_t>(f.v[static_cast<std::size_t>(k)])] - cp.point;
      const Vec3 in_plane = d - dot(d, cp.normal) * cp.normal;
      cp.radius = std::max(cp.radius, norm(in_plane));
    }
  }
}

}  // namespace

PipeMesh import_msh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("msh import: cannot open '" + path + "'");

  PipeMesh mesh;
  std::map<int, std::string> phys_names;
  std::map<long, int> node_ids;
  std::vector<RawElement> elements;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "$MeshFormat") {
      std::istringstream fs(next_content_line(in));
      double version = 0.0;
      int file_type = 0, data_size = 0;
      fs >> version >> file_type >> data_size;
      if (!(version >= 2.0 && version < 3.0) || file_type != 0)
        throw std::runtime_error("msh import: only ASCII MSH version 2 is supported");
      if (next_content_line(in) != "$EndMeshFormat")
        throw std::runtime_error("msh import: malformed $MeshFormat section");
    } else if (line == "$PhysicalNames") {
      const int n = std::stoi(next_content_line(in));
      for (int i = 0; i < n; ++i) {
        std::istringstream ls(next_content_line(in));
        int dim = 0, id = 0;
        std::string name;
        ls >> dim >> id >> name;
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
          name = name.substr(1, name.size() - 2);
        phys_names[id] = name;
      }
      if (next_content_line(in) != "$EndPhysicalNames")
        throw std::runtime_error("msh import: malformed $PhysicalNames section");
    } else if (line == "$Nodes") {
      const long n = std::stol(next_content_line(in));
      for (long i = 0; i < n; ++i) {
        std::istringstream ls(next_content_line(in));
        long id = 0;
        double x = 0, y = 0, z = 0;
        ls >> id >> x >> y >> z;
        if (!ls) throw std::runtime_error("msh import: malformed node line");
        node_ids[id] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back({x, y, z});
      }
      if (next_content_line(in) != "$EndNodes")
        throw std::runtime_error("msh import: malformed $Nodes section");
    } else if (line == "$Elements") {
      const long n = std::stol(next_content_line(in));
      for (long i = 0; i < n; ++i) {
        std::istringstream ls(next_content_line(in));
        long id = 0;
        RawElement el;
        int ntags = 0;
        ls >> id >> el.type >> ntags;
        for (int t = 0; t < ntags; ++t) {
          int tag = 0;
          ls >> tag;
          if (t == 0) el.phys = tag;
        }
        int nnodes = 0;
        switch (el.type) {
          case 15: nnodes = 1; break;
          case 1: nnodes = 2; break;
          case 2: nnodes = 3; break;
          case 4: nnodes = 4; break;
          default:
            throw std::runtime_error("msh import: unsupported element type " +
                                     std::to_string(el.type) + " (only lines, triangles, tetrahedra)");
        }
        for (int k = 0; k < nnodes; ++k) {
          long nid = 0;
          ls >> nid;
          if (!ls) throw std::runtime_error("msh import: malformed element line");
          const auto it = node_ids.find(nid);
          if (it == node_ids.end())
            throw std::runtime_error("msh import: element references unknown node");
          el.nodes[static_cast<std::size_t>(k)] = it->second;
        }
        if (el.type != 15) elements.push_back(el);
      }
      if (next_content_line(in) != "$EndElements")
        throw std::runtime_error("msh import: malformed $Elements section");
    }
    // other sections are skipped
  }

  bool saw_tet = false;
  for (const auto& el : elements) saw_tet |= el.type == 4;
  mesh.dim = saw_tet ? 3 : 2;

  auto boundary_tag = [&](int phys) {
    const auto it = phys_names.find(phys);
    if (it == phys_names.end())
      throw std::runtime_error("msh import: boundary element without a named physical group");
    const std::string& name = it->second;
    if (name == "wall") return kWallTag;
    if (name.rfind("cut_", 0) == 0) {
      const int k = std::stoi(name.substr(4));
      if (k < 1) throw std::runtime_error("msh import: cut indices start at 1");
      return k;
    }
    throw std::runtime_error("msh import: unknown physical group '" + name +
                             "' (expected 'wall' or 'cut_<i>')");
  };

  int max_cut = 0;
  for (const auto& el : elements) {
    const bool is_cell = (mesh.dim == 2 && el.type == 2) || (mesh.dim == 3 && el.type == 4);
    const bool is_facet = (mesh.dim == 2 && el.type == 1) || (mesh.dim == 3 && el.type == 2);
    if (is_cell) {
      mesh.cells.push_back({el.nodes[0], el.nodes[1], el.nodes[2], mesh.dim == 3 ? el.nodes[3] : -1});
    } else if (is_facet) {
      BoundaryFacet f;
      f.v = {el.nodes[0], el.nodes[1], mesh.dim == 3 ? el.nodes[2] : -1};
      f.tag = boundary_tag(el.phys);
      max_cut = std::max(max_cut, f.tag);
      mesh.boundary.push_back(f);
    } else {
      throw std::runtime_error("msh import: element type " + std::to_string(el.type) +
                               " does not fit a " + std::to_string(mesh.dim) + "D mesh");
    }
  }

  if (mesh.vertices.empty() || mesh.cells.empty())
    throw std::runtime_error("msh import: no nodes or no volume elements found");

  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    if (mesh.cell_volume(static_cast<int>(c)) < 0.0) std::swap(mesh.cells[c][1], mesh.cells[c][2]);

  finalize_boundary(mesh);  // fills parents, normals, measures; checks coverage
  fit_cut_planes(mesh, max_cut);
  return mesh;
}

void write_msh(const PipeMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("msh write: cannot open '" + path + "'");
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";

  out << "$PhysicalNames\n" << (1 + mesh.n_cuts()) << "\n";
  const int bdim = mesh.dim - 1;
  out << bdim << " 1 \"wall\"\n";
  for (int i = 1; i <= mesh.n_cuts(); ++i) out << bdim << " " << (1 + i) << " \"cut_" << i << "\"\n";
  out << "$EndPhysicalNames\n";

  out << "$Nodes\n" << mesh.vertices.size() << "\n";
  char buf[160];
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g\n", i + 1, v.x, v.y, v.z);
    out << buf;
  }
  out << "$EndNodes\n";

  out << "$Elements\n" << (mesh.boundary.size() + mesh.cells.size()) << "\n";
  long id = 1;
  const int facet_type = mesh.dim == 2 ? 1 : 2;
  for (const auto& f : mesh.boundary) {
    const int phys = f.tag == kWallTag ? 1 : 1 + f.tag;
    out << id++ << " " << facet_type << " 2 " << phys << " " << phys;
    for (int k = 0; k < mesh.dim; ++k) out << " " << f.v[static_cast<std::size_t>(k)] + 1;
    out << "\n";
  }
  const int cell_type = mesh.dim == 2 ? 2 : 4;
  for (const auto& c : mesh.cells) {
    out << id++ << " " << cell_type << " 2 0 0";
    for (int k = 0; k < mesh.dim + 1; ++k) out << " " << c[static_cast<std::size_t>(k)] + 1;
    out << "\n";
  }
  out << "$EndElements\n";
  if (!out) throw std::runtime_error("msh write: I/O failure on '" + path + "'");
}

}  // namespace pipeflow

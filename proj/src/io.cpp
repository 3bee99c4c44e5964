#include "sonoshape/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sonoshape/errors.hpp"

namespace sonoshape {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_mesh_text(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "acoustic-mesh v1\n";
  out << mesh.vertex_count() << "\n"
      << mesh.triangle_count() << "\n"
      << mesh.boundary_edge_count() << "\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x) << " " << format_double(v.y) << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges)
    out << e.a << " " << e.b << " " << e.tri << "\n";
  out << "bbox " << format_double(mesh.hold_all.lo.x) << " "
      << format_double(mesh.hold_all.lo.y) << " " << format_double(mesh.hold_all.hi.x)
      << " " << format_double(mesh.hold_all.hi.y) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

Mesh read_mesh_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (header != "acoustic-mesh v1") throw IoError("unrecognized mesh header in " + path);
  int nv = 0, nt = 0, ne = 0;
  in >> nv >> nt >> ne;
  if (!in || nv <= 0 || nt <= 0 || ne <= 0) throw IoError("bad mesh counts in " + path);
  Mesh mesh;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) in >> v.x >> v.y;
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) in >> t[0] >> t[1] >> t[2];
  mesh.boundary_edges.resize(ne);
  for (auto& e : mesh.boundary_edges) in >> e.a >> e.b >> e.tri;
  if (!in) throw IoError("truncated mesh file " + path);
  std::string tag;
  if (in >> tag && tag == "bbox") {
    in >> mesh.hold_all.lo.x >> mesh.hold_all.lo.y >> mesh.hold_all.hi.x >>
        mesh.hold_all.hi.y;
    if (!in) throw IoError("bad bbox entity in " + path);
  } else {
    // infer a hold-all box when the optional entity is absent
    Vec2 lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices) {
      lo.x = std::min(lo.x, v.x);
      lo.y = std::min(lo.y, v.y);
      hi.x = std::max(hi.x, v.x);
      hi.y = std::max(hi.y, v.y);
    }
    const double m = 0.5 * std::max(hi.x - lo.x, hi.y - lo.y);
    mesh.hold_all = BBox{{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}};
  }
  // rebuild the loop structure and derived sets
  std::vector<int> starts;
  std::map<int, int> edge_of;  // start vertex -> index
  for (int e = 0; e < ne; ++e) edge_of[mesh.boundary_edges[e].a] = e;
  std::vector<Mesh::BoundaryEdge> ordered;
  std::vector<char> used(ne, 0);
  std::set<int> bverts;
  for (const auto& e : mesh.boundary_edges) bverts.insert(e.a);
  mesh.boundary_vertices.assign(bverts.begin(), bverts.end());
  for (int e = 0; e < ne; ++e) {
    if (used[e]) continue;
    starts.push_back(static_cast<int>(ordered.size()));
    int cur = e;
    do {
      used[cur] = 1;
      ordered.push_back(mesh.boundary_edges[cur]);
      auto it = edge_of.find(mesh.boundary_edges[cur].b);
      if (it == edge_of.end()) throw IoError("boundary loop does not close in " + path);
      cur = it->second;
    } while (cur != e);
  }
  mesh.boundary_edges = std::move(ordered);
  mesh.loop_starts = std::move(starts);
  mesh.validate();
  return mesh;
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::map<std::string, std::vector<double>>& point_scalars,
               const std::map<std::string, std::vector<Vec2>>& point_vectors) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# vtk DataFile Version 3.0\n";
  out << "sonoshape snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x) << " " << format_double(v.y) << " 0\n";
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
  if (!point_scalars.empty() || !point_vectors.empty()) {
    out << "POINT_DATA " << mesh.vertex_count() << "\n";
    for (const auto& [name, values] : point_scalars) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double x : values) out << format_double(x) << "\n";
    }
    for (const auto& [name, values] : point_vectors) {
      out << "VECTORS " << name << " double\n";
      for (const auto& v : values)
        out << format_double(v.x) << " " << format_double(v.y) << " 0\n";
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace sonoshape

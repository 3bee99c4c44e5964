#include "sonoshape/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include "sonoshape/errors.hpp"

namespace sonoshape {

namespace {

constexpr double kCornerTurnThreshold = std::numbers::pi / 6.0;

BBox inflate_bbox(const std::vector<Vec2>& pts, double rel_margin) {
  Vec2 lo{pts[0]}, hi{pts[0]};
  for (const auto& p : pts) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const double diam = std::max(hi.x - lo.x, hi.y - lo.y);
  const double m = std::max(rel_margin * diam, 1e-6 * diam);
  return BBox{{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}};
}

// Recovers the boundary as directed edges used by exactly one triangle and
// chains them into loops. CCW triangles leave the interior on the left, so
// the recovered loops are CCW around the domain.
void extract_boundary(Mesh& mesh) {
  std::map<std::pair<int, int>, int> directed;  // (a,b) -> triangle
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      if (!directed.emplace(std::make_pair(a, b), t).second)
        throw MeshError("duplicate directed edge; inconsistent orientation");
    }
  }
  std::map<int, Mesh::BoundaryEdge> outgoing;  // start vertex -> edge
  for (const auto& [key, t] : directed) {
    if (directed.count({key.second, key.first}) == 0) {
      Mesh::BoundaryEdge be{key.first, key.second, t};
      if (!outgoing.emplace(key.first, be).second)
        throw MeshError("boundary is not a disjoint union of simple loops");
    }
  }
  mesh.boundary_edges.clear();
  mesh.loop_starts.clear();
  std::set<int> seen;
  while (seen.size() < outgoing.size()) {
    int start = -1;
    for (const auto& [v, be] : outgoing) {
      if (!seen.count(v)) {
        start = v;
        break;
      }
    }
    mesh.loop_starts.push_back(static_cast<int>(mesh.boundary_edges.size()));
    int v = start;
    do {
      const auto& be = outgoing.at(v);
      mesh.boundary_edges.push_back(be);
      seen.insert(v);
      v = be.b;
    } while (v != start);
  }
  std::set<int> bverts;
  for (const auto& be : mesh.boundary_edges) bverts.insert(be.a);
  mesh.boundary_vertices.assign(bverts.begin(), bverts.end());
}

Mesh build_unit_square(int n, double margin) {
  Mesh mesh;
  const int stride = n + 1;
  mesh.vertices.reserve(stride * stride);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back({double(i) / n, double(j) / n});
  auto id = [stride](int i, int j) { return j * stride + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  extract_boundary(mesh);
  mesh.hold_all = inflate_bbox(mesh.vertices, margin);
  return mesh;
}

// Hexagonal-ring disk mesh: ring j carries 6j vertices, which keeps the
// triangles close to equilateral all the way to the center. Boundary
// vertices sit exactly on the circle of radius R.
Mesh build_disk(double R, int n, double margin) {
  Mesh mesh;
  mesh.vertices.push_back({0.0, 0.0});
  std::vector<int> ring_start(n + 1, 0);
  for (int j = 1; j <= n; ++j) {
    ring_start[j] = static_cast<int>(mesh.vertices.size());
    const int m = 6 * j;
    const double r = R * j / n;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * std::numbers::pi * k / m;
      mesh.vertices.push_back({r * std::cos(th), r * std::sin(th)});
    }
  }
  auto ring_id = [&](int j, int k) { return ring_start[j] + ((k % (6 * j)) + 6 * j) % (6 * j); };
  // center fan
  for (int k = 0; k < 6; ++k)
    mesh.triangles.push_back({0, ring_id(1, k), ring_id(1, k + 1)});
  // bands between ring j and j+1, sector by sector
  for (int j = 1; j < n; ++j) {
    for (int s = 0; s < 6; ++s) {
      for (int t = 0; t <= j; ++t) {
        mesh.triangles.push_back(
            {ring_id(j + 1, s * (j + 1) + t), ring_id(j + 1, s * (j + 1) + t + 1),
             ring_id(j, s * j + t)});
      }
      for (int t = 0; t < j; ++t) {
        mesh.triangles.push_back({ring_id(j, s * j + t), ring_id(j + 1, s * (j + 1) + t + 1),
                                  ring_id(j, s * j + t + 1)});
      }
    }
  }
  extract_boundary(mesh);
  mesh.hold_all = inflate_bbox(mesh.vertices, margin);
  return mesh;
}

Mesh build_annular_sector(const MeshSpec& spec, double margin) {
  const int nr = spec.resolution;
  const double dr = (spec.r_outer - spec.r_inner) / nr;
  const double span = spec.angle1 - spec.angle0;
  const double rm = 0.5 * (spec.r_inner + spec.r_outer);
  const int na = std::max(2, static_cast<int>(std::lround(rm * span / dr)));
  Mesh mesh;
  const int stride = nr + 1;
  for (int j = 0; j <= na; ++j) {
    const double th = spec.angle0 + span * j / na;
    for (int i = 0; i <= nr; ++i) {
      const double r = spec.r_inner + dr * i;
      mesh.vertices.push_back({r * std::cos(th), r * std::sin(th)});
    }
  }
  auto id = [stride](int i, int j) { return j * stride + i; };
  for (int j = 0; j < na; ++j) {
    for (int i = 0; i < nr; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  extract_boundary(mesh);
  mesh.hold_all = inflate_bbox(mesh.vertices, margin);
  return mesh;
}

}  // namespace

double Mesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  return 0.5 * cross(vertices[tr[1]] - vertices[tr[0]], vertices[tr[2]] - vertices[tr[0]]);
}

Vec2 Mesh::triangle_centroid(int t) const {
  const auto& tr = triangles[t];
  return (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]) * (1.0 / 3.0);
}

double Mesh::min_angle_deg() const {
  double worst = 180.0;
  for (const auto& tr : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = vertices[tr[(k + 1) % 3]] - vertices[tr[k]];
      const Vec2 v = vertices[tr[(k + 2) % 3]] - vertices[tr[k]];
      const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v));
      worst = std::min(worst, ang * 180.0 / std::numbers::pi);
    }
  }
  return worst;
}

double Mesh::boundary_perimeter() const {
  double s = 0.0;
  for (const auto& be : boundary_edges) s += (vertices[be.b] - vertices[be.a]).norm();
  return s;
}

bool Mesh::is_boundary_vertex(int v) const {
  return std::binary_search(boundary_vertices.begin(), boundary_vertices.end(), v);
}

void Mesh::validate() const {
  for (int t = 0; t < triangle_count(); ++t) {
    if (!(triangle_area(t) > 0.0))
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
  }
  for (const auto& v : vertices) {
    if (!hold_all.strictly_contains(v))
      throw MeshError("vertex not strictly inside the hold-all box");
  }
  // stored boundary must coincide with the one recovered from the triangles
  std::set<std::pair<int, int>> recovered;
  {
    std::set<std::pair<int, int>> directed;
    for (const auto& tr : triangles)
      for (int e = 0; e < 3; ++e) directed.insert({tr[e], tr[(e + 1) % 3]});
    for (const auto& de : directed)
      if (!directed.count({de.second, de.first})) recovered.insert(de);
  }
  if (recovered.size() != boundary_edges.size())
    throw MeshError("stored boundary edge count disagrees with triangulation");
  std::map<int, int> out_deg;
  for (const auto& be : boundary_edges) {
    if (!recovered.count({be.a, be.b}))
      throw MeshError("stored boundary edge is not a free triangle edge");
    const auto& tr = triangles[be.tri];
    bool found = false;
    for (int e = 0; e < 3; ++e)
      found = found || (tr[e] == be.a && tr[(e + 1) % 3] == be.b);
    if (!found) throw MeshError("boundary edge parent triangle mismatch");
    out_deg[be.a] += 1;
  }
  for (const auto& [v, d] : out_deg)
    if (d != 1) throw MeshError("boundary loops self-intersect at vertex " + std::to_string(v));
  // loops must close
  for (size_t li = 0; li < loop_starts.size(); ++li) {
    const int begin = loop_starts[li];
    const int end = (li + 1 < loop_starts.size()) ? loop_starts[li + 1]
                                                  : static_cast<int>(boundary_edges.size());
    for (int e = begin; e < end; ++e) {
      const int next = (e + 1 < end) ? e + 1 : begin;
      if (boundary_edges[e].b != boundary_edges[next].a)
        throw MeshError("boundary loop is not contiguous");
    }
  }
}

Mesh build_structured_mesh(const MeshSpec& spec) {
  if (spec.resolution < 2) throw MeshError("resolution too small (need >= 2)");
  Mesh mesh;
  switch (spec.shape) {
    case MeshShape::UnitSquare:
      mesh = build_unit_square(spec.resolution, spec.hold_all_margin);
      break;
    case MeshShape::Disk:
      if (!(spec.radius > 0.0)) throw MeshError("disk radius must be positive");
      mesh = build_disk(spec.radius, spec.resolution, spec.hold_all_margin);
      break;
    case MeshShape::AnnularSector:
      if (!(spec.r_outer > spec.r_inner && spec.r_inner > 0.0))
        throw MeshError("annular sector radii must satisfy 0 < r_inner < r_outer");
      if (!(spec.angle1 > spec.angle0)) throw MeshError("annular sector needs angle1 > angle0");
      mesh = build_annular_sector(spec, spec.hold_all_margin);
      break;
    default:
      throw MeshError("unsupported mesh shape");
  }
  mesh.validate();
  return mesh;
}

Mesh build_structured_mesh(MeshShape shape, int resolution) {
  MeshSpec spec;
  spec.shape = shape;
  spec.resolution = resolution;
  return build_structured_mesh(spec);
}

int BoundaryGeometry::local_index(int mesh_vertex) const {
  if (mesh_vertex < 0 || mesh_vertex >= static_cast<int>(vertex_to_local_.size())) return -1;
  return vertex_to_local_[mesh_vertex];
}

BoundaryGeometry compute_boundary_geometry(const Mesh& mesh) {
  BoundaryGeometry bg;
  bg.vertex_to_local_.assign(mesh.vertex_count(), -1);
  const auto& edges = mesh.boundary_edges;
  for (size_t li = 0; li < mesh.loop_starts.size(); ++li) {
    const int begin = mesh.loop_starts[li];
    const int end = (li + 1 < mesh.loop_starts.size()) ? mesh.loop_starts[li + 1]
                                                       : static_cast<int>(edges.size());
    for (int e = begin; e < end; ++e) {
      const int prev = (e == begin) ? end - 1 : e - 1;
      const int v = edges[e].a;
      const Vec2 d_in = mesh.vertices[edges[prev].b] - mesh.vertices[edges[prev].a];
      const Vec2 d_out = mesh.vertices[edges[e].b] - mesh.vertices[edges[e].a];
      const double len_in = d_in.norm();
      const double len_out = d_out.norm();
      if (!(len_in > 0.0) || !(len_out > 0.0))
        throw MeshError("degenerate boundary edge at vertex " + std::to_string(v));
      const Vec2 t_in = d_in * (1.0 / len_in);
      const Vec2 t_out = d_out * (1.0 / len_out);
      // outward = right of the CCW tangent
      Vec2 nrm{t_in.y + t_out.y, -(t_in.x + t_out.x)};
      const double nn = nrm.norm();
      if (!(nn > 0.0)) throw MeshError("undefined normal (cusp) at vertex " + std::to_string(v));
      nrm *= 1.0 / nn;
      const double turn = std::atan2(cross(t_in, t_out), dot(t_in, t_out));
      const double avg_len = 0.5 * (len_in + len_out);

      bg.vertex_to_local_[v] = static_cast<int>(bg.vertex.size());
      bg.vertex.push_back(v);
      bg.normal.push_back(nrm);
      bg.curvature.push_back(turn / avg_len);
      bg.arc_weight.push_back(avg_len);
      bg.corner.push_back(std::abs(turn) > kCornerTurnThreshold ? 1 : 0);

      if (dot(nrm, mesh.vertices[v] - mesh.triangle_centroid(edges[e].tri)) <= 0.0)
        throw MeshError("boundary normal does not point outward at vertex " + std::to_string(v));
    }
  }
  return bg;
}

DeformationField DeformationField::zero(const Mesh& mesh) {
  DeformationField f;
  f.values.assign(mesh.vertices.size(), Vec2{});
  f.recipe = [](const Vec2&) { return Vec2{}; };
  f.recipe_grad = [](const Vec2&) { return Mat2::zero(); };
  return f;
}

DeformationField DeformationField::combine(double alpha, const DeformationField& h1,
                                           double beta, const DeformationField& h2) {
  DeformationField f;
  f.values.resize(h1.values.size());
  for (size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = alpha * h1.values[i] + beta * h2.values[i];
  if (h1.has_recipe() && h2.has_recipe()) {
    auto r1 = h1.recipe, r2 = h2.recipe;
    auto g1 = h1.recipe_grad, g2 = h2.recipe_grad;
    f.recipe = [=](const Vec2& x) { return alpha * r1(x) + beta * r2(x); };
    f.recipe_grad = [=](const Vec2& x) { return alpha * g1(x) + beta * g2(x); };
  }
  return f;
}

DeformationField make_bump_field(const Vec2& center, double radius, const Vec2& amplitude,
                                 const Mesh& mesh) {
  if (!(radius > 0.0)) throw DeformationError("bump radius must be positive");
  if (!mesh.hold_all.contains_ball(center, radius))
    throw DeformationError("bump support intersects the hold-all boundary");
  const double r2inv = 1.0 / (radius * radius);
  auto profile = [=](const Vec2& x) {
    const double u = (x - center).norm2() * r2inv;
    if (u >= 1.0) return 0.0;
    const double w = 1.0 - u;
    return w * w * w;
  };
  DeformationField f;
  f.recipe = [=](const Vec2& x) { return amplitude * profile(x); };
  f.recipe_grad = [=](const Vec2& x) {
    const double u = (x - center).norm2() * r2inv;
    if (u >= 1.0) return Mat2::zero();
    const double w = 1.0 - u;
    // d/dx_j of the profile is -6 (1-u)^2 (x_j - c_j) / radius^2
    return Mat2::outer(amplitude, (x - center) * (-6.0 * w * w * r2inv));
  };
  f.values.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.vertex_count(); ++v) f.values[v] = f.recipe(mesh.vertices[v]);
  return f;
}

}  // namespace sonoshape

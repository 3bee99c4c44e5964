#pragma once

#include <array>
#include <functional>
#include <vector>

#include "sonoshape/linalg.hpp"

namespace sonoshape {

// Axis-aligned hold-all box U with closure(domain) in its interior.
struct BBox {
  Vec2 lo;
  Vec2 hi;

  bool strictly_contains(const Vec2& p, double margin = 0.0) const {
    return p.x > lo.x + margin && p.x < hi.x - margin && p.y > lo.y + margin &&
           p.y < hi.y - margin;
  }
  bool contains_ball(const Vec2& c, double r) const {
    return strictly_contains(c, r);
  }
};

// Conforming triangulation of the reference domain with an explicit,
// loop-ordered boundary-edge list.
struct Mesh {
  struct BoundaryEdge {
    int a = -1;    // start vertex
    int b = -1;    // end vertex (next edge starts here)
    int tri = -1;  // parent triangle
  };

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW orientation
  std::vector<BoundaryEdge> boundary_edges;   // ordered CCW loops
  std::vector<int> boundary_vertices;         // sorted, unique
  std::vector<int> loop_starts;               // index into boundary_edges per loop
  BBox hold_all;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  int boundary_edge_count() const { return static_cast<int>(boundary_edges.size()); }

  double triangle_area(int t) const;
  Vec2 triangle_centroid(int t) const;
  double min_angle_deg() const;
  double boundary_perimeter() const;
  bool is_boundary_vertex(int v) const;

  // Checks all structural invariants; throws MeshError on violation.
  void validate() const;
};

enum class MeshShape { UnitSquare, Disk, AnnularSector };

struct MeshSpec {
  MeshShape shape = MeshShape::UnitSquare;
  int resolution = 2;
  double radius = 1.0;  // disk
  // annular sector
  double r_inner = 0.5;
  double r_outer = 1.0;
  double angle0 = -0.5235987755982988;  // -pi/6
  double angle1 = 0.5235987755982988;   // +pi/6
  // hold-all inflation relative to the domain diameter
  double hold_all_margin = 0.5;
};

Mesh build_structured_mesh(const MeshSpec& spec);
Mesh build_structured_mesh(MeshShape shape, int resolution);

// Per-boundary-vertex normals, lumped arc measure and turning-angle curvature.
// Vertex order follows the boundary loops.
struct BoundaryGeometry {
  std::vector<int> vertex;        // mesh vertex ids, loop order
  std::vector<Vec2> normal;       // unit outward
  std::vector<double> curvature;  // 1/length, signed (convex positive)
  std::vector<double> arc_weight; // lumped arc length
  std::vector<char> corner;       // flagged corners of polygonal domains

  int local_index(int mesh_vertex) const;  // -1 when not a boundary vertex

 private:
  friend BoundaryGeometry compute_boundary_geometry(const Mesh&);
  std::vector<int> vertex_to_local_;
};

BoundaryGeometry compute_boundary_geometry(const Mesh& mesh);

// Vector field on the hold-all domain, sampled at mesh vertices. When the
// field comes from an analytic recipe the exact Jacobian is kept alongside
// the nodal samples; transform quantities then use it instead of the
// piecewise-constant P1 gradient.
struct DeformationField {
  std::vector<Vec2> values;                   // per mesh vertex
  std::function<Vec2(const Vec2&)> recipe;    // optional analytic field
  std::function<Mat2(const Vec2&)> recipe_grad;  // d h_i / d x_j

  bool has_recipe() const { return static_cast<bool>(recipe_grad); }

  static DeformationField zero(const Mesh& mesh);
  static DeformationField combine(double alpha, const DeformationField& h1,
                                  double beta, const DeformationField& h2);
};

// C^2 radial bump  amplitude * (1 - (r/radius)^2)^3  supported in the ball
// around center; the ball must stay inside the hold-all box.
DeformationField make_bump_field(const Vec2& center, double radius,
                                 const Vec2& amplitude, const Mesh& mesh);

}  // namespace sonoshape

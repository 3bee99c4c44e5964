#include "sonoshape/transform.hpp"

#include <cmath>
#include <string>

#include "sonoshape/errors.hpp"

namespace sonoshape {

PointTransform transform_from_grad(const Mat2& grad_h, double d) {
  PointTransform pt;
  pt.jacobian = Mat2::identity() + d * grad_h;
  pt.det = pt.jacobian.det();
  if (!(pt.det > 0.0))
    throw DeformationError("deformation too large: Jacobian determinant " +
                           std::to_string(pt.det));
  pt.inv_jac_t = pt.jacobian.inverse().transposed();
  pt.metric = pt.det * (pt.inv_jac_t.transposed() * pt.inv_jac_t);
  return pt;
}

double boundary_weight(const PointTransform& pt, const Vec2& unit_normal) {
  return pt.det * (pt.inv_jac_t * unit_normal).norm();
}

GradientProvider::GradientProvider(const DeformationField& h, const Mesh* mesh,
                                   GradSource source)
    : h_(h), mesh_(mesh) {
  switch (source) {
    case GradSource::Recipe:
      if (!h.has_recipe()) throw DeformationError("field has no analytic recipe");
      use_recipe_ = true;
      break;
    case GradSource::ElementP1:
      if (!mesh) throw DeformationError("P1 gradient requested without a mesh");
      use_recipe_ = false;
      break;
    case GradSource::Auto:
    default:
      use_recipe_ = h.has_recipe();
      if (!use_recipe_ && !mesh)
        throw DeformationError("field has no analytic recipe and no mesh was given");
      break;
  }
}

int GradientProvider::find_triangle(const Vec2& x) const {
  const auto& mesh = *mesh_;
  const int n = mesh.triangle_count();
  const double tol = -1e-12;
  for (int off = 0; off < n; ++off) {
    const int t = (hint_ + off) % n;
    const auto& tr = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double area2 = cross(b - a, c - a);
    const double u = cross(b - x, c - x) / area2;
    const double v = cross(c - x, a - x) / area2;
    const double w = 1.0 - u - v;
    if (u >= tol && v >= tol && w >= tol) {
      hint_ = t;
      return t;
    }
  }
  throw DeformationError("evaluation point lies outside the mesh");
}

Mat2 GradientProvider::p1_grad(int tri) const {
  const auto& mesh = *mesh_;
  const auto& tr = mesh.triangles[tri];
  const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
  const double area2 = cross(b - a, c - a);
  // gradients of the P1 basis functions
  const Vec2 g0 = perp(c - b) * (1.0 / area2);
  const Vec2 g1 = perp(a - c) * (1.0 / area2);
  const Vec2 g2 = perp(b - a) * (1.0 / area2);
  const Vec2 h0 = h_.values[tr[0]], h1 = h_.values[tr[1]], h2 = h_.values[tr[2]];
  return Mat2::outer(h0, g0) + Mat2::outer(h1, g1) + Mat2::outer(h2, g2);
}

Vec2 GradientProvider::p1_value(int tri, const Vec2& x) const {
  const auto& mesh = *mesh_;
  const auto& tr = mesh.triangles[tri];
  const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
  const double area2 = cross(b - a, c - a);
  const double u = cross(b - x, c - x) / area2;
  const double v = cross(c - x, a - x) / area2;
  const double w = 1.0 - u - v;
  return u * h_.values[tr[0]] + v * h_.values[tr[1]] + w * h_.values[tr[2]];
}

Mat2 GradientProvider::at_point(const Vec2& x) const {
  if (use_recipe_) return h_.recipe_grad(x);
  return p1_grad(find_triangle(x));
}

Mat2 GradientProvider::on_element(int tri, const Vec2& x) const {
  if (use_recipe_) return h_.recipe_grad(x);
  return p1_grad(tri);
}

Vec2 GradientProvider::value_at_point(const Vec2& x) const {
  if (h_.recipe) return h_.recipe(x);
  return p1_value(find_triangle(x), x);
}

Vec2 GradientProvider::value_on_element(int tri, const Vec2& x) const {
  if (h_.recipe) return h_.recipe(x);
  return p1_value(tri, x);
}

TransformCoefficients eval_transform(const DeformationField& h, double d,
                                     std::span<const Vec2> points,
                                     std::span<const Vec2> normals, const Mesh* mesh,
                                     GradSource source) {
  GradientProvider grad(h, mesh, source);
  const bool want_weight = !normals.empty();
  if (want_weight && normals.size() != points.size())
    throw DeformationError("normals must be given for every point (or none)");
  TransformCoefficients tc;
  tc.d = d;
  const size_t n = points.size();
  tc.mapped.reserve(n);
  tc.jacobian.reserve(n);
  tc.det.reserve(n);
  tc.inv_jac_t.reserve(n);
  tc.metric.reserve(n);
  if (want_weight) tc.weight.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const PointTransform pt = transform_from_grad(grad.at_point(points[i]), d);
    tc.mapped.push_back(points[i] + d * grad.value_at_point(points[i]));
    tc.jacobian.push_back(pt.jacobian);
    tc.det.push_back(pt.det);
    tc.inv_jac_t.push_back(pt.inv_jac_t);
    tc.metric.push_back(pt.metric);
    if (want_weight) tc.weight.push_back(boundary_weight(pt, normals[i]));
  }
  return tc;
}

std::vector<Mat2> eval_metric_derivative(const DeformationField& h,
                                         std::span<const Vec2> points, const Mesh* mesh,
                                         GradSource source) {
  GradientProvider grad(h, mesh, source);
  std::vector<Mat2> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    const Mat2 g = grad.at_point(x);
    out.push_back(g.trace() * Mat2::identity() - g - g.transposed());
  }
  return out;
}

TransformDerivatives transform_derivatives_at_zero(const DeformationField& h,
                                                   std::span<const Vec2> points,
                                                   std::span<const Vec2> normals,
                                                   const Mesh* mesh, GradSource source) {
  GradientProvider grad(h, mesh, source);
  const bool want_weight = !normals.empty();
  if (want_weight && normals.size() != points.size())
    throw DeformationError("normals must be given for every point (or none)");
  TransformDerivatives out;
  for (size_t i = 0; i < points.size(); ++i) {
    const Mat2 g = grad.at_point(points[i]);
    out.det_rate.push_back(g.trace());
    out.inv_jac_t_rate.push_back(-1.0 * g);
    if (want_weight) {
      const Vec2 n = normals[i];
      out.weight_rate.push_back(g.trace() - dot(n, g * n));
    }
  }
  return out;
}

Mesh push_forward_mesh(const Mesh& mesh, const DeformationField& h, double d) {
  Mesh out = mesh;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    out.vertices[v] = mesh.vertices[v] + d * h.values[v];
  for (int t = 0; t < out.triangle_count(); ++t) {
    if (!(out.triangle_area(t) > 0.0))
      throw DeformationError("deformation inverts triangle " + std::to_string(t));
  }
  return out;
}

PushedForwardField push_forward_compose(std::span<const double> field_on_reference,
                                        const DeformationField& h, double d,
                                        const Mesh& mesh) {
  PushedForwardField out{push_forward_mesh(mesh, h, d),
                         {field_on_reference.begin(), field_on_reference.end()}};
  return out;
}

}  // namespace sonoshape

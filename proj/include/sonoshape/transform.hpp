#pragma once

#include <span>
#include <vector>

#include "sonoshape/geometry.hpp"
#include "sonoshape/linalg.hpp"

namespace sonoshape {

// Pointwise quantities of the perturbed-identity map x -> x + d*h(x):
// the Jacobian determinant, the inverse-transpose Jacobian, the pulled-back
// metric and, on the boundary, the surface-measure weight.
struct PointTransform {
  Mat2 jacobian;   // DF = I + d * Dh
  double det;      // det DF
  Mat2 inv_jac_t;  // (DF)^{-T}
  Mat2 metric;     // det * (DF)^{-1} (DF)^{-T}
};

PointTransform transform_from_grad(const Mat2& grad_h, double d);
double boundary_weight(const PointTransform& pt, const Vec2& unit_normal);

enum class GradSource { Auto, Recipe, ElementP1 };

struct TransformCoefficients {
  double d = 0.0;
  std::vector<Vec2> mapped;      // F_d at each point
  std::vector<Mat2> jacobian;    // DF_d
  std::vector<double> det;       // det DF_d
  std::vector<Mat2> inv_jac_t;   // (DF_d)^{-T}
  std::vector<Mat2> metric;      // det * A^T A
  std::vector<double> weight;    // boundary weight, when normals were given
};

// Evaluates the transform at arbitrary points. The mesh is required for the
// P1 gradient fallback (and for fields without an analytic recipe).
// Throws DeformationError when det <= 0 anywhere.
TransformCoefficients eval_transform(const DeformationField& h, double d,
                                     std::span<const Vec2> points,
                                     std::span<const Vec2> normals = {},
                                     const Mesh* mesh = nullptr,
                                     GradSource source = GradSource::Auto);

// d/dd at d=0 of the metric:  tr(Dh) I - Dh - Dh^T.
std::vector<Mat2> eval_metric_derivative(const DeformationField& h,
                                         std::span<const Vec2> points,
                                         const Mesh* mesh = nullptr,
                                         GradSource source = GradSource::Auto);

struct TransformDerivatives {
  std::vector<double> det_rate;       // div h
  std::vector<double> weight_rate;    // div h - n.(Dh n)  (boundary points)
  std::vector<Mat2> inv_jac_t_rate;   // -Dh
};

TransformDerivatives transform_derivatives_at_zero(const DeformationField& h,
                                                   std::span<const Vec2> points,
                                                   std::span<const Vec2> normals = {},
                                                   const Mesh* mesh = nullptr,
                                                   GradSource source = GradSource::Auto);

// Moves every vertex by d*h and checks no triangle inverts.
Mesh push_forward_mesh(const Mesh& mesh, const DeformationField& h, double d);

struct PushedForwardField {
  Mesh mesh;
  std::vector<double> field;  // nodal values carried along unchanged
};

PushedForwardField push_forward_compose(std::span<const double> field_on_reference,
                                        const DeformationField& h, double d,
                                        const Mesh& mesh);

// Gradient provider used by point evaluation and by the assembly-aligned
// transform fields: analytic recipe when available (and requested), or the
// element-wise constant P1 gradient otherwise.
class GradientProvider {
 public:
  GradientProvider(const DeformationField& h, const Mesh* mesh, GradSource source);

  bool uses_recipe() const { return use_recipe_; }
  Mat2 at_point(const Vec2& x) const;        // locates the triangle if needed
  Mat2 on_element(int tri, const Vec2& x) const;
  Vec2 value_at_point(const Vec2& x) const;
  Vec2 value_on_element(int tri, const Vec2& x) const;

 private:
  const DeformationField& h_;
  const Mesh* mesh_;
  bool use_recipe_;
  int find_triangle(const Vec2& x) const;
  Mat2 p1_grad(int tri) const;
  Vec2 p1_value(int tri, const Vec2& x) const;
  mutable int hint_ = 0;
};

}  // namespace sonoshape

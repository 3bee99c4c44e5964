#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <span>
#include <vector>

#include "sonoshape/geometry.hpp"
#include "sonoshape/transform.hpp"

namespace sonoshape {

// P1 space on a triangle mesh with precomputed quadrature tables.
// Cell rule: 3 edge-midpoints, weight area/3 (degree 2).
// Edge rule: 2-point Gauss (degree 3).
struct FeSpace {
  static constexpr int kCellQ = 3;
  static constexpr int kEdgeQ = 2;

  const Mesh* mesh = nullptr;
  int dofs = 0;

  std::vector<double> area;                       // per triangle
  std::vector<std::array<Vec2, 3>> basis_grad;    // per triangle, per local node
  std::vector<Vec2> cell_qp;                      // [t*kCellQ + q]
  std::vector<double> edge_len;                   // per boundary edge
  std::vector<Vec2> edge_normal;                  // unit outward, per boundary edge
  std::vector<Vec2> edge_qp;                      // [e*kEdgeQ + q]
  std::vector<std::array<double, 2>> edge_qbasis; // basis (a,b) values per edge qpoint
  std::vector<std::vector<int>> vertex_tris;      // triangles around each vertex
  std::vector<std::vector<int>> vertex_neighbors; // one-ring vertices

  int n_cells() const { return static_cast<int>(area.size()); }
  int n_bedges() const { return static_cast<int>(edge_len.size()); }
  double cell_qweight(int t) const { return area[t] / kCellQ; }
  double edge_qweight(int e) const { return 0.5 * edge_len[e]; }
  // basis values at the cell quadrature points (midpoints)
  static double cell_qbasis(int q, int local) { return q == local ? 0.0 : 0.5; }

  // P1 interpolation / gradients of nodal fields
  double value_at(int t, int q, std::span<const double> nodal) const;
  Vec2 element_gradient(int t, std::span<const double> nodal) const;
  double edge_value_at(int e, int q, std::span<const double> nodal) const;
  // area-weighted average of adjacent element gradients
  Vec2 vertex_gradient(int v, std::span<const double> nodal) const;
};

FeSpace make_space(const Mesh& mesh);

class SparseOperator {
 public:
  SparseOperator() = default;
  static SparseOperator from_triplets(int dim, const std::vector<Eigen::Triplet<double>>& t);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const { return m_; }
  Eigen::SparseMatrix<double>& matrix() { return m_; }

  std::vector<double> apply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x, std::span<const double> y) const;
  SparseOperator transposed() const;
  SparseOperator scaled(double a) const;
  SparseOperator plus(const SparseOperator& other, double a = 1.0) const;
  double symmetry_error() const;
  double total_sum() const;
  double max_abs() const;
  std::vector<double> row_sums() const;

 private:
  Eigen::SparseMatrix<double> m_;
};

class LinearSolver {
 public:
  LinearSolver();
  void factorize(const SparseOperator& op);
  bool factorized() const { return ok_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  bool ok_ = false;
};

// Transform quantities evaluated at the quadrature points of a space,
// ready for the transformed assembly paths.
struct TransformFields {
  double d = 0.0;
  std::vector<double> cell_det;    // [t*kCellQ+q]
  std::vector<Mat2> cell_metric;
  std::vector<Vec2> cell_mapped;   // F_d at cell qpoints
  std::vector<double> edge_weight; // [e*kEdgeQ+q]
  std::vector<Vec2> edge_mapped;   // F_d at edge qpoints
};

TransformFields build_transform_fields(const FeSpace& space, const DeformationField& h,
                                       double d, GradSource source = GradSource::Auto);
TransformFields identity_transform_fields(const FeSpace& space);

// ---- assembly ----------------------------------------------------------

// entries  int coeff phi_i phi_j dx, coefficient interpolated from nodes
SparseOperator assemble_weighted_mass(const FeSpace& space, std::span<const double> nodal_coeff);
// same with the coefficient given per cell quadrature point
SparseOperator assemble_weighted_mass_q(const FeSpace& space, std::span<const double> q_coeff);

// entries  int (Mfield grad phi_j) . grad phi_i dx, Mfield per quadrature point
SparseOperator assemble_matrix_stiffness(const FeSpace& space, std::span<const Mat2> q_metric);
SparseOperator assemble_matrix_stiffness(const FeSpace& space);  // Mfield = I

// entries  int (Mfield grad phi_j . gradpsi) phi_i dx  (non-symmetric)
SparseOperator assemble_convective(const FeSpace& space, std::span<const Vec2> q_gradpsi,
                                   std::span<const Mat2> q_metric = {});

// entries  int_boundary wfield * data * phi_i dgamma
std::vector<double> assemble_boundary_load(const FeSpace& space,
                                           std::span<const double> q_wfield,
                                           std::span<const double> q_data);

// entries  int_boundary coeff phi_i phi_j dgamma
SparseOperator assemble_boundary_mass(const FeSpace& space, std::span<const double> q_coeff);

// ---- helpers ------------------------------------------------------------

std::vector<double> interpolate_cell_q(const FeSpace& space, std::span<const double> nodal);
std::vector<Vec2> gradient_cell_q(const FeSpace& space, std::span<const double> nodal);
std::vector<double> interpolate_edge_q(const FeSpace& space, std::span<const double> nodal);

}  // namespace sonoshape

#include "sonoshape/fem.hpp"

#include <cmath>
#include <string>

#include "sonoshape/errors.hpp"

namespace sonoshape {

double FeSpace::value_at(int t, int q, std::span<const double> nodal) const {
  const auto& tr = mesh->triangles[t];
  double s = 0.0;
  for (int l = 0; l < 3; ++l) s += cell_qbasis(q, l) * nodal[tr[l]];
  return s;
}

Vec2 FeSpace::element_gradient(int t, std::span<const double> nodal) const {
  const auto& tr = mesh->triangles[t];
  Vec2 g{};
  for (int l = 0; l < 3; ++l) g += nodal[tr[l]] * basis_grad[t][l];
  return g;
}

double FeSpace::edge_value_at(int e, int q, std::span<const double> nodal) const {
  const auto& be = mesh->boundary_edges[e];
  const auto& w = edge_qbasis[e * kEdgeQ + q];
  return w[0] * nodal[be.a] + w[1] * nodal[be.b];
}

Vec2 FeSpace::vertex_gradient(int v, std::span<const double> nodal) const {
  Vec2 g{};
  double wsum = 0.0;
  for (int t : vertex_tris[v]) {
    g += area[t] * element_gradient(t, nodal);
    wsum += area[t];
  }
  return g * (1.0 / wsum);
}

FeSpace make_space(const Mesh& mesh) {
  FeSpace s;
  s.mesh = &mesh;
  s.dofs = mesh.vertex_count();
  const int nt = mesh.triangle_count();
  s.area.resize(nt);
  s.basis_grad.resize(nt);
  s.cell_qp.resize(nt * FeSpace::kCellQ);
  for (int t = 0; t < nt; ++t) {
    const auto& tr = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double area2 = cross(b - a, c - a);
    s.area[t] = 0.5 * area2;
    s.basis_grad[t] = {perp(c - b) * (1.0 / area2), perp(a - c) * (1.0 / area2),
                       perp(b - a) * (1.0 / area2)};
    // midpoints of the edges opposite local nodes 0,1,2
    s.cell_qp[t * 3 + 0] = 0.5 * (b + c);
    s.cell_qp[t * 3 + 1] = 0.5 * (a + c);
    s.cell_qp[t * 3 + 2] = 0.5 * (a + b);
  }
  const int ne = mesh.boundary_edge_count();
  s.edge_len.resize(ne);
  s.edge_normal.resize(ne);
  s.edge_qp.resize(ne * FeSpace::kEdgeQ);
  s.edge_qbasis.resize(ne * FeSpace::kEdgeQ);
  const double gauss = 0.5 / std::sqrt(3.0);
  for (int e = 0; e < ne; ++e) {
    const auto& be = mesh.boundary_edges[e];
    const Vec2 a = mesh.vertices[be.a], b = mesh.vertices[be.b];
    const Vec2 d = b - a;
    s.edge_len[e] = d.norm();
    s.edge_normal[e] = Vec2{d.y, -d.x} * (1.0 / s.edge_len[e]);
    const double t0 = 0.5 - gauss, t1 = 0.5 + gauss;
    s.edge_qp[e * 2 + 0] = a + t0 * d;
    s.edge_qp[e * 2 + 1] = a + t1 * d;
    s.edge_qbasis[e * 2 + 0] = {1.0 - t0, t0};
    s.edge_qbasis[e * 2 + 1] = {1.0 - t1, t1};
  }
  s.vertex_tris.resize(s.dofs);
  s.vertex_neighbors.resize(s.dofs);
  for (int t = 0; t < nt; ++t)
    for (int l = 0; l < 3; ++l) s.vertex_tris[mesh.triangles[t][l]].push_back(t);
  {
    std::vector<std::vector<int>>& nb = s.vertex_neighbors;
    for (const auto& tr : mesh.triangles) {
      for (int l = 0; l < 3; ++l) {
        nb[tr[l]].push_back(tr[(l + 1) % 3]);
        nb[tr[l]].push_back(tr[(l + 2) % 3]);
      }
    }
    for (auto& v : nb) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }
  return s;
}

SparseOperator SparseOperator::from_triplets(int dim,
                                             const std::vector<Eigen::Triplet<double>>& t) {
  SparseOperator op;
  op.m_.resize(dim, dim);
  op.m_.setFromTriplets(t.begin(), t.end());
  op.m_.makeCompressed();
  return op;
}

std::vector<double> SparseOperator::apply(std::span<const double> x) const {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  Eigen::VectorXd y = m_ * xv;
  return {y.data(), y.data() + y.size()};
}

double SparseOperator::quadratic_form(std::span<const double> x,
                                      std::span<const double> y) const {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), y.size());
  return xv.dot(m_ * yv);
}

SparseOperator SparseOperator::transposed() const {
  SparseOperator op;
  op.m_ = m_.transpose();
  op.m_.makeCompressed();
  return op;
}

SparseOperator SparseOperator::scaled(double a) const {
  SparseOperator op;
  op.m_ = a * m_;
  return op;
}

SparseOperator SparseOperator::plus(const SparseOperator& other, double a) const {
  SparseOperator op;
  op.m_ = m_ + a * other.m_;
  op.m_.makeCompressed();
  return op;
}

double SparseOperator::symmetry_error() const {
  Eigen::SparseMatrix<double> d = Eigen::SparseMatrix<double>(m_.transpose()) - m_;
  double e = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      e = std::max(e, std::abs(it.value()));
  return e;
}

double SparseOperator::total_sum() const { return m_.sum(); }

double SparseOperator::max_abs() const {
  double e = 0.0;
  for (int k = 0; k < m_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m_, k); it; ++it)
      e = std::max(e, std::abs(it.value()));
  return e;
}

std::vector<double> SparseOperator::row_sums() const {
  std::vector<double> r(m_.rows(), 0.0);
  for (int k = 0; k < m_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m_, k); it; ++it)
      r[it.row()] += it.value();
  return r;
}

LinearSolver::LinearSolver()
    : lu_(std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>()) {}

void LinearSolver::factorize(const SparseOperator& op) {
  lu_->compute(op.matrix());
  ok_ = lu_->info() == Eigen::Success;
  if (!ok_) throw Error("sparse LU factorization failed");
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) const {
  if (!ok_) throw Error("linear solver used before factorization");
  return lu_->solve(rhs);
}

TransformFields build_transform_fields(const FeSpace& space, const DeformationField& h,
                                       double d, GradSource source) {
  GradientProvider grad(h, space.mesh, source);
  TransformFields f;
  f.d = d;
  const int nt = space.n_cells();
  f.cell_det.resize(nt * FeSpace::kCellQ);
  f.cell_metric.resize(nt * FeSpace::kCellQ);
  f.cell_mapped.resize(nt * FeSpace::kCellQ);
  for (int t = 0; t < nt; ++t) {
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const int idx = t * FeSpace::kCellQ + q;
      const Vec2 x = space.cell_qp[idx];
      const PointTransform pt = transform_from_grad(grad.on_element(t, x), d);
      f.cell_det[idx] = pt.det;
      f.cell_metric[idx] = pt.metric;
      f.cell_mapped[idx] = x + d * grad.value_on_element(t, x);
    }
  }
  const int ne = space.n_bedges();
  f.edge_weight.resize(ne * FeSpace::kEdgeQ);
  f.edge_mapped.resize(ne * FeSpace::kEdgeQ);
  for (int e = 0; e < ne; ++e) {
    const int tri = space.mesh->boundary_edges[e].tri;
    for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
      const int idx = e * FeSpace::kEdgeQ + q;
      const Vec2 x = space.edge_qp[idx];
      const PointTransform pt = transform_from_grad(grad.on_element(tri, x), d);
      f.edge_weight[idx] = boundary_weight(pt, space.edge_normal[e]);
      f.edge_mapped[idx] = x + d * grad.value_on_element(tri, x);
    }
  }
  return f;
}

TransformFields identity_transform_fields(const FeSpace& space) {
  TransformFields f;
  f.d = 0.0;
  f.cell_det.assign(space.n_cells() * FeSpace::kCellQ, 1.0);
  f.cell_metric.assign(space.n_cells() * FeSpace::kCellQ, Mat2::identity());
  f.cell_mapped = space.cell_qp;
  f.edge_weight.assign(space.n_bedges() * FeSpace::kEdgeQ, 1.0);
  f.edge_mapped = space.edge_qp;
  return f;
}

namespace {

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(std::string("non-finite value in ") + what);
}

}  // namespace

SparseOperator assemble_weighted_mass_q(const FeSpace& space, std::span<const double> q_coeff) {
  check_finite(q_coeff, "mass coefficient");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_cells() * 9);
  for (int t = 0; t < space.n_cells(); ++t) {
    const auto& tr = space.mesh->triangles[t];
    const double w = space.cell_qweight(t);
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const double cw = w * q_coeff[t * FeSpace::kCellQ + q];
      if (cw == 0.0) continue;
      for (int i = 0; i < 3; ++i) {
        const double ni = FeSpace::cell_qbasis(q, i);
        if (ni == 0.0) continue;
        for (int j = 0; j < 3; ++j) {
          const double nj = FeSpace::cell_qbasis(q, j);
          if (nj == 0.0) continue;
          trip.emplace_back(tr[i], tr[j], cw * ni * nj);
        }
      }
    }
  }
  return SparseOperator::from_triplets(space.dofs, trip);
}

SparseOperator assemble_weighted_mass(const FeSpace& space, std::span<const double> nodal_coeff) {
  check_finite(nodal_coeff, "mass coefficient");
  return assemble_weighted_mass_q(space, interpolate_cell_q(space, nodal_coeff));
}

SparseOperator assemble_matrix_stiffness(const FeSpace& space, std::span<const Mat2> q_metric) {
  for (const auto& m : q_metric) {
    if (m.asymmetry() > 1e-10 * std::max(1.0, m.max_abs()))
      throw Error("matrix coefficient is not symmetric");
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_cells() * 9);
  for (int t = 0; t < space.n_cells(); ++t) {
    const auto& tr = space.mesh->triangles[t];
    const double w = space.cell_qweight(t);
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const Mat2& m = q_metric[t * FeSpace::kCellQ + q];
      for (int i = 0; i < 3; ++i) {
        const Vec2 mgi = m * space.basis_grad[t][i];
        for (int j = 0; j < 3; ++j)
          trip.emplace_back(tr[i], tr[j], w * dot(space.basis_grad[t][j], mgi));
      }
    }
  }
  return SparseOperator::from_triplets(space.dofs, trip);
}

SparseOperator assemble_matrix_stiffness(const FeSpace& space) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_cells() * 9);
  for (int t = 0; t < space.n_cells(); ++t) {
    const auto& tr = space.mesh->triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tr[i], tr[j],
                          space.area[t] * dot(space.basis_grad[t][i], space.basis_grad[t][j]));
  }
  return SparseOperator::from_triplets(space.dofs, trip);
}

SparseOperator assemble_convective(const FeSpace& space, std::span<const Vec2> q_gradpsi,
                                   std::span<const Mat2> q_metric) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_cells() * 9);
  const bool with_metric = !q_metric.empty();
  for (int t = 0; t < space.n_cells(); ++t) {
    const auto& tr = space.mesh->triangles[t];
    const double w = space.cell_qweight(t);
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const int idx = t * FeSpace::kCellQ + q;
      const Vec2 adv = q_gradpsi[idx];
      for (int j = 0; j < 3; ++j) {
        const Vec2 mgj =
            with_metric ? (q_metric[idx] * space.basis_grad[t][j]) : space.basis_grad[t][j];
        const double conv = dot(mgj, adv);
        if (conv == 0.0) continue;
        for (int i = 0; i < 3; ++i) {
          const double ni = FeSpace::cell_qbasis(q, i);
          if (ni == 0.0) continue;
          trip.emplace_back(tr[i], tr[j], w * conv * ni);
        }
      }
    }
  }
  return SparseOperator::from_triplets(space.dofs, trip);
}

std::vector<double> assemble_boundary_load(const FeSpace& space,
                                           std::span<const double> q_wfield,
                                           std::span<const double> q_data) {
  check_finite(q_wfield, "boundary weight");
  check_finite(q_data, "boundary data");
  std::vector<double> load(space.dofs, 0.0);
  for (int e = 0; e < space.n_bedges(); ++e) {
    const auto& be = space.mesh->boundary_edges[e];
    const double w = space.edge_qweight(e);
    for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
      const int idx = e * FeSpace::kEdgeQ + q;
      const double c = w * q_wfield[idx] * q_data[idx];
      load[be.a] += c * space.edge_qbasis[idx][0];
      load[be.b] += c * space.edge_qbasis[idx][1];
    }
  }
  return load;
}

SparseOperator assemble_boundary_mass(const FeSpace& space, std::span<const double> q_coeff) {
  check_finite(q_coeff, "boundary coefficient");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.n_bedges() * 4);
  for (int e = 0; e < space.n_bedges(); ++e) {
    const auto& be = space.mesh->boundary_edges[e];
    const int nodes[2] = {be.a, be.b};
    const double w = space.edge_qweight(e);
    for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
      const int idx = e * FeSpace::kEdgeQ + q;
      const double c = w * q_coeff[idx];
      if (c == 0.0) continue;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          trip.emplace_back(nodes[i], nodes[j],
                            c * space.edge_qbasis[idx][i] * space.edge_qbasis[idx][j]);
    }
  }
  return SparseOperator::from_triplets(space.dofs, trip);
}

std::vector<double> interpolate_cell_q(const FeSpace& space, std::span<const double> nodal) {
  std::vector<double> out(space.n_cells() * FeSpace::kCellQ);
  for (int t = 0; t < space.n_cells(); ++t)
    for (int q = 0; q < FeSpace::kCellQ; ++q)
      out[t * FeSpace::kCellQ + q] = space.value_at(t, q, nodal);
  return out;
}

std::vector<Vec2> gradient_cell_q(const FeSpace& space, std::span<const double> nodal) {
  std::vector<Vec2> out(space.n_cells() * FeSpace::kCellQ);
  for (int t = 0; t < space.n_cells(); ++t) {
    const Vec2 g = space.element_gradient(t, nodal);
    for (int q = 0; q < FeSpace::kCellQ; ++q) out[t * FeSpace::kCellQ + q] = g;
  }
  return out;
}

std::vector<double> interpolate_edge_q(const FeSpace& space, std::span<const double> nodal) {
  std::vector<double> out(space.n_bedges() * FeSpace::kEdgeQ);
  for (int e = 0; e < space.n_bedges(); ++e)
    for (int q = 0; q < FeSpace::kEdgeQ; ++q)
      out[e * FeSpace::kEdgeQ + q] = space.edge_value_at(e, q, nodal);
  return out;
}

}  // namespace sonoshape

#include "sonoshape/shape_derivative.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include "sonoshape/errors.hpp"

namespace sonoshape {

namespace {

// trapezoid weight on a uniform grid
double trap(int s, int N, double dt) { return (s == 0 || s == N) ? 0.5 * dt : dt; }

}  // namespace

BoundaryDensity shape_gradient_density(const FeSpace& space, const StateSolution& state,
                                       const AdjointSolution& adj,
                                       const BoundaryExcitation& g,
                                       const ModelParams& params,
                                       const BoundaryGeometry& bg) {
  if (state.time.size() != adj.time.size())
    throw Error("state and adjoint live on different time grids");
  const Mesh& mesh = *space.mesh;
  const int N = state.steps();
  const double dt = state.dt();
  const double c2 = params.c * params.c;
  const int nb = static_cast<int>(bg.vertex.size());

  const std::vector<double> profile = g.sample_profile(mesh);

  BoundaryDensity density;
  density.value.assign(nb, 0.0);
  density.excluded.assign(bg.corner.begin(), bg.corner.end());

  std::vector<double> weighted_product(space.dofs);  // profile * p, per step
  for (int s = 0; s <= N; ++s) {
    const double t = state.time[s];
    const double load_sig = c2 * g.signal.value(t) + params.b * g.signal.d1(t);
    const auto& psi = state.psi[s];
    const auto& dpsi = state.dpsi[s];
    const auto& ddpsi = state.ddpsi[s];
    const auto& p = adj.p[s];
    for (int i = 0; i < space.dofs; ++i) weighted_product[i] = profile[i] * p[i];
    const double tau = trap(s, N, dt);
    for (int l = 0; l < nb; ++l) {
      if (density.excluded[l]) continue;
      const int v = bg.vertex[l];
      const Vec2 n = bg.normal[l];
      const Vec2 grad_p = space.vertex_gradient(v, p);
      const Vec2 grad_psi = space.vertex_gradient(v, psi);
      const Vec2 grad_dpsi = space.vertex_gradient(v, dpsi);
      const double dn_gp = load_sig * dot(n, space.vertex_gradient(v, weighted_product));
      const double gp_kappa = load_sig * profile[v] * p[v] * bg.curvature[l];
      const double a = 1.0 - 2.0 * params.k * dpsi[v];
      double val = dn_gp + gp_kappa;
      val -= a * ddpsi[v] * p[v];
      val -= c2 * dot(grad_p, grad_psi);
      val -= params.b * dot(grad_p, grad_dpsi);
      val += 2.0 * params.sigma * p[v] * dot(grad_psi, grad_dpsi);
      density.value[l] += tau * val;
    }
  }
  return density;
}

double shape_derivative(const BoundaryDensity& density, const BoundaryGeometry& bg,
                        const DeformationField& h, const CostFunctionalSpec* guard) {
  if (guard && guard->variant != CostVariant::FinalTime) {
    if (deformation_touches_focal_region(h, *guard))
      throw ConfigError("deformation support touches the focal region");
  }
  double dJ = 0.0;
  for (size_t l = 0; l < bg.vertex.size(); ++l) {
    if (density.excluded[l]) continue;
    dJ += bg.arc_weight[l] * density.value[l] * dot(h.values[bg.vertex[l]], bg.normal[l]);
  }
  return dJ;
}

double shape_derivative_volume(const FeSpace& space, const StateSolution& state,
                               const AdjointSolution& adj, const ModelParams& params,
                               const BoundaryExcitation& g, const BoundaryGeometry& bg,
                               const DeformationField& h, GradSource source) {
  const Mesh& mesh = *space.mesh;
  GradientProvider grad_h(h, &mesh, source);
  const int N = state.steps();
  const double dt = state.dt();
  const double c2 = params.c * params.c;

  // metric perturbation and divergence at the cell quadrature points
  const int ncq = space.n_cells() * FeSpace::kCellQ;
  std::vector<Mat2> mp(ncq);
  std::vector<double> divh(ncq);
  for (int t = 0; t < space.n_cells(); ++t) {
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const int idx = t * FeSpace::kCellQ + q;
      const Mat2 G = grad_h.on_element(t, space.cell_qp[idx]);
      divh[idx] = G.trace();
      mp[idx] = G.trace() * Mat2::identity() - G - G.transposed();
    }
  }
  // deformation values at boundary quadrature points
  std::vector<Vec2> h_edge(space.n_bedges() * FeSpace::kEdgeQ);
  for (int e = 0; e < space.n_bedges(); ++e) {
    const int tri = mesh.boundary_edges[e].tri;
    for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
      const int idx = e * FeSpace::kEdgeQ + q;
      h_edge[idx] = grad_h.value_on_element(tri, space.edge_qp[idx]);
    }
  }

  const std::vector<double> profile = g.sample_profile(mesh);
  std::vector<double> weighted_product(space.dofs);

  double total = 0.0;
  for (int s = 0; s <= N; ++s) {
    const double t = state.time[s];
    const double tau = trap(s, N, dt);
    const double load_sig = c2 * g.signal.value(t) + params.b * g.signal.d1(t);
    const auto& psi = state.psi[s];
    const auto& dpsi = state.dpsi[s];
    const auto& ddpsi = state.ddpsi[s];
    const auto& p = adj.p[s];

    double vol = 0.0;
    for (int tr = 0; tr < space.n_cells(); ++tr) {
      const double w = space.cell_qweight(tr);
      const Vec2 gpsi = space.element_gradient(tr, psi);
      const Vec2 gdpsi = space.element_gradient(tr, dpsi);
      const Vec2 gp = space.element_gradient(tr, p);
      for (int q = 0; q < FeSpace::kCellQ; ++q) {
        const int idx = tr * FeSpace::kCellQ + q;
        const double a = 1.0 - 2.0 * params.k * space.value_at(tr, q, dpsi);
        const double pv = space.value_at(tr, q, p);
        const double ddv = space.value_at(tr, q, ddpsi);
        const Vec2 mp_gp = mp[idx] * gp;
        double term = -divh[idx] * a * ddv * pv;
        term -= c2 * dot(mp_gp, gpsi) + params.b * dot(mp_gp, gdpsi);
        term += 2.0 * params.sigma * dot(mp[idx] * gdpsi, gpsi) * pv;
        vol += w * term;
      }
    }

    // boundary rate of the load term: -(c^2 g + b g_t) grad(p).h
    double bnd = 0.0;
    for (int e = 0; e < space.n_bedges(); ++e) {
      const double w = space.edge_qweight(e);
      const Vec2 gp = space.element_gradient(mesh.boundary_edges[e].tri, p);
      for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
        const int idx = e * FeSpace::kEdgeQ + q;
        const double gval = load_sig * g.profile(space.edge_qp[idx]);
        bnd -= w * gval * dot(gp, h_edge[idx]);
      }
    }
    // vertex-lumped normal-derivative and curvature pieces
    for (int i = 0; i < space.dofs; ++i) weighted_product[i] = profile[i] * p[i];
    for (size_t l = 0; l < bg.vertex.size(); ++l) {
      if (bg.corner[l]) continue;
      const int v = bg.vertex[l];
      const double hn = dot(h.values[v], bg.normal[l]);
      if (hn == 0.0) continue;
      const double dn_gp =
          load_sig * dot(bg.normal[l], space.vertex_gradient(v, weighted_product));
      const double gp_kappa = load_sig * profile[v] * p[v] * bg.curvature[l];
      bnd += bg.arc_weight[l] * (dn_gp + gp_kappa) * hn;
    }

    total += tau * (vol + bnd);
  }
  return total;
}

double lemma_identity_residual(const FeSpace& space, const ScalarTestField& a,
                               const ScalarTestField& u, const ScalarTestField& v,
                               const DeformationField& h) {
  const Mesh& mesh = *space.mesh;
  GradientProvider grad_h(h, &mesh, GradSource::Auto);

  double lhs = 0.0, rhs_vol = 0.0, rhs_bnd = 0.0;
  for (int t = 0; t < space.n_cells(); ++t) {
    const double w = space.cell_qweight(t);
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const Vec2 x = space.cell_qp[t * FeSpace::kCellQ + q];
      const Mat2 G = grad_h.on_element(t, x);
      const Mat2 mp = G.trace() * Mat2::identity() - G - G.transposed();
      const Vec2 gu = u.grad(x), gv = v.grad(x), ga = a.grad(x);
      const Vec2 hx = grad_h.value_on_element(t, x);
      const double av = a.value(x);
      lhs += w * av * dot(mp * gu, gv);
      const double div_agu = dot(ga, gu) + av * u.hess(x).trace();
      const double div_agv = dot(ga, gv) + av * v.hess(x).trace();
      rhs_vol += w * (div_agu * dot(hx, gv) + div_agv * dot(hx, gu) -
                      dot(gu, gv) * dot(hx, ga));
    }
  }
  for (int e = 0; e < space.n_bedges(); ++e) {
    const double w = space.edge_qweight(e);
    const Vec2 n = space.edge_normal[e];
    const int tri = mesh.boundary_edges[e].tri;
    for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
      const Vec2 x = space.edge_qp[e * FeSpace::kEdgeQ + q];
      const Vec2 gu = u.grad(x), gv = v.grad(x);
      const Vec2 hx = grad_h.value_on_element(tri, x);
      const double av = a.value(x);
      rhs_bnd -= w * av * (dot(n, gu) * dot(hx, gv) + dot(n, gv) * dot(hx, gu));
      rhs_bnd += w * av * dot(gu, gv) * dot(hx, n);
    }
  }
  return std::abs(lhs - (rhs_vol + rhs_bnd));
}

TaylorResult taylor_test(const ProblemSetup& setup, const DeformationField& h,
                         std::vector<double> d_values, int threads, GradSource source) {
  if (d_values.empty()) throw ConfigError("taylor test needs at least one d value");
  const FeSpace space = make_space(setup.mesh);
  const BoundaryGeometry bg = compute_boundary_geometry(setup.mesh);

  TaylorResult result;
  result.d_values = d_values;

  const ForwardResult base = run_forward(space, setup);
  result.J0 = base.J;
  const AdjointData data = adjoint_data(setup.cost, base.state, setup.params, space);
  const AdjointSolution adj =
      solve_adjoint(space, setup.params, base.state, setup.excitation, data,
                    setup.solve_opts);
  const BoundaryDensity density =
      shape_gradient_density(space, base.state, adj, setup.excitation, setup.params, bg);
  result.dJ = shape_derivative(density, bg, h, &setup.cost);

  const int nd = static_cast<int>(d_values.size());
  result.J_d.assign(nd, 0.0);
  std::vector<std::exception_ptr> errors(nd);
  const int nthreads = std::max(1, std::min(threads, nd));
  auto worker = [&](int first) {
    for (int i = first; i < nd; i += nthreads) {
      try {
        result.J_d[i] = run_forward_transformed(space, setup, h, d_values[i], source).J;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  result.remainder.resize(nd);
  for (int i = 0; i < nd; ++i)
    result.remainder[i] = std::abs(result.J_d[i] - result.J0 - d_values[i] * result.dJ);
  for (int i = 0; i + 1 < nd; ++i) {
    const double r0 = result.remainder[i], r1 = result.remainder[i + 1];
    if (r0 > 0.0 && r1 > 0.0)
      result.order.push_back(std::log(r0 / r1) / std::log(d_values[i] / d_values[i + 1]));
    else
      result.order.push_back(0.0);
  }
  const double d_min = d_values.back();
  result.fd_smallest = (result.J_d.back() - result.J0) / d_min;
  const double scale = std::max(std::abs(result.dJ), 1e-300);
  result.rel_gap_smallest = std::abs(result.fd_smallest - result.dJ) / scale;
  return result;
}

DeformationField lift_descent_field(const FeSpace& space, const BoundaryGeometry& bg,
                                    const BoundaryDensity& density,
                                    const CostFunctionalSpec& cost,
                                    int smoothing_passes) {
  const Mesh& mesh = *space.mesh;
  const int nb = static_cast<int>(bg.vertex.size());

  // neighbor averaging along each boundary loop
  std::vector<double> rho = density.value;
  for (int pass = 0; pass < smoothing_passes; ++pass) {
    std::vector<double> next = rho;
    for (size_t li = 0; li < mesh.loop_starts.size(); ++li) {
      const int begin = mesh.loop_starts[li];
      const int end = (li + 1 < mesh.loop_starts.size())
                          ? mesh.loop_starts[li + 1]
                          : static_cast<int>(mesh.boundary_edges.size());
      for (int l = begin; l < end; ++l) {
        const int prev = (l == begin) ? end - 1 : l - 1;
        const int succ = (l == end - 1) ? begin : l + 1;
        next[l] = 0.25 * rho[prev] + 0.5 * rho[l] + 0.25 * rho[succ];
      }
    }
    rho.swap(next);
  }

  // Dirichlet data: -rho * n on the boundary, zero on the focal support
  std::vector<char> constrained(space.dofs, 0);
  std::vector<Vec2> bc(space.dofs, Vec2{});
  for (int l = 0; l < nb; ++l) {
    const int v = bg.vertex[l];
    constrained[v] = 1;
    bc[v] = density.excluded[l] ? Vec2{} : (-rho[l]) * bg.normal[l];
  }
  for (int v = 0; v < space.dofs; ++v) {
    if (cost.chi[v] > 0.0) {
      constrained[v] = 1;
      bc[v] = Vec2{};
    }
  }

  // discrete harmonic extension, component by component
  const SparseOperator stiff = assemble_matrix_stiffness(space);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs_x = Eigen::VectorXd::Zero(space.dofs);
  Eigen::VectorXd rhs_y = Eigen::VectorXd::Zero(space.dofs);
  const auto& K = stiff.matrix();
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (constrained[i]) continue;
      if (constrained[j]) {
        rhs_x[i] -= it.value() * bc[j].x;
        rhs_y[i] -= it.value() * bc[j].y;
      } else {
        trip.emplace_back(i, j, it.value());
      }
    }
  }
  for (int i = 0; i < space.dofs; ++i) {
    if (constrained[i]) {
      trip.emplace_back(i, i, 1.0);
      rhs_x[i] = bc[i].x;
      rhs_y[i] = bc[i].y;
    }
  }
  LinearSolver ls;
  ls.factorize(SparseOperator::from_triplets(space.dofs, trip));
  const Eigen::VectorXd hx = ls.solve(rhs_x);
  const Eigen::VectorXd hy = ls.solve(rhs_y);

  DeformationField h;
  h.values.resize(space.dofs);
  double hmax = 0.0;
  for (int i = 0; i < space.dofs; ++i) {
    h.values[i] = {hx[i], hy[i]};
    hmax = std::max(hmax, h.values[i].norm());
  }
  if (hmax > 0.0)
    for (auto& val : h.values) val *= 1.0 / hmax;
  return h;
}

}  // namespace sonoshape

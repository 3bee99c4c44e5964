#include "sonoshape/cost.hpp"

#include <cmath>

#include "sonoshape/errors.hpp"

namespace sonoshape {

void CostFunctionalSpec::validate(const Mesh& mesh, double T) const {
  if (focal_vertices.empty()) throw ConfigError("empty focal region");
  for (int v : focal_vertices)
    if (mesh.is_boundary_vertex(v))
      throw ConfigError("focal region must be strictly inside the domain");
  if (variant != CostVariant::FinalTime) {
    if (!(t0 >= 0.0 && t0 < t1 && t1 <= T + 1e-12))
      throw ConfigError("tracking window must satisfy 0 <= t0 < t1 <= T");
  }
  for (double x : chi)
    if (!std::isfinite(x)) throw ConfigError("indicator has non-finite entries");
  for (double x : target_snapshot)
    if (!std::isfinite(x)) throw ConfigError("target has non-finite entries");
}

CostFunctionalSpec make_focal_region(const Mesh& mesh, CostVariant variant,
                                     const Vec2& center, double radius, double t0,
                                     double t1, bool sharp_indicator) {
  CostFunctionalSpec spec;
  spec.variant = variant;
  spec.t0 = t0;
  spec.t1 = t1;
  const int n = mesh.vertex_count();
  std::vector<double> sharp(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if ((mesh.vertices[v] - center).norm() <= radius) {
      sharp[v] = 1.0;
      spec.focal_vertices.push_back(v);
    }
  }
  if (spec.focal_vertices.empty())
    throw ConfigError("focal region contains no mesh vertices");
  if (sharp_indicator) {
    spec.chi = sharp;
    return spec;
  }
  // one averaging pass over vertex stars: support grows by one element layer,
  // values stay in [0,1]
  std::vector<std::vector<int>> nb(n);
  for (const auto& tr : mesh.triangles) {
    for (int l = 0; l < 3; ++l) {
      nb[tr[l]].push_back(tr[(l + 1) % 3]);
      nb[tr[l]].push_back(tr[(l + 2) % 3]);
    }
  }
  spec.chi.assign(n, 0.0);
  for (int v = 0; v < n; ++v) {
    double s = sharp[v];
    int cnt = 1;
    for (int w : nb[v]) {
      s += sharp[w];
      ++cnt;
    }
    spec.chi[v] = s / cnt;
  }
  // keep the core of the region at full strength
  for (int v : spec.focal_vertices) spec.chi[v] = 1.0;
  return spec;
}

std::vector<double> window_weights(const std::vector<double>& time, double t0, double t1) {
  const double eps = 1e-12 * (time.back() - time.front() + 1.0);
  std::vector<int> inside;
  for (size_t i = 0; i < time.size(); ++i)
    if (time[i] >= t0 - eps && time[i] <= t1 + eps) inside.push_back(static_cast<int>(i));
  std::vector<double> w(time.size(), 0.0);
  if (inside.size() < 2) {
    if (inside.size() == 1) w[inside[0]] = 0.0;  // degenerate window
    return w;
  }
  for (size_t j = 0; j + 1 < inside.size(); ++j) {
    const double dt = time[inside[j + 1]] - time[inside[j]];
    w[inside[j]] += 0.5 * dt;
    w[inside[j + 1]] += 0.5 * dt;
  }
  return w;
}

namespace {

std::vector<double> residual_at(const StateSolution& sol, const CostFunctionalSpec& spec,
                                int step) {
  const auto& field = (spec.variant == CostVariant::PressureTracking) ? sol.dpsi[step]
                                                                      : sol.psi[step];
  std::vector<double> e = field;
  if (spec.variant == CostVariant::FinalTime) {
    if (!spec.target_snapshot.empty())
      for (size_t i = 0; i < e.size(); ++i) e[i] -= spec.target_snapshot[i];
  } else if (!spec.target_trajectory.empty()) {
    const auto& tgt = spec.target_trajectory[step];
    for (size_t i = 0; i < e.size(); ++i) e[i] -= tgt[i];
  }
  return e;
}

}  // namespace

double evaluate_cost(const FeSpace& space, const StateSolution& sol,
                     const CostFunctionalSpec& spec) {
  spec.validate(*space.mesh, sol.time.back());
  const SparseOperator mass_chi = assemble_weighted_mass(space, spec.chi);
  if (spec.variant == CostVariant::FinalTime) {
    const auto e = residual_at(sol, spec, sol.steps());
    return 0.5 * mass_chi.quadratic_form(e, e);
  }
  const auto w = window_weights(sol.time, spec.t0, spec.t1);
  double J = 0.0;
  for (size_t n = 0; n < sol.time.size(); ++n) {
    if (w[n] == 0.0) continue;
    const auto e = residual_at(sol, spec, static_cast<int>(n));
    J += 0.5 * w[n] * mass_chi.quadratic_form(e, e);
  }
  return J;
}

double evaluate_cost_transformed(const FeSpace& space, const StateSolution& sol,
                                 const CostFunctionalSpec& spec,
                                 const TransformFields& transform) {
  spec.validate(*space.mesh, sol.time.back());
  auto chi_q = interpolate_cell_q(space, spec.chi);
  for (size_t i = 0; i < chi_q.size(); ++i) chi_q[i] *= transform.cell_det[i];
  const SparseOperator mass_chi = assemble_weighted_mass_q(space, chi_q);
  if (spec.variant == CostVariant::FinalTime) {
    const auto e = residual_at(sol, spec, sol.steps());
    return 0.5 * mass_chi.quadratic_form(e, e);
  }
  const auto w = window_weights(sol.time, spec.t0, spec.t1);
  double J = 0.0;
  for (size_t n = 0; n < sol.time.size(); ++n) {
    if (w[n] == 0.0) continue;
    const auto e = residual_at(sol, spec, static_cast<int>(n));
    J += 0.5 * w[n] * mass_chi.quadratic_form(e, e);
  }
  return J;
}

bool deformation_touches_focal_region(const DeformationField& h,
                                      const CostFunctionalSpec& spec) {
  for (size_t v = 0; v < h.values.size(); ++v) {
    if (spec.chi[v] > 0.0 && h.values[v].norm() > 0.0) return true;
  }
  return false;
}

}  // namespace sonoshape

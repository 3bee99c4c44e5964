#include "sonoshape/state.hpp"

#include <cmath>
#include <string>

#include "sonoshape/errors.hpp"

namespace sonoshape {

namespace {

constexpr double kBeta = 0.25;
constexpr double kGamma = 0.5;

using Vec = Eigen::VectorXd;

Vec to_eigen(std::span<const double> v) {
  return Eigen::Map<const Vec>(v.data(), v.size());
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

double energy_of(const SparseOperator& mass, const SparseOperator& stiff, double c,
                 const Vec& u, const Vec& v) {
  const double kin = 0.5 * v.dot(mass.matrix() * v);
  const double pot = 0.5 * c * c * u.dot(stiff.matrix() * u);
  return kin + pot;
}

struct LoadContext {
  const FeSpace& space;
  const BoundaryExcitation& g;
  const ModelParams& params;
  const TransformFields* transform;
  const VolumeSource* source;
  std::vector<double> profile_q;  // excitation profile at (mapped) edge qpoints
  std::vector<double> weight_q;   // surface weight at edge qpoints
};

LoadContext make_load_context(const FeSpace& space, const BoundaryExcitation& g,
                              const ModelParams& params, const TransformFields* transform,
                              const VolumeSource* source) {
  LoadContext ctx{space, g, params, transform, source, {}, {}};
  const int nq = space.n_bedges() * FeSpace::kEdgeQ;
  ctx.profile_q.resize(nq);
  const auto& pts = transform ? transform->edge_mapped : space.edge_qp;
  for (int i = 0; i < nq; ++i) ctx.profile_q[i] = g.profile(pts[i]);
  if (transform)
    ctx.weight_q = transform->edge_weight;
  else
    ctx.weight_q.assign(nq, 1.0);
  return ctx;
}

Vec assemble_load(const LoadContext& ctx, double t) {
  const double c2 = ctx.params.c * ctx.params.c;
  const double sig_v = ctx.g.signal.value(t);
  const double sig_d = ctx.g.signal.d1(t);
  std::vector<double> data(ctx.profile_q.size());
  for (size_t i = 0; i < data.size(); ++i)
    data[i] = ctx.profile_q[i] * (c2 * sig_v + ctx.params.b * sig_d);
  std::vector<double> load = assemble_boundary_load(ctx.space, ctx.weight_q, data);
  Vec f = to_eigen(load);
  if (ctx.source) {
    // volumetric verification source, reference configuration only
    const FeSpace& sp = ctx.space;
    Vec fs = Vec::Zero(sp.dofs);
    for (int tr = 0; tr < sp.n_cells(); ++tr) {
      const auto& tri = sp.mesh->triangles[tr];
      const double w = sp.cell_qweight(tr);
      for (int q = 0; q < FeSpace::kCellQ; ++q) {
        const double val = (*ctx.source)(sp.cell_qp[tr * FeSpace::kCellQ + q], t);
        for (int l = 0; l < 3; ++l) fs[tri[l]] += w * val * FeSpace::cell_qbasis(q, l);
      }
    }
    f += fs;
  }
  return f;
}

// I_d * (1 - 2k dpsi) at cell quadrature points
std::vector<double> mass_coefficient(const FeSpace& space, const TransformFields* transform,
                                     double k, const Vec& dpsi) {
  std::vector<double> coeff(space.n_cells() * FeSpace::kCellQ);
  const std::span<const double> nodal(dpsi.data(), dpsi.size());
  for (int t = 0; t < space.n_cells(); ++t) {
    for (int q = 0; q < FeSpace::kCellQ; ++q) {
      const int idx = t * FeSpace::kCellQ + q;
      double a = 1.0 - 2.0 * k * space.value_at(t, q, nodal);
      if (transform) a *= transform->cell_det[idx];
      coeff[idx] = a;
    }
  }
  return coeff;
}

}  // namespace

StateSolution solve_state(const FeSpace& space, const ModelParams& params,
                          const BoundaryExcitation& g, std::span<const double> psi0,
                          std::span<const double> psi1, const TransformFields* transform,
                          double T, int steps, const SolveOptions& opts,
                          const VolumeSource* source) {
  params.validate();
  g.validate();
  if (steps < 1) throw ConfigError("need at least one time step");
  if (transform && source)
    throw ConfigError("the volumetric source hook is reference-configuration only");
  const int n = space.dofs;
  if (static_cast<int>(psi0.size()) != n || static_cast<int>(psi1.size()) != n)
    throw ConfigError("initial data size does not match the space");
  const double dt = T / steps;
  const double c2 = params.c * params.c;
  const bool is_linear = (params.k == 0.0 && params.sigma == 0.0);

  // time-invariant operators
  const SparseOperator mass_plain = assemble_weighted_mass_q(
      space, std::vector<double>(space.n_cells() * FeSpace::kCellQ, 1.0));
  const SparseOperator stiff_plain = assemble_matrix_stiffness(space);
  const SparseOperator stiff =
      transform ? assemble_matrix_stiffness(space, transform->cell_metric) : stiff_plain;

  LoadContext loads = make_load_context(space, g, params, transform, source);

  StateSolution sol;
  sol.time.resize(steps + 1);
  for (int i = 0; i <= steps; ++i) sol.time[i] = T * i / steps;

  Vec u = to_eigen(psi0);
  Vec v = to_eigen(psi1);

  auto margin_of = [&](const Vec& vel) {
    double m = 1.0;
    for (int i = 0; i < n; ++i) m = std::min(m, 1.0 - 2.0 * params.k * vel[i]);
    return m;
  };

  // consistent initial acceleration
  Vec acc;
  {
    const SparseOperator mass_a =
        assemble_weighted_mass_q(space, mass_coefficient(space, transform, params.k, v));
    Vec rhs = assemble_load(loads, 0.0) - params.b * (stiff.matrix() * v) -
              c2 * (stiff.matrix() * u);
    if (params.sigma != 0.0) {
      const auto grads = gradient_cell_q(space, std::span<const double>(u.data(), n));
      const SparseOperator conv =
          transform ? assemble_convective(space, grads, transform->cell_metric)
                    : assemble_convective(space, grads);
      sol.stats.convective_assemblies += 1;
      rhs += 2.0 * params.sigma * (conv.matrix() * v);
    }
    LinearSolver ls;
    ls.factorize(mass_a);
    acc = ls.solve(rhs);
  }

  sol.psi.push_back(to_std(u));
  sol.dpsi.push_back(to_std(v));
  sol.ddpsi.push_back(to_std(acc));
  sol.energy.push_back(energy_of(mass_plain, stiff_plain, params.c, u, v));
  sol.degeneracy_margin = margin_of(v);
  if (sol.degeneracy_margin < opts.degeneracy_floor)
    throw DegeneracyError("degeneracy at step 0: margin " +
                              std::to_string(sol.degeneracy_margin),
                          0);

  // constant system matrix in the linear case
  LinearSolver linear_solver;
  if (is_linear) {
    const SparseOperator mass_a =
        assemble_weighted_mass_q(space, mass_coefficient(space, transform, 0.0, v));
    const SparseOperator sys =
        mass_a.plus(stiff, kGamma * dt * params.b + kBeta * dt * dt * c2);
    linear_solver.factorize(sys);
  }

  double energy_base = sol.energy[0];
  double load_scale = 0.0;

  for (int step = 1; step <= steps; ++step) {
    const double t = sol.time[step];
    const Vec upred = u + dt * v + dt * dt * (0.5 - kBeta) * acc;
    const Vec vpred = v + dt * (1.0 - kGamma) * acc;
    const Vec f = assemble_load(loads, t);
    load_scale = std::max(load_scale, f.norm());

    Vec acc_new;
    if (is_linear) {
      const Vec rhs = f - params.b * (stiff.matrix() * vpred) - c2 * (stiff.matrix() * upred);
      acc_new = linear_solver.solve(rhs);
      sol.stats.picard_total += 1;
    } else {
      Vec v_it = vpred;
      Vec u_it = upred;
      bool converged = false;
      for (int m = 0; m < opts.picard_max; ++m) {
        const SparseOperator mass_a = assemble_weighted_mass_q(
            space, mass_coefficient(space, transform, params.k, v_it));
        SparseOperator sys = mass_a.plus(stiff, kGamma * dt * params.b + kBeta * dt * dt * c2);
        Vec rhs = f - params.b * (stiff.matrix() * vpred) - c2 * (stiff.matrix() * upred);
        if (params.sigma != 0.0) {
          const auto grads =
              gradient_cell_q(space, std::span<const double>(u_it.data(), n));
          const SparseOperator conv =
              transform ? assemble_convective(space, grads, transform->cell_metric)
                        : assemble_convective(space, grads);
          sol.stats.convective_assemblies += 1;
          sys = sys.plus(conv, -2.0 * params.sigma * kGamma * dt);
          rhs += 2.0 * params.sigma * (conv.matrix() * vpred);
        }
        LinearSolver ls;
        ls.factorize(sys);
        acc_new = ls.solve(rhs);
        const Vec v_new = vpred + kGamma * dt * acc_new;
        const Vec delta = v_new - v_it;
        const double err = std::sqrt(delta.dot(mass_plain.matrix() * delta));
        v_it = v_new;
        u_it = upred + kBeta * dt * dt * acc_new;
        sol.stats.picard_total += 1;
        sol.stats.picard_worst = std::max(sol.stats.picard_worst, m + 1);
        if (!std::isfinite(err))
          throw BlowUpError("non-finite iterate at step " + std::to_string(step));
        if (err < opts.picard_tol) {
          converged = true;
          break;
        }
      }
      if (!converged)
        throw NonConvergenceError("Picard iteration cap reached at step " +
                                  std::to_string(step));
    }

    acc = acc_new;
    v = vpred + kGamma * dt * acc;
    u = upred + kBeta * dt * dt * acc;

    const double margin = margin_of(v);
    sol.degeneracy_margin = std::min(sol.degeneracy_margin, margin);
    if (margin < opts.degeneracy_floor)
      throw DegeneracyError("degeneracy at step " + std::to_string(step) + ": margin " +
                                std::to_string(margin),
                            step);

    const double energy = energy_of(mass_plain, stiff_plain, params.c, u, v);
    if (!std::isfinite(energy))
      throw BlowUpError("non-finite energy at step " + std::to_string(step));
    // The guard scale folds in the forcing magnitude because rest starts
    // have zero initial energy.
    const double guard = std::max(energy_base, T * T * load_scale * load_scale);
    if (guard > 0.0 && energy > opts.blowup_factor * guard)
      throw BlowUpError("energy blow-up at step " + std::to_string(step));

    sol.psi.push_back(to_std(u));
    sol.dpsi.push_back(to_std(v));
    sol.ddpsi.push_back(to_std(acc));
    sol.energy.push_back(energy);
  }
  return sol;
}

std::vector<std::vector<double>> acoustic_pressure(const StateSolution& sol,
                                                   const ModelParams& params) {
  std::vector<std::vector<double>> p = sol.dpsi;
  for (auto& row : p)
    for (auto& x : row) x *= params.rho;
  return p;
}

std::vector<double> energy_trace(const FeSpace& space, const StateSolution& sol,
                                 const ModelParams& params) {
  const SparseOperator mass = assemble_weighted_mass_q(
      space, std::vector<double>(space.n_cells() * FeSpace::kCellQ, 1.0));
  const SparseOperator stiff = assemble_matrix_stiffness(space);
  std::vector<double> out(sol.time.size());
  for (size_t i = 0; i < sol.time.size(); ++i) {
    const double kin = 0.5 * mass.quadratic_form(sol.dpsi[i], sol.dpsi[i]);
    const double pot =
        0.5 * params.c * params.c * stiff.quadratic_form(sol.psi[i], sol.psi[i]);
    out[i] = kin + pot;
  }
  return out;
}

}  // namespace sonoshape

#include "sonoshape/adjoint.hpp"

#include <algorithm>
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

}  // namespace

AdjointData adjoint_data(const CostFunctionalSpec& spec, const StateSolution& sol,
                         const ModelParams& params, const FeSpace& space) {
  spec.validate(*space.mesh, sol.time.back());
  const int n = space.dofs;
  const int N = sol.steps();
  const double dt = sol.dt();
  AdjointData data;
  data.p_final.assign(n, 0.0);
  data.dp_final.assign(n, 0.0);

  auto divisor_at_final = [&](int i) {
    const double a = 1.0 - 2.0 * params.k * sol.dpsi[N][i];
    if (a < 0.5)
      throw DegeneracyError("degenerate coefficient in the final-time data", N);
    return a;
  };

  switch (spec.variant) {
    case CostVariant::PotentialTracking: {
      const auto w = window_weights(sol.time, spec.t0, spec.t1);
      data.source.assign(N + 1, std::vector<double>(n, 0.0));
      for (int s = 0; s <= N; ++s) {
        if (w[s] == 0.0) continue;
        const double wn = w[s] / dt;  // trapezoid weight relative to dt
        const auto& tgt =
            spec.target_trajectory.empty() ? std::vector<double>() : spec.target_trajectory[s];
        for (int i = 0; i < n; ++i) {
          const double e = sol.psi[s][i] - (tgt.empty() ? 0.0 : tgt[i]);
          data.source[s][i] = e * spec.chi[i] * wn;
        }
      }
      break;
    }
    case CostVariant::FinalTime: {
      for (int i = 0; i < n; ++i) {
        const double e =
            sol.psi[N][i] - (spec.target_snapshot.empty() ? 0.0 : spec.target_snapshot[i]);
        data.dp_final[i] = -e * spec.chi[i] / divisor_at_final(i);
      }
      break;
    }
    case CostVariant::PressureTracking: {
      const auto w = window_weights(sol.time, spec.t0, spec.t1);
      data.source.assign(N + 1, std::vector<double>(n, 0.0));
      // target rate by centered differences (one-sided at the ends)
      auto target_rate = [&](int s, int i) {
        if (spec.target_trajectory.empty()) return 0.0;
        const int lo = std::max(0, s - 1), hi = std::min(N, s + 1);
        return (spec.target_trajectory[hi][i] - spec.target_trajectory[lo][i]) /
               (sol.time[hi] - sol.time[lo]);
      };
      for (int s = 0; s <= N; ++s) {
        if (w[s] == 0.0) continue;
        const double wn = w[s] / dt;
        for (int i = 0; i < n; ++i) {
          const double e_rate = sol.ddpsi[s][i] - target_rate(s, i);
          data.source[s][i] = -e_rate * spec.chi[i] * wn;
        }
      }
      const double eps = 1e-12 * (sol.time.back() + 1.0);
      if (spec.t1 >= sol.time.back() - eps) {
        for (int i = 0; i < n; ++i) {
          const double fT =
              spec.target_trajectory.empty() ? 0.0 : spec.target_trajectory[N][i];
          data.dp_final[i] = -(sol.dpsi[N][i] - fT) * spec.chi[i] / divisor_at_final(i);
        }
      }
      break;
    }
  }
  return data;
}

void reverse_trajectory(std::vector<std::vector<double>>& traj) {
  std::reverse(traj.begin(), traj.end());
}

AdjointSolution solve_adjoint(const FeSpace& space, const ModelParams& params,
                              const StateSolution& state, const BoundaryExcitation& g,
                              const AdjointData& data, const SolveOptions& opts,
                              bool data_boundary_term) {
  const int n = space.dofs;
  const int N = state.steps();
  const double dt = state.dt();
  const double T = state.time.back();
  const double c2 = params.c * params.c;
  const bool constant_system = (params.k == 0.0 && params.sigma == 0.0);

  const SparseOperator mass_plain = assemble_weighted_mass_q(
      space, std::vector<double>(space.n_cells() * FeSpace::kCellQ, 1.0));
  const SparseOperator stiff = assemble_matrix_stiffness(space);

  // reversed step m corresponds to state step N - m
  auto reversed_mass = [&](int m) {
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = 1.0 - 2.0 * params.k * state.dpsi[N - m][i];
    return assemble_weighted_mass(space, a);
  };
  auto reversed_mass_rate = [&](int m) {
    std::vector<double> da(n);
    for (int i = 0; i < n; ++i) da[i] = 2.0 * params.k * state.ddpsi[N - m][i];
    return assemble_weighted_mass(space, da);
  };
  // first-order operator D(m):  M(da) + b K - 2 sigma C(grad psi)^T  [- B]
  auto damping_op = [&](int m) {
    SparseOperator D = stiff.scaled(params.b);
    if (params.k != 0.0) D = D.plus(reversed_mass_rate(m));
    if (params.sigma != 0.0) {
      const auto grads = gradient_cell_q(space, state.psi[N - m]);
      const SparseOperator conv = assemble_convective(space, grads).transposed();
      D = D.plus(conv, -2.0 * params.sigma);
      if (data_boundary_term) {
        std::vector<double> coeff(space.n_bedges() * FeSpace::kEdgeQ);
        for (int e = 0; e < space.n_bedges(); ++e)
          for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
            const int idx = e * FeSpace::kEdgeQ + q;
            coeff[idx] = 2.0 * params.sigma *
                         g.g(space.edge_qp[idx], state.time[N - m]);
          }
        D = D.plus(assemble_boundary_mass(space, coeff), -1.0);
      }
    }
    return D;
  };
  auto source_at = [&](int m) {
    if (data.source.empty()) return Vec(Vec::Zero(n));
    return Vec(mass_plain.matrix() * to_eigen(data.source[N - m]));
  };

  Vec q = data.p_final.empty() ? Vec(Vec::Zero(n)) : to_eigen(data.p_final);
  Vec qd = data.dp_final.empty() ? Vec(Vec::Zero(n)) : Vec(-to_eigen(data.dp_final));

  SparseOperator D = damping_op(0);
  Vec qdd;
  {
    LinearSolver ls;
    ls.factorize(reversed_mass(0));
    qdd = ls.solve(source_at(0) - D.matrix() * qd - c2 * (stiff.matrix() * q));
  }

  std::vector<std::vector<double>> ptraj(N + 1), dptraj(N + 1);
  // keep the prescribed final data verbatim
  ptraj[N] = data.p_final.empty() ? std::vector<double>(n, 0.0) : data.p_final;
  dptraj[N] = data.dp_final.empty() ? std::vector<double>(n, 0.0) : data.dp_final;

  LinearSolver const_solver;
  if (constant_system) {
    const SparseOperator sys =
        reversed_mass(0).plus(D, kGamma * dt).plus(stiff, kBeta * dt * dt * c2);
    const_solver.factorize(sys);
  }

  for (int m = 1; m <= N; ++m) {
    const Vec upred = q + dt * qd + dt * dt * (0.5 - kBeta) * qdd;
    const Vec vpred = qd + dt * (1.0 - kGamma) * qdd;
    Vec rhs;
    if (constant_system) {
      rhs = source_at(m) - D.matrix() * vpred - c2 * (stiff.matrix() * upred);
      qdd = const_solver.solve(rhs);
    } else {
      D = damping_op(m);
      const SparseOperator sys =
          reversed_mass(m).plus(D, kGamma * dt).plus(stiff, kBeta * dt * dt * c2);
      LinearSolver ls;
      ls.factorize(sys);
      rhs = source_at(m) - D.matrix() * vpred - c2 * (stiff.matrix() * upred);
      qdd = ls.solve(rhs);
    }
    qd = vpred + kGamma * dt * qdd;
    q = upred + kBeta * dt * dt * qdd;
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(q[i]))
        throw BlowUpError("non-finite adjoint iterate at reversed step " +
                          std::to_string(m));
    ptraj[N - m] = to_std(q);
    dptraj[N - m] = to_std(Vec(-qd));
  }

  AdjointSolution adj;
  adj.time = state.time;
  adj.p = std::move(ptraj);
  adj.dp = std::move(dptraj);
  (void)T;
  (void)opts;
  return adj;
}

double boundary_amplitude_gradient(const FeSpace& space, const AdjointSolution& adj,
                                   const BoundaryExcitation& unit_excitation,
                                   const ModelParams& params) {
  const double c2 = params.c * params.c;
  const int N = static_cast<int>(adj.time.size()) - 1;
  const double dt = adj.time[1] - adj.time[0];
  double total = 0.0;
  for (int s = 0; s <= N; ++s) {
    const double tau = (s == 0 || s == N) ? 0.5 * dt : dt;
    const double t = adj.time[s];
    double bsum = 0.0;
    for (int e = 0; e < space.n_bedges(); ++e) {
      const double w = space.edge_qweight(e);
      for (int q = 0; q < FeSpace::kEdgeQ; ++q) {
        const int idx = e * FeSpace::kEdgeQ + q;
        const double gval = unit_excitation.load(space.edge_qp[idx], t, c2, params.b);
        bsum += w * gval * space.edge_value_at(e, q, adj.p[s]);
      }
    }
    total += tau * bsum;
  }
  return total;
}

}  // namespace sonoshape

#include "sonoshape/optimize.hpp"

#include <cmath>
#include <cstring>

#include "sonoshape/errors.hpp"

namespace sonoshape {

std::uint64_t mesh_checksum(const Mesh& mesh) {
  // FNV-1a over the vertex coordinate bytes
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&h](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& v : mesh.vertices) {
    feed(v.x);
    feed(v.y);
  }
  return h;
}

OptimizationHistory run_optimization(const ProblemSetup& setup,
                                     const OptimizationOptions& opts) {
  OptimizationHistory history;
  ProblemSetup current = setup;

  for (int iter = 0; iter < opts.max_iters + 1; ++iter) {
    const FeSpace space = make_space(current.mesh);
    const BoundaryGeometry bg = compute_boundary_geometry(current.mesh);
    const ForwardResult fwd = run_forward(space, current);

    IterationRecord row;
    row.iter = iter;
    row.J = fwd.J;
    row.degeneracy_margin = fwd.state.degeneracy_margin;
    row.mesh_checksum = mesh_checksum(current.mesh);

    if (iter == opts.max_iters) {
      history.rows.push_back(row);
      history.stop_reason = "max iterations";
      break;
    }

    const AdjointData data = adjoint_data(current.cost, fwd.state, current.params, space);
    const AdjointSolution adj = solve_adjoint(space, current.params, fwd.state,
                                              current.excitation, data, current.solve_opts);
    const BoundaryDensity density = shape_gradient_density(
        space, fwd.state, adj, current.excitation, current.params, bg);
    const DeformationField h =
        lift_descent_field(space, bg, density, current.cost, opts.smoothing_passes);
    const double dJh = shape_derivative(density, bg, h, &current.cost);
    row.dJ_direction = dJh;

    if (std::abs(dJh) < opts.grad_tol || fwd.J == 0.0) {
      history.rows.push_back(row);
      history.stop_reason = "gradient below tolerance";
      break;
    }
    if (dJh >= 0.0) {
      history.rows.push_back(row);
      history.stop_reason = "no descent direction";
      break;
    }

    // Armijo backtracking; trial objectives come from the transformed solve,
    // which coincides with the solve on the moved mesh for nodal fields.
    double d = opts.step0;
    bool accepted = false;
    double J_trial = fwd.J;
    int backtracks = 0;
    for (; backtracks <= opts.max_backtracks; ++backtracks) {
      try {
        const ForwardResult trial =
            run_forward_transformed(space, current, h, d, GradSource::ElementP1);
        if (trial.J <= fwd.J + opts.armijo_c1 * d * dJh) {
          accepted = true;
          J_trial = trial.J;
          break;
        }
      } catch (const DeformationError&) {
        // step too large for the diffeomorphism regime; shrink
      } catch (const DegeneracyError&) {
        // trial shape degenerates the model; shrink
      }
      d *= opts.backtrack;
    }
    row.backtracks = backtracks;

    if (!accepted) {
      history.rows.push_back(row);
      history.stop_reason = "line search failed";
      break;
    }
    if (d < opts.step_tol) {
      history.rows.push_back(row);
      history.stop_reason = "step below tolerance";
      break;
    }

    Mesh moved = push_forward_mesh(current.mesh, h, d);
    if (moved.min_angle_deg() < opts.min_angle_deg) {
      history.rows.push_back(row);
      history.stop_reason = "mesh quality limit";
      break;
    }
    row.step = d;
    history.rows.push_back(row);
    history.accepted_steps += 1;
    current.mesh = std::move(moved);
    (void)J_trial;
  }

  history.final_mesh = current.mesh;
  if (history.stop_reason.empty()) history.stop_reason = "max iterations";
  return history;
}

}  // namespace sonoshape

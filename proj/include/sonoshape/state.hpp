#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sonoshape/fem.hpp"
#include "sonoshape/model.hpp"

namespace sonoshape {

struct SolveOptions {
  double picard_tol = 1e-10;
  int picard_max = 25;
  double degeneracy_floor = 0.5;
  double blowup_factor = 1e6;
};

// Verification-only volumetric source; never used by optimization paths.
using VolumeSource = std::function<double(const Vec2&, double)>;

struct StateSolution {
  std::vector<double> time;                 // N+1 grid points
  std::vector<std::vector<double>> psi;     // per step, nodal
  std::vector<std::vector<double>> dpsi;
  std::vector<std::vector<double>> ddpsi;
  std::vector<double> energy;               // lower-order energy per step
  double degeneracy_margin = 1.0;           // min over nodes and steps of 1-2k*dpsi

  struct Stats {
    long picard_total = 0;
    long convective_assemblies = 0;
    int picard_worst = 0;
  } stats;

  int steps() const { return static_cast<int>(time.size()) - 1; }
  double dt() const { return time.size() > 1 ? time[1] - time[0] : 0.0; }
};

// Implicit Newmark (beta = 1/4, gamma = 1/2) time stepping with Picard
// iteration on the mass coefficient and the gradient nonlinearity. When
// `transform` is given all forms carry the pulled-back coefficients and the
// boundary data is evaluated at the mapped points.
StateSolution solve_state(const FeSpace& space, const ModelParams& params,
                          const BoundaryExcitation& g, std::span<const double> psi0,
                          std::span<const double> psi1,
                          const TransformFields* transform, double T, int steps,
                          const SolveOptions& opts = {},
                          const VolumeSource* source = nullptr);

// p = rho * dpsi
std::vector<std::vector<double>> acoustic_pressure(const StateSolution& sol,
                                                   const ModelParams& params);

// 1/2 ||dpsi||^2 + c^2/2 ||grad psi||^2 per step, by mass/stiffness quadrature
std::vector<double> energy_trace(const FeSpace& space, const StateSolution& sol,
                                 const ModelParams& params);

}  // namespace sonoshape

#pragma once

#include <vector>

#include "sonoshape/cost.hpp"
#include "sonoshape/fem.hpp"
#include "sonoshape/model.hpp"
#include "sonoshape/state.hpp"

namespace sonoshape {

// Source and final-time data of the linear backward problem induced by a
// cost functional at a given state.
struct AdjointData {
  std::vector<std::vector<double>> source;  // per step, nodal; empty = zero
  std::vector<double> p_final;              // p(T)
  std::vector<double> dp_final;             // dp/dt(T)
};

AdjointData adjoint_data(const CostFunctionalSpec& spec, const StateSolution& sol,
                         const ModelParams& params, const FeSpace& space);

struct AdjointSolution {
  std::vector<double> time;              // same grid as the state
  std::vector<std::vector<double>> p;    // forward-time ordering
  std::vector<std::vector<double>> dp;
};

// Solves the backward linear problem by reversing time, stepping the
// reversed system with the same Newmark scheme (one linear solve per step),
// and reversing back. The last snapshot reproduces the prescribed final
// data bit-for-bit.
//
// When `data_boundary_term` is set, the natural flux of the reversed
// (c^2, b)-stiffness is taken from the boundary condition via a boundary
// mass with coefficient 2*sigma*g instead of from the discrete state
// gradient implicit in the convective volume term. Both realizations agree
// at the discretization-error level; the default keeps the plain weak form.
AdjointSolution solve_adjoint(const FeSpace& space, const ModelParams& params,
                              const StateSolution& state, const BoundaryExcitation& g,
                              const AdjointData& data, const SolveOptions& opts = {},
                              bool data_boundary_term = false);

// Discrete duality pairing: derivative of the cost with respect to the
// amplitude of the boundary excitation,  int_0^T int_bnd (c^2 g_1 + b g_1,t) p,
// where g_1 is the unit-amplitude excitation.
double boundary_amplitude_gradient(const FeSpace& space, const AdjointSolution& adj,
                                   const BoundaryExcitation& unit_excitation,
                                   const ModelParams& params);

// In-place time reversal of a trajectory; applying it twice restores the
// original storage exactly.
void reverse_trajectory(std::vector<std::vector<double>>& traj);

}  // namespace sonoshape

#pragma once

#include "sonoshape/cost.hpp"
#include "sonoshape/fem.hpp"
#include "sonoshape/model.hpp"
#include "sonoshape/state.hpp"

namespace sonoshape {

// A complete forward problem: everything needed to solve the state equation
// on the current mesh and evaluate the objective. The potential field starts
// at rest. The excitation profile and the nodal cost data stay valid across
// mesh deformations because vertex identities are preserved.
struct ProblemSetup {
  Mesh mesh;
  ModelParams params;
  BoundaryExcitation excitation;
  CostFunctionalSpec cost;
  double T = 1.0;
  int steps = 100;
  SolveOptions solve_opts;
};

struct ForwardResult {
  StateSolution state;
  double J = 0.0;
};

// Solve on the reference configuration (no transform) and evaluate the cost.
ForwardResult run_forward(const FeSpace& space, const ProblemSetup& setup);

// Solve the transformed problem for the deformation d*h and evaluate the
// cost with the Jacobian volume weight.
ForwardResult run_forward_transformed(const FeSpace& space, const ProblemSetup& setup,
                                      const DeformationField& h, double d,
                                      GradSource source = GradSource::Auto);

}  // namespace sonoshape

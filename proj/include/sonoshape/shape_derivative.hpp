#pragma once

#include <functional>
#include <vector>

#include "sonoshape/adjoint.hpp"
#include "sonoshape/problem.hpp"

namespace sonoshape {

// Time-integrated boundary density rho(x); the shape derivative in a
// direction h is the arc-weighted pairing of rho with h.n. Corner-flagged
// vertices are excluded and carry zero weight.
struct BoundaryDensity {
  std::vector<double> value;   // per BoundaryGeometry local index
  std::vector<char> excluded;  // corner vertices
};

BoundaryDensity shape_gradient_density(const FeSpace& space, const StateSolution& state,
                                       const AdjointSolution& adj,
                                       const BoundaryExcitation& g,
                                       const ModelParams& params,
                                       const BoundaryGeometry& bg);

// Sum over boundary vertices of arc_weight * density * (h.n). When `guard`
// is given, tracking objectives reject fields touching the focal region.
double shape_derivative(const BoundaryDensity& density, const BoundaryGeometry& bg,
                        const DeformationField& h,
                        const CostFunctionalSpec* guard = nullptr);

// Pre-integration-by-parts (volume) representation of the same derivative;
// agreement with the boundary form is a discretization self-check.
double shape_derivative_volume(const FeSpace& space, const StateSolution& state,
                               const AdjointSolution& adj, const ModelParams& params,
                               const BoundaryExcitation& g, const BoundaryGeometry& bg,
                               const DeformationField& h,
                               GradSource source = GradSource::Auto);

// Scalar fields with analytic derivatives, for quadrature identities whose
// volume terms need second derivatives.
struct ScalarTestField {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> grad;
  std::function<Mat2(const Vec2&)> hess;  // may be empty when not needed
};

// Residual of the integration-by-parts identity relating the metric
// perturbation to transported gradients:
//   int a M grad(u).grad(v)
//     = int [ div(a grad u)(h.grad v) + div(a grad v)(h.grad u)
//             - (grad u.grad v)(h.grad a) ]
//       - int_bnd a (du/dn (h.grad v) + dv/dn (h.grad u))
//       + int_bnd a grad(u).grad(v) (h.n)
// with all integrals by mesh quadrature.
double lemma_identity_residual(const FeSpace& space, const ScalarTestField& a,
                               const ScalarTestField& u, const ScalarTestField& v,
                               const DeformationField& h);

struct TaylorResult {
  double J0 = 0.0;
  double dJ = 0.0;
  std::vector<double> d_values;
  std::vector<double> J_d;
  std::vector<double> remainder;  // |J_d - J0 - d*dJ|
  std::vector<double> order;      // slopes between consecutive d
  // finite-difference quotient at the smallest d vs dJ
  double fd_smallest = 0.0;
  double rel_gap_smallest = 0.0;
};

TaylorResult taylor_test(const ProblemSetup& setup, const DeformationField& h,
                         std::vector<double> d_values, int threads = 1,
                         GradSource source = GradSource::Auto);

// Descent direction from a gradient density: h = -smoothed(density) * n on
// the boundary, zero on the focal region, discrete-harmonic inside, sup-norm
// normalized to one.
DeformationField lift_descent_field(const FeSpace& space, const BoundaryGeometry& bg,
                                    const BoundaryDensity& density,
                                    const CostFunctionalSpec& cost,
                                    int smoothing_passes = 3);

}  // namespace sonoshape

#pragma once

#include <vector>

#include "sonoshape/fem.hpp"
#include "sonoshape/model.hpp"
#include "sonoshape/state.hpp"

namespace sonoshape {

enum class CostVariant { PotentialTracking, FinalTime, PressureTracking };

// One of the three objectives with its focal region, time window and target
// data. The nodal indicator chi is smoothed over one element layer by
// default; the sharp indicator stays available behind the flag.
struct CostFunctionalSpec {
  CostVariant variant = CostVariant::PotentialTracking;
  std::vector<int> focal_vertices;
  std::vector<double> chi;  // nodal, values in [0,1]
  double t0 = 0.0;
  double t1 = 0.0;
  // zero target when empty
  std::vector<double> target_snapshot;                // FinalTime
  std::vector<std::vector<double>> target_trajectory; // tracking variants

  void validate(const Mesh& mesh, double T) const;
};

CostFunctionalSpec make_focal_region(const Mesh& mesh, CostVariant variant,
                                     const Vec2& center, double radius, double t0,
                                     double t1, bool sharp_indicator = false);

// Composite-trapezoid weights over the grid points inside [t0, t1];
// zero outside the window.
std::vector<double> window_weights(const std::vector<double>& time, double t0, double t1);

double evaluate_cost(const FeSpace& space, const StateSolution& sol,
                     const CostFunctionalSpec& spec);

// Objective on a deformed configuration evaluated on the reference mesh with
// the Jacobian-determinant volume weight. Nodal targets are used unchanged,
// which matches the compact-support condition on the deformation (the map is
// the identity on the focal region).
double evaluate_cost_transformed(const FeSpace& space, const StateSolution& sol,
                                 const CostFunctionalSpec& spec,
                                 const TransformFields& transform);

// Whether a deformation field violates the support condition of a tracking
// objective (nonzero on the closure of the focal region).
bool deformation_touches_focal_region(const DeformationField& h,
                                      const CostFunctionalSpec& spec);

}  // namespace sonoshape

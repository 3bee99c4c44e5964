#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sonoshape/problem.hpp"
#include "sonoshape/shape_derivative.hpp"

namespace sonoshape {

struct OptimizationOptions {
  int max_iters = 10;
  double step0 = 0.25;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 20;
  double grad_tol = 1e-12;
  double step_tol = 1e-8;
  int smoothing_passes = 3;
  double min_angle_deg = 5.0;
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double dJ_direction = 0.0;  // derivative along the chosen descent field
  double step = 0.0;          // accepted step (0 when none)
  int backtracks = 0;
  double degeneracy_margin = 1.0;
  std::uint64_t mesh_checksum = 0;
};

struct OptimizationHistory {
  std::vector<IterationRecord> rows;
  Mesh final_mesh;
  std::string stop_reason;
  int accepted_steps = 0;
};

std::uint64_t mesh_checksum(const Mesh& mesh);

// Steepest-descent loop: state -> cost -> adjoint -> boundary density ->
// lifted direction -> Armijo backtracking on the transformed problem ->
// mesh pushforward. J is non-increasing across accepted iterations.
OptimizationHistory run_optimization(const ProblemSetup& setup,
                                     const OptimizationOptions& opts);

}  // namespace sonoshape

#include "sonoshape/problem.hpp"

namespace sonoshape {

ForwardResult run_forward(const FeSpace& space, const ProblemSetup& setup) {
  const std::vector<double> rest(space.dofs, 0.0);
  ForwardResult out;
  out.state = solve_state(space, setup.params, setup.excitation, rest, rest, nullptr,
                          setup.T, setup.steps, setup.solve_opts);
  out.J = evaluate_cost(space, out.state, setup.cost);
  return out;
}

ForwardResult run_forward_transformed(const FeSpace& space, const ProblemSetup& setup,
                                      const DeformationField& h, double d,
                                      GradSource source) {
  const TransformFields tf = build_transform_fields(space, h, d, source);
  const std::vector<double> rest(space.dofs, 0.0);
  ForwardResult out;
  out.state = solve_state(space, setup.params, setup.excitation, rest, rest, &tf,
                          setup.T, setup.steps, setup.solve_opts);
  out.J = evaluate_cost_transformed(space, out.state, setup.cost, tf);
  return out;
}

}  // namespace sonoshape

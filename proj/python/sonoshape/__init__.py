"""Time-domain nonlinear acoustics and adjoint shape optimization."""

from ._core import (
    DeformationField,
    Mesh,
    Problem,
    boundary_geometry,
    build_structured_mesh,
    eval_transform,
    load_problem,
    make_bump_field,
    problem_from_string,
    run_optimization,
    shape_gradient,
    solve_forward,
    taylor_test,
    __version__,
)

__all__ = [
    "DeformationField",
    "Mesh",
    "Problem",
    "boundary_geometry",
    "build_structured_mesh",
    "eval_transform",
    "load_problem",
    "make_bump_field",
    "problem_from_string",
    "run_optimization",
    "shape_gradient",
    "solve_forward",
    "taylor_test",
    "__version__",
]

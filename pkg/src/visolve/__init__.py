"""Stochastic Popov and projection methods for variational inequalities.

Library layout:
  operators      built-in stochastic operator families and their constants
  feasible_sets  projectable constraint sets
  schedules      stepsize rules and per-theorem presets
  solvers        iteration engines with trajectory recording and auditing
  diagnostics    property certification and theoretical bound evaluation
  experiments    multi-seed experiment orchestration with CSV output
  cli            command-line entry point (``visolve``)
"""

from . import cli, diagnostics, experiments, feasible_sets, operators, schedules, solvers
from .diagnostics import (
    BoundCurve,
    PropertyReport,
    bound_curve,
    bound_value,
    brute_force_solution,
    check_quasi_sharpness,
    estimate_linear_growth,
    find_monotonicity_violation,
)
from .experiments import (
    ExperimentConfig,
    RunSummary,
    load_config,
    noise_floor,
    preset_config,
    run_experiment,
    time_to_threshold,
)
from .feasible_sets import Ball, Box, WholeSpace
from .operators import (
    Constants,
    NoiseModel,
    OperatorInstance,
    SolutionSet,
    condition_number,
    eval_mean,
    make_example1,
    make_finite_sum_game,
    make_random_switched_quadratic,
    make_switched_quadratic,
    random_spd,
    sample_oracle,
)
from .schedules import Constant, DiminishingHarmonic, Switching, preset
from .solvers import (
    DivergenceError,
    Trajectory,
    dist_to_solution_sq,
    popov_step,
    projection_step,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BoundCurve",
    "Box",
    "Constant",
    "Constants",
    "DiminishingHarmonic",
    "DivergenceError",
    "ExperimentConfig",
    "NoiseModel",
    "OperatorInstance",
    "PropertyReport",
    "RunSummary",
    "SolutionSet",
    "Switching",
    "Trajectory",
    "WholeSpace",
    "bound_curve",
    "bound_value",
    "brute_force_solution",
    "check_quasi_sharpness",
    "cli",
    "condition_number",
    "diagnostics",
    "dist_to_solution_sq",
    "estimate_linear_growth",
    "eval_mean",
    "experiments",
    "feasible_sets",
    "find_monotonicity_violation",
    "load_config",
    "make_example1",
    "make_finite_sum_game",
    "make_random_switched_quadratic",
    "make_switched_quadratic",
    "noise_floor",
    "operators",
    "popov_step",
    "preset",
    "preset_config",
    "projection_step",
    "random_spd",
    "run",
    "run_experiment",
    "sample_oracle",
    "schedules",
    "solvers",
    "time_to_threshold",
]

"""Projected steepest descent for nonlinear inverse problems in Banach spaces."""

from ._projsd import (
    ConvexSet,
    DiagonalModel,
    Error,
    ForwardModel,
    LinearModel,
    QuadraticModel,
    SpaceGeometry,
    bregman_distance,
    bregman_project,
    compute_ctilde,
    contains,
    convergence_radius,
    duality_map,
    example_schedule,
    example_tau_bound,
    inverse_duality_map,
    norm,
    run,
    run_config,
)

__all__ = [
    "ConvexSet",
    "DiagonalModel",
    "Error",
    "ForwardModel",
    "LinearModel",
    "QuadraticModel",
    "SpaceGeometry",
    "bregman_distance",
    "bregman_project",
    "compute_ctilde",
    "contains",
    "convergence_radius",
    "duality_map",
    "example_schedule",
    "example_tau_bound",
    "inverse_duality_map",
    "norm",
    "run",
    "run_config",
]

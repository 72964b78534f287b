"""Python bindings for the nodal_lab C++ core."""

from ._nodal_lab import (
    BCType,
    ConfigError,
    DegenerateError,
    Domain2D,
    EigenPair,
    Error,
    ExperimentConfig,
    GridError,
    LiftedPair,
    NodalSet,
    OutOfSupportError,
    ScalarField2D,
    SolverError,
    build_grid,
    crofton_length,
    extract_nodal,
    frequency_profile,
    lift_pair,
    navier_mode,
    nodal_length,
    solve_modes,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]

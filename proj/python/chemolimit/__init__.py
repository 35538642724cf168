"""Relaxation-limit solvers for an indirect-signalling chemotaxis system."""

from ._core import (
    ConfigError,
    Error,
    FitRejected,
    Full,
    Grid,
    IdsLimit,
    InvalidArgument,
    NumericalError,
    PesLimit,
    SimulationError,
    chemotaxis_divergence,
    elliptic_solve,
    fit_rate,
    heat_semigroup,
    integrate,
    laplacian,
    norm_lp,
    norm_sobolev,
    run_sweep,
    simulate,
)
from .report import Report, read_report

__all__ = [
    "ConfigError",
    "Error",
    "FitRejected",
    "Full",
    "Grid",
    "IdsLimit",
    "InvalidArgument",
    "NumericalError",
    "PesLimit",
    "Report",
    "SimulationError",
    "chemotaxis_divergence",
    "elliptic_solve",
    "fit_rate",
    "heat_semigroup",
    "integrate",
    "laplacian",
    "norm_lp",
    "norm_sobolev",
    "read_report",
    "run_sweep",
    "simulate",
]

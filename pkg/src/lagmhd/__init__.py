"""Planar compressible MHD in Lagrangian mass coordinates, with a harness
that monitors the a priori estimates along discrete trajectories."""

from .core import DomainKind, Grid, Params, ProblemType, State, gaussian_profile, make_grid, make_state
from .functionals import entropy_roots, lyapunov_report, measure_bound
from .harness import run_harness
from .solver import PositivityBreach, SchemeConfig, run, step
from .stencil import SolverBreakdown

__all__ = [
    "DomainKind",
    "Grid",
    "Params",
    "PositivityBreach",
    "ProblemType",
    "SchemeConfig",
    "SolverBreakdown",
    "State",
    "entropy_roots",
    "gaussian_profile",
    "lyapunov_report",
    "make_grid",
    "make_state",
    "measure_bound",
    "run",
    "run_harness",
    "step",
]

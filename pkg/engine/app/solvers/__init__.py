"""
Module Solveurs
Intégration DHW (solveur principal) et oracle QVE (polarisation linéaire).
"""

from .base_solver import (
    H9Variant,
    NonFiniteState,
    NotLinearlyPolarized,
    PointResult,
    SolverError,
    SolverOptions,
    StepLimitExceeded,
    StepSizeUnderflow,
    time_window,
)
from .dhw import DHWState, dhw_rhs, dhw_rhs_matrix, final_state, h9_matrix, solve_point
from .qve import QVEState, qve_rhs, qve_solve_point

__all__ = [
    "DHWState",
    "H9Variant",
    "NonFiniteState",
    "NotLinearlyPolarized",
    "PointResult",
    "QVEState",
    "SolverError",
    "SolverOptions",
    "StepLimitExceeded",
    "StepSizeUnderflow",
    "dhw_rhs",
    "dhw_rhs_matrix",
    "final_state",
    "h9_matrix",
    "qve_rhs",
    "qve_solve_point",
    "solve_point",
    "time_window",
]

"""Numerical laboratory for traveling wavefronts of the delayed KPP-Fisher equation

    u_t = u_xx + u(t, x) * (1 - u(t - tau, x)),

studied through the profile equation phi'' - c phi' + phi(t)(1 - phi(t - h)) = 0
with scaled lag h = c*tau.  The package computes characteristic roots and
critical-speed curves, a priori bounds from a one-dimensional map with negative
Schwarzian, monotone and oscillating wave profiles via integral-operator
iteration, profile-shape classification, and an independent method-of-lines
simulation of the full equation.
"""

from .domain import (
    Params,
    GridProfile,
    LogProfile,
    TailModel,
    RightTail,
    to_log_profile,
)
from .errors import (
    KppError,
    AdmissibilityError,
    DomainError,
    GridError,
    TailError,
    ConvergenceError,
    ConeError,
    BracketError,
    RootSearchError,
    FitError,
)

__version__ = "0.1.0"

__all__ = [
    "Params",
    "GridProfile",
    "LogProfile",
    "TailModel",
    "RightTail",
    "to_log_profile",
    "KppError",
    "AdmissibilityError",
    "DomainError",
    "GridError",
    "TailError",
    "ConvergenceError",
    "ConeError",
    "BracketError",
    "RootSearchError",
    "FitError",
    "__version__",
]

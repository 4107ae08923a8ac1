"""Traveling fronts of lattice KPP equations in locally perturbed media.

Dispersion constants, lattice heat kernels, truncated and twisted
eigenproblems, a front constructor built from super- and sub-solutions,
front diagnostics and a parabolic Harnack check.
"""
from ._kernels import BACKEND
from .dispersion import DispersionSummary, c_of_mu, lambda_of_mu, mu_of_speed, solve_dispersion, zeta
from .errors import (
    ConfigError,
    ConstructionError,
    ConvergenceError,
    DomainError,
    IntegratorError,
    LatKPPError,
    TruncationError,
)
from .medium import MediumProfile, NonlinearityModel
from .state import LatticeState

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConstructionError",
    "ConvergenceError",
    "DispersionSummary",
    "DomainError",
    "IntegratorError",
    "LatKPPError",
    "LatticeState",
    "MediumProfile",
    "NonlinearityModel",
    "TruncationError",
    "c_of_mu",
    "lambda_of_mu",
    "mu_of_speed",
    "solve_dispersion",
    "zeta",
]

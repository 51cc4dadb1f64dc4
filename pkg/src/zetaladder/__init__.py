"""Finite-tau numerics for Jacob's-ladder functionals of the Riemann zeta function."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceeded,
    ConfigError,
    CoverageError,
    DivisionDegenerate,
    DomainError,
    IllConditioned,
    MissingConstant,
    SolverError,
    ZetaLadderError,
)
from .special_functions import DEFAULT_POLICY, Constants, PrecisionPolicy, hardy_Z, rs_theta, zeta_on_sigma  # noqa: E402

__all__ = [
    "__version__",
    "BudgetExceeded",
    "ConfigError",
    "Constants",
    "CoverageError",
    "DEFAULT_POLICY",
    "DivisionDegenerate",
    "DomainError",
    "IllConditioned",
    "MissingConstant",
    "PrecisionPolicy",
    "SolverError",
    "ZetaLadderError",
    "hardy_Z",
    "rs_theta",
    "zeta_on_sigma",
]

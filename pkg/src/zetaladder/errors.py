"""Exception hierarchy shared by all numeric kernels."""

from __future__ import annotations


class ZetaLadderError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"


class DomainError(ZetaLadderError, ValueError):
    code = "domain_error"


class BudgetExceeded(ZetaLadderError):
    code = "budget_exceeded"


class CoverageError(ZetaLadderError):
    code = "coverage_error"


class SolverError(ZetaLadderError):
    code = "solver_error"


class DivisionDegenerate(ZetaLadderError):
    code = "division_degenerate"


class MissingConstant(ZetaLadderError):
    code = "missing_constant"


class IllConditioned(ZetaLadderError):
    code = "ill_conditioned"


class ConfigError(ZetaLadderError, ValueError):
    code = "config_error"

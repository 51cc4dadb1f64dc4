"""Reverse iterates of the Jacob's ladder and the partition properties of [T, T^k].

The ladder itself is not constructed. A reverse step T^{r-1} -> T^r is
defined operationally by the almost-linear increment law

    integral over [T^{r-1}, T^r] of Z(t)^2 dt = (1 - c) T^{r-1}

("integral" mode), or by the same law with the integral replaced by the
closed-form main term J(T) = T ln(T / 2 pi) - T ("asymptotic" mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .errors import DomainError, SolverError
from .quadrature import CRIT2, MomentCache, moment_integral
from .special_functions import DEFAULT_POLICY, EULER_GAMMA, PrecisionPolicy

MODES = ("integral", "asymptotic")
DEFAULT_T0 = 100.0
MAX_K = 10
ROOT_RTOL = 1e-10
BRACKET_GROWTH = 1.5
BRACKET_CAP = 10.0


@dataclass(frozen=True)
class LadderSequence:
    base_T: float
    iterates: tuple
    mode: str
    increments: tuple = field(init=False)
    residuals: tuple = ()

    def __post_init__(self):
        its = tuple(float(v) for v in self.iterates)
        object.__setattr__(self, "iterates", its)
        object.__setattr__(self, "increments", tuple(b - a for a, b in zip(its[:-1], its[1:])))
        if any(d <= 0 for d in self.increments):
            raise DomainError("ladder iterates must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.iterates) - 1


def main_term_increment(lower: float, upper: float) -> float:
    """J(upper) - J(lower) for J(T) = T ln(T / 2 pi) - T, without cancellation."""
    return (upper - lower) * (math.log(lower / (2.0 * math.pi)) - 1.0) + upper * math.log1p((upper - lower) / lower)


def _step_residual(mode, lower, policy, cache, euler_c):
    target = (1.0 - euler_c) * lower
    if mode == "asymptotic":
        return lambda u: main_term_increment(lower, u) - target
    return lambda u: moment_integral(lower, u, CRIT2, policy, cache=cache).value - target


def _solve_step(mode, lower, policy, cache, euler_c):
    f = _step_residual(mode, lower, policy, cache, euler_c)
    lo, hi = lower, lower * BRACKET_GROWTH
    f_hi = f(hi)
    while f_hi <= 0:
        lo = hi
        hi *= BRACKET_GROWTH
        if hi > BRACKET_CAP * lower:
            raise SolverError(f"no bracket for the reverse step from T={lower} within {BRACKET_CAP}x")
        f_hi = f(hi)
    root = brentq(f, lo, hi, xtol=ROOT_RTOL * lower, rtol=1e-15, maxiter=200)
    return root, f(root)


def reverse_iterate(
    T: float,
    k: int,
    mode: str = "asymptotic",
    policy: PrecisionPolicy = DEFAULT_POLICY,
    *,
    T0: float = DEFAULT_T0,
    euler_c: float = EULER_GAMMA,
    cache: MomentCache | None = None,
) -> LadderSequence:
    """T, T^1, ..., T^k for the chosen step definition."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    if T < T0:
        raise DomainError(f"T={T} below T0={T0}")
    if not 0 <= k <= MAX_K:
        raise DomainError(f"k={k} outside [0, {MAX_K}]")
    its = [float(T)]
    res = []
    for _ in range(k):
        root, r = _solve_step(mode, its[-1], policy, cache, euler_c)
        its.append(root)
        res.append(r)
    return LadderSequence(base_T=float(T), iterates=tuple(its), mode=mode, residuals=tuple(res))


def reverse_step(T: float, mode: str = "asymptotic", policy: PrecisionPolicy = DEFAULT_POLICY, **kw) -> float:
    """The first reverse iterate of T (the [.]^1 bracket)."""
    return reverse_iterate(T, 1, mode, policy, **kw).iterates[1]


@dataclass(frozen=True)
class PartitionReport:
    equidistance_defect: float
    increment_defect: float
    increment_ratios: tuple  # increments / ((1 - c) T / ln T)
    segment_integrals: tuple
    length_partition_defect: float
    integral_partition_defect: float


def check_partition_properties(
    seq: LadderSequence,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    *,
    euler_c: float = EULER_GAMMA,
    cache: MomentCache | None = None,
) -> PartitionReport:
    """Equidistance of the partition of [T, T^k] and equality of the integral parts."""
    if seq.k < 2:
        raise DomainError("partition properties need k >= 2")
    its, inc = seq.iterates, seq.increments
    equi = max(abs(inc[r] / inc[r + 1] - 1.0) for r in range(len(inc) - 1))
    parts = [moment_integral(a, b, CRIT2, policy, cache=cache).value for a, b in zip(its[:-1], its[1:])]
    eq_int = max(abs(parts[r] / parts[r + 1] - 1.0) for r in range(len(parts) - 1))
    T = seq.base_T
    scale = (1.0 - euler_c) * T / math.log(T)
    whole = moment_integral(its[0], its[-1], CRIT2, policy, cache=cache).value
    return PartitionReport(
        equidistance_defect=equi,
        increment_defect=eq_int,
        increment_ratios=tuple(d / scale for d in inc),
        segment_integrals=tuple(parts),
        length_partition_defect=abs(sum(inc) - (its[-1] - its[0])),
        integral_partition_defect=abs(sum(parts) - whole) / whole,
    )

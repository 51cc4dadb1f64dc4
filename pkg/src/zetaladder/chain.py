"""The seven-member equivalence chain at finite tau and distinctness experiments.

Members (row order of :class:`ChainReport`):

0. basic state: integral of Z^2 over one ladder step from x tau / (1 - c)
1. cross-breed composition at x
2. divisor sum over the same step
3. pi times the Gram-point sum over the same step
4. ln Gamma(upper) - ln Gamma(lower)
5. integral of |zeta(sigma+it)|^2 over [1, x tau / zeta(2 sigma)]
6. integral of |S_1|^(2l) over [0, x tau / cbar(l)]

Raw values are stored (each is asymptotic to x tau), never divided by tau.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ZetaLadderError
from .functionals import (
    Settings,
    crossbreed_functional,
    divisor_sum_functional,
    extrapolate_inverse_log,
    functional_F1,
    gamma_ratio_functional,
    s1_moment_functional,
    sigma_moment_functional,
    tnu_sum_functional,
)

MEMBERS = ("basic_state", "crossbreed", "divisor_sum", "pi_tnu_sum", "log_gamma_ratio", "sigma_moment", "s1_moment")
CHAIN_MODE = "integral"
SEPARATION_FACTOR = 3.0
FAMILY_THRESHOLD = 0.1
DEFAULT_ALPHA = 2.0


def _member_values(x, sigma, l, tau, coeffs, mode, st) -> list:
    """Raw member values at one tau; a failing member becomes its error object."""
    jobs = (
        lambda: functional_F1(x, tau, mode, st).value,
        lambda: crossbreed_functional(x, sigma, tau, coeffs, mode, st).value,
        lambda: divisor_sum_functional(x, tau, mode, st).value,
        lambda: math.pi * tnu_sum_functional(x, tau, mode, st).value,
        lambda: gamma_ratio_functional(x, tau, mode, st).value,
        lambda: sigma_moment_functional(x, sigma, tau, st).value,
        lambda: s1_moment_functional(x, l, tau, st).value,
    )
    out = []
    for job in jobs:
        try:
            out.append(job() * tau)
        except ZetaLadderError as exc:
            out.append(exc)
    return out


def _fit_slope(taus, devs) -> float:
    """Exponent p in |ratio - 1| = beta (1/ln tau)^p by log-log regression."""
    taus = np.asarray(taus, dtype=float)
    devs = np.asarray(devs, dtype=float)
    ok = np.isfinite(devs) & (devs > 0)
    if ok.sum() < 2:
        return math.nan
    u = np.log(1.0 / np.log(taus[ok]))
    p, _ = np.polyfit(u, np.log(devs[ok]), 1)
    return float(p)


@dataclass
class ChainReport:
    x: float
    sigma: float
    l: int
    tau_grid: list
    mode: str
    members: list  # member x tau, float or None where the cell failed
    ratios: list
    slopes: list
    errors: list = field(default_factory=list)  # {"member", "tau", "code", "message"}

    def completed_members(self) -> list:
        return [name for name, row in zip(MEMBERS, self.members) if all(v is not None for v in row)]

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "sigma": self.sigma,
            "l": self.l,
            "tau_grid": list(self.tau_grid),
            "mode": self.mode,
            "members": {name: list(row) for name, row in zip(MEMBERS, self.members)},
            "ratios": {name: list(row) for name, row in zip(MEMBERS, self.ratios)},
            "slopes": {name: s for name, s in zip(MEMBERS, self.slopes)},
            "errors": list(self.errors),
        }

    def to_csv(self) -> str:
        """One row per tau; a failed cell holds its error code."""
        codes = {(e["member"], e["tau"]): e["code"] for e in self.errors}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", *MEMBERS, *(f"ratio_{m}" for m in MEMBERS)])
        for j, tau in enumerate(self.tau_grid):
            vals = [self.members[i][j] for i in range(len(MEMBERS))]
            rats = [self.ratios[i][j] for i in range(len(MEMBERS))]
            cells = [repr(v) if v is not None else codes.get((MEMBERS[i], tau), "error") for i, v in enumerate(vals)]
            rcells = [repr(v) if v is not None else "error" for v in rats]
            w.writerow([repr(tau), *cells, *rcells])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def evaluate_chain(
    x: float,
    sigma: float,
    l: int,
    tau_grid,
    mode: str = CHAIN_MODE,
    settings: Settings | None = None,
    coeffs=None,
) -> ChainReport:
    """All seven members over the tau grid, with ratios to the basic state."""
    st = settings if settings is not None else Settings()
    taus = [float(t) for t in tau_grid]
    if not taus:
        raise DomainError("tau grid is empty")
    if any(t <= 0 for t in taus) or any(b <= a for a, b in zip(taus[:-1], taus[1:])):
        raise DomainError("tau grid must be positive and strictly ascending")
    n = len(MEMBERS)
    members = [[None] * len(taus) for _ in range(n)]
    errors = []
    for j, tau in enumerate(taus):
        for i, v in enumerate(_member_values(x, sigma, l, tau, coeffs, mode, st)):
            if isinstance(v, Exception):
                errors.append({"member": MEMBERS[i], "tau": tau, "code": v.code, "message": str(v)})
            elif not (math.isfinite(v) and v > 0):
                errors.append({"member": MEMBERS[i], "tau": tau, "code": "nonpositive", "message": repr(v)})
            else:
                members[i][j] = float(v)
    ratios = [[None] * len(taus) for _ in range(n)]
    for j in range(len(taus)):
        base = members[0][j]
        if base is None:
            continue
        ratios[0][j] = 1.0
        for i in range(1, n):
            if members[i][j] is not None:
                ratios[i][j] = members[i][j] / base
    slopes = [
        _fit_slope(taus, [abs(r - 1.0) if r is not None else math.nan for r in row]) for row in ratios
    ]
    return ChainReport(float(x), float(sigma), int(l), taus, mode, members, ratios, slopes, errors)


@dataclass
class DistinctnessResult:
    x1: float
    x2: float
    tau_grid: list
    ratios: list  # basic state at x2 / basic state at x1
    limit: float
    fit_error: float
    separated: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def distinctness_experiment(
    x1: float,
    x2: float,
    tau_grid,
    mode: str = CHAIN_MODE,
    settings: Settings | None = None,
    *,
    alpha: float = DEFAULT_ALPHA,
) -> DistinctnessResult:
    """Quotient of the basic states at x2 and x1 per tau, with an extrapolated limit."""
    if not alpha > 1:
        raise DomainError("alpha must exceed 1")
    for v in (x1, x2):
        if not 1.0 <= v <= alpha:
            raise DomainError(f"x={v} outside [1, alpha={alpha}]")
    st = settings if settings is not None else Settings()
    taus = [float(t) for t in tau_grid]
    ratios = []
    for tau in taus:
        a = functional_F1(x1, tau, mode, st).value
        b = a if x2 == x1 else functional_F1(x2, tau, mode, st).value
        ratios.append(b / a)
    if x1 == x2:
        return DistinctnessResult(float(x1), float(x2), taus, ratios, 1.0, 0.0, False)
    if len(taus) >= 2:
        ext = extrapolate_inverse_log(taus, ratios)
        limit, err = ext.limit, ext.fit_error
    else:
        limit, err = ratios[0], 0.0
    separated = abs(limit - 1.0) > SEPARATION_FACTOR * err
    return DistinctnessResult(float(x1), float(x2), taus, ratios, limit, err, separated)


@dataclass
class FamilyComparison:
    x_list: list
    tau: float
    separated: list  # square boolean matrix
    log_ratios: list  # min over members of |ln(member(x_j) / member(x_i))|
    reports: list = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {"x_list": self.x_list, "tau": self.tau, "separated": self.separated, "log_ratios": self.log_ratios}


def chain_family_compare(
    x_list,
    sigma: float,
    l: int,
    tau: float,
    mode: str = CHAIN_MODE,
    settings: Settings | None = None,
    coeffs=None,
    *,
    threshold: float = FAMILY_THRESHOLD,
) -> FamilyComparison:
    """Pairwise distinctness of chains: every completed member must differ by more than ``threshold``.

    The test uses |ln(ratio)| so that a pair and its reverse are flagged
    identically and the matrix is symmetric.
    """
    xs = [float(v) for v in x_list]
    st = settings if settings is not None else Settings()
    reps = {}
    for v in xs:
        if v not in reps:
            reps[v] = evaluate_chain(v, sigma, l, [tau], mode, st, coeffs)
    cut = math.log1p(threshold)
    n = len(xs)
    sep = [[False] * n for _ in range(n)]
    logr = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a, b = reps[xs[i]].members, reps[xs[j]].members
            d = [abs(math.log(rb[0] / ra[0])) for ra, rb in zip(a, b) if ra[0] is not None and rb[0] is not None]
            m = min(d) if d else 0.0
            logr[i][j] = logr[j][i] = m
            sep[i][j] = sep[j][i] = bool(d) and m > cut
    return FamilyComparison(xs, float(tau), sep, logr, [reps[v] for v in xs])

"""Moment integrals of |Z|^2, |Z|^4, |zeta(sigma+it)|^2 and |S_1|^{2l}.

Intervals are cut at a fixed global block grid (multiples of
``BLOCK_WIDTH``); each block is covered by equal-width panels no wider than
half the local mean zero spacing. Every panel is integrated by 15-point
Gauss-Legendre and again by 15-point Gauss-Legendre on its two halves; the
difference is the panel error estimate. Because panel widths are equal
within a block, each of the 45 node positions forms an equispaced grid, which
the grid evaluators in :mod:`special_functions` exploit.

Whole blocks are memoised in an optional :class:`MomentCache`; results are
reduced left to right so they are bit-stable for a fixed policy.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BudgetExceeded, CoverageError, DomainError
from .special_functions import (
    DEFAULT_POLICY,
    PrecisionPolicy,
    hardy_z_array,
    hardy_z_grid,
    zeta_array,
    zeta_grid,
)
from .zeros import S1_of_t, ZeroTable, mean_zero_spacing

BLOCK_WIDTH = 50.0
MAX_PANEL = 1.0
GL_ORDER = 15
S1_EVAL_ERR = 1e-9
_EPS = np.finfo(float).eps

_X, _W = np.polynomial.legendre.leggauss(GL_ORDER)
# node offsets inside a unit panel: 15 full-panel nodes, then 2 x 15 half-panel nodes
_FULL = 0.5 * (_X + 1.0)
_HALF = np.concatenate([0.25 * (_X + 1.0), 0.5 + 0.25 * (_X + 1.0)])


@dataclass(frozen=True)
class IntegrandKind:
    """Which nonnegative integrand to integrate: crit2, crit4, sigma2 or s1_2l."""

    name: str
    sigma: float | None = None
    l: int | None = None

    @property
    def power(self) -> int:
        if self.name == "crit2" or self.name == "sigma2":
            return 2
        if self.name == "crit4":
            return 4
        return 2 * int(self.l)

    def key(self) -> str:
        if self.name == "sigma2":
            return f"sigma2({self.sigma!r})"
        if self.name == "s1_2l":
            return f"s1_2l({self.l})"
        return self.name


CRIT2 = IntegrandKind("crit2")
CRIT4 = IntegrandKind("crit4")


def sigma2(sigma: float) -> IntegrandKind:
    return IntegrandKind("sigma2", sigma=float(sigma))


def s1_2l(l: int) -> IntegrandKind:
    return IntegrandKind("s1_2l", l=int(l))


@dataclass(frozen=True)
class MomentRecord:
    lower: float
    upper: float
    power: int
    value: float
    err_estimate: float
    evaluations: int
    kind: str = "crit2"

    def to_dict(self) -> dict:
        return asdict(self)


class MomentCache:
    """In-memory store of whole-block results, optionally backed by a dict-like store.

    ``backing`` needs ``get(key)`` and ``__setitem__``; the CLI passes its
    on-disk cache here.
    """

    def __init__(self, backing=None):
        self._mem: dict = {}
        self._backing = backing

    def get(self, key):
        hit = self._mem.get(key)
        if hit is None and self._backing is not None:
            hit = self._backing.get(key)
            if hit is not None:
                hit = tuple(hit)
                self._mem[key] = hit
        return hit

    def put(self, key, value):
        self._mem[key] = value
        if self._backing is not None:
            self._backing[key] = list(value)

    def __len__(self):
        return len(self._mem)


# ---------------------------------------------------------------------------
# integrand evaluation


def _values_at(kind: IntegrandKind, t: np.ndarray, policy: PrecisionPolicy, table: ZeroTable | None) -> np.ndarray:
    if kind.name == "crit2":
        return hardy_z_array(t, policy) ** 2
    if kind.name == "crit4":
        return hardy_z_array(t, policy) ** 4
    if kind.name == "sigma2":
        return np.abs(zeta_array(kind.sigma, t, policy)) ** 2
    return np.abs(S1_of_t(t, table, policy)) ** kind.power


def _values_on_grid(kind: IntegrandKind, t0: float, h: float, m: int, policy: PrecisionPolicy) -> np.ndarray:
    if kind.name == "crit2":
        return hardy_z_grid(t0, h, m, policy) ** 2
    if kind.name == "crit4":
        return hardy_z_grid(t0, h, m, policy) ** 4
    return np.abs(zeta_grid(kind.sigma, t0, h, m, policy)) ** 2


def _eval_error_bound(kind: IntegrandKind, fmax: float, policy: PrecisionPolicy) -> float:
    """Bound on the integrand error caused by the abs_tol of the scalar kernel."""
    p = kind.power
    base = fmax ** (1.0 / p) if fmax > 0 else 0.0
    tol = S1_EVAL_ERR if kind.name == "s1_2l" else policy.abs_tol
    return p * base ** (p - 1) * tol


# ---------------------------------------------------------------------------
# panel rules


def _panel_pair(f_full: np.ndarray, f_half: np.ndarray, width: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    coarse = 0.5 * width * (f_full @ _W)
    fine = 0.25 * width * (f_half[:, :GL_ORDER] @ _W + f_half[:, GL_ORDER:] @ _W)
    return fine, np.abs(fine - coarse)


def _refine(kind, a, b, depth, tol, policy, table):
    """Recursive bisection of one panel until its error estimate meets tol."""
    t = a + (b - a) * np.concatenate([_FULL, _HALF])
    f = _values_at(kind, t, policy, table)
    val, err = _panel_pair(f[None, :GL_ORDER], f[None, GL_ORDER:], np.array([b - a]))
    val, err = float(val[0]), float(err[0])
    evals = t.size
    if err <= tol:
        return val, err, evals
    if depth <= 0:
        raise BudgetExceeded(f"panel [{a}, {b}] did not reach tolerance at max_panel_depth")
    mid = 0.5 * (a + b)
    v1, e1, n1 = _refine(kind, a, mid, depth - 1, 0.5 * tol, policy, table)
    v2, e2, n2 = _refine(kind, mid, b, depth - 1, 0.5 * tol, policy, table)
    return v1 + v2, e1 + e2, evals + n1 + n2


def _panel_edges(a: float, b: float, kind: IntegrandKind, table: ZeroTable | None) -> np.ndarray:
    """Panel boundaries for [a, b]; S_1 panels also break at zeros (kinks of S_1)."""
    w_max = min(MAX_PANEL, 0.5 * float(mean_zero_spacing(max(b, 1.0))))
    if kind.name != "s1_2l":
        n = max(1, int(math.ceil((b - a) / w_max - 1e-12)))
        return a + (b - a) * np.arange(n + 1) / n
    z = table.zeros
    inner = z[(z > a) & (z < b)]
    cuts = np.concatenate([[a], inner, [b]])
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(math.ceil((hi - lo) / w_max - 1e-12)))
        pieces.append(lo + (hi - lo) * np.arange(n) / n)
    pieces.append(np.array([b]))
    return np.concatenate(pieces)


def _integrate_block(kind, a, b, policy, table) -> tuple[float, float, int]:
    edges = _panel_edges(a, b, kind, table)
    width = np.diff(edges)
    n = width.size
    if kind.name == "s1_2l":
        nodes = edges[:-1, None] + width[:, None] * np.concatenate([_FULL, _HALF])[None, :]
        f = _values_at(kind, nodes.ravel(), policy, table).reshape(nodes.shape)
        f_full, f_half = f[:, :GL_ORDER], f[:, GL_ORDER:]
    else:
        h = float(width[0])
        f_full = np.empty((n, GL_ORDER))
        f_half = np.empty((n, 2 * GL_ORDER))
        for k, off in enumerate(_FULL):
            f_full[:, k] = _values_on_grid(kind, a + off * h, h, n, policy)
        for k, off in enumerate(_HALF):
            f_half[:, k] = _values_on_grid(kind, a + off * h, h, n, policy)
    evals = 3 * GL_ORDER * n
    vals, errs = _panel_pair(f_full, f_half, width)
    total = float(np.sum(vals))
    budget = policy.rel_tol * abs(total)
    if float(np.sum(errs)) > budget:
        share = budget * width / (b - a)
        for i in np.nonzero(errs > share)[0]:
            v, e, ne = _refine(kind, edges[i], edges[i + 1], policy.max_panel_depth, share[i], policy, table)
            vals[i], errs[i] = v, e
            evals += ne
        total = float(np.sum(vals))
    fmax = float(max(np.max(f_full), np.max(f_half)))
    err = float(np.sum(errs)) + (b - a) * _eval_error_bound(kind, fmax, policy) + 64 * _EPS * abs(total) * math.sqrt(n)
    return total, err, evals


def _block_key(kind: IntegrandKind, a: float, b: float, policy: PrecisionPolicy) -> str:
    p = policy
    return f"{kind.key()}|{a!r}|{b!r}|{p.abs_tol!r}|{p.rel_tol!r}|{p.max_series_terms}|{p.max_panel_depth}"


def _validate(lower, upper, kind, table, epsilon):
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise DomainError("interval must be finite")
    if lower < 0 or upper < lower:
        raise DomainError(f"need 0 <= lower <= upper, got [{lower}, {upper}]")
    if kind.name == "sigma2" and not kind.sigma >= 0.5 + epsilon:
        raise DomainError(f"sigma={kind.sigma} below 1/2 + epsilon={0.5 + epsilon}")
    if kind.name == "sigma2" and kind.sigma == 1.0 and lower == 0.0 and upper > 0.0:
        raise DomainError("integral of |zeta(1+it)|^2 diverges at t = 0; start above 0")
    if kind.name == "s1_2l":
        if kind.l is None or kind.l < 1:
            raise DomainError("S_1 moment needs l >= 1")
        if table is None:
            raise CoverageError("S_1 moment needs a zero table")
        table.check(upper)
    if kind.name not in ("crit2", "crit4", "sigma2", "s1_2l"):
        raise DomainError(f"unknown integrand kind {kind.name!r}")


def moment_integral(
    lower: float,
    upper: float,
    kind: IntegrandKind,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    *,
    table: ZeroTable | None = None,
    cache: MomentCache | None = None,
    epsilon: float = 0.05,
) -> MomentRecord:
    """Integral of the chosen nonnegative integrand over [lower, upper]."""
    lower, upper = float(lower), float(upper)
    _validate(lower, upper, kind, table, epsilon)
    if upper == lower:
        return MomentRecord(lower, upper, kind.power, 0.0, 0.0, 0, kind.key())
    first = math.floor(lower / BLOCK_WIDTH)
    last = math.ceil(upper / BLOCK_WIDTH)
    value = err = 0.0
    evals = 0
    for blk in range(first, last):
        b0, b1 = blk * BLOCK_WIDTH, (blk + 1) * BLOCK_WIDTH
        a, b = max(b0, lower), min(b1, upper)
        if b <= a:
            continue
        whole = a == b0 and b == b1
        hit = cache.get(_block_key(kind, a, b, policy)) if (whole and cache is not None) else None
        if hit is None:
            hit = _integrate_block(kind, a, b, policy, table)
            if whole and cache is not None:
                cache.put(_block_key(kind, a, b, policy), hit)
        v, e, n = hit
        value += v
        err += e
        evals += int(n)
    return MomentRecord(lower, upper, kind.power, max(value, 0.0), err, evals, kind.key())


def second_moment_J(T: float, policy: PrecisionPolicy = DEFAULT_POLICY, *, cache: MomentCache | None = None) -> MomentRecord:
    """Hardy-Littlewood integral of |zeta(1/2+it)|^2 over [0, T]."""
    return moment_integral(0.0, T, CRIT2, policy, cache=cache)


def fourth_moment(T: float, policy: PrecisionPolicy = DEFAULT_POLICY, *, cache: MomentCache | None = None) -> MomentRecord:
    """Integral of |zeta(1/2+it)|^4 over [0, T]."""
    return moment_integral(0.0, T, CRIT4, policy, cache=cache)


def second_moment_main_term(T: float) -> float:
    """Classical main term T ln(T / 2 pi) - T."""
    return T * math.log(T / (2.0 * math.pi)) - T if T > 0 else 0.0

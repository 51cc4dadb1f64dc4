"""Critical-line zeros, Gram points, S(t) and S_1(t).

Zeros are isolated by scanning Z on a grid finer than a quarter of the mean
zero spacing, probing local minima of |Z| for hidden sign-change pairs, and
refining every bracket by bisection. S_1 is the integral of
S(t) = N(t) - 1 - theta(t)/pi, accumulated segment by segment between zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import lambertw

from .errors import CoverageError, DomainError
from .special_functions import (
    DEFAULT_POLICY,
    TWO_PI,
    PrecisionPolicy,
    hardy_z_array,
    hardy_z_grid,
    rs_theta,
    rs_theta_prime,
)

ZERO_TOL = 1e-10
SCAN_FRACTION = 8  # grid step = mean spacing / SCAN_FRACTION
SCAN_BLOCK = 200.0
PROBE_POINTS = 64
COUNT_TOL = 2.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)


def mean_zero_spacing(t):
    """2 pi / ln(t / 2 pi), floored for small t where the formula breaks down."""
    t = np.asarray(t, dtype=float)
    return TWO_PI / np.log(np.maximum(t, 6.0 * math.pi) / TWO_PI)


@dataclass(frozen=True)
class ZeroTable:
    zeros: np.ndarray
    upper_bound: float
    _s1_at_zeros: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        z = np.asarray(self.zeros, dtype=float)
        if z.size > 1 and np.any(np.diff(z) <= 0):
            raise DomainError("zeros must be strictly increasing")
        if z.size and z[-1] > self.upper_bound:
            raise DomainError("zero beyond upper_bound")
        object.__setattr__(self, "zeros", z)

    def count(self, t) -> np.ndarray:
        """N(t): number of tabulated zeros with ordinate <= t."""
        return np.searchsorted(self.zeros, t, side="right")

    def s1_at_zeros(self) -> np.ndarray:
        """S_1 at the anchors 0, gamma_1, gamma_2, ... (length len(zeros) + 1)."""
        if self._s1_at_zeros is None:
            anchors = np.concatenate([[0.0], self.zeros])
            seg = _integrate_s_segments(anchors[:-1], anchors[1:], np.arange(anchors.size - 1))
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            object.__setattr__(self, "_s1_at_zeros", cum)
        return self._s1_at_zeros

    def check(self, t: float) -> None:
        if t > self.upper_bound:
            raise CoverageError(f"t={t} exceeds zero table coverage {self.upper_bound}")


@dataclass(frozen=True)
class NuSequence:
    points: np.ndarray
    kind: str = "gram"
    first_index: int = 0  # nu of points[0]


# ---------------------------------------------------------------------------
# zero isolation


def _scan_block(a: float, b: float, policy: PrecisionPolicy) -> tuple[np.ndarray, np.ndarray]:
    step = float(mean_zero_spacing(b)) / SCAN_FRACTION
    m = int(math.ceil((b - a) / step)) + 1
    h = (b - a) / (m - 1)
    return a + h * np.arange(m), hardy_z_grid(a, h, m, policy)


def _hidden_pairs(t: np.ndarray, z: np.ndarray, policy: PrecisionPolicy) -> list[tuple[float, float]]:
    """Brackets for sign changes hidden between grid samples.

    A local minimum of |Z| with no sign change around it is resampled
    densely; a missed close pair of zeros shows up there.
    """
    out = []
    az = np.abs(z)
    same = (np.sign(z[:-2]) == np.sign(z[1:-1])) & (np.sign(z[1:-1]) == np.sign(z[2:]))
    cand = np.nonzero(same & (az[1:-1] < az[:-2]) & (az[1:-1] < az[2:]))[0] + 1
    for i in cand:
        ts = np.linspace(t[i - 1], t[i + 1], PROBE_POINTS + 1)
        zs = hardy_z_array(ts, policy)
        flips = np.nonzero(np.sign(zs[:-1]) * np.sign(zs[1:]) < 0)[0]
        out.extend((ts[j], ts[j + 1]) for j in flips)
    return out


def _bisect(lo: np.ndarray, hi: np.ndarray, policy: PrecisionPolicy, tol: float) -> np.ndarray:
    lo = lo.copy()
    hi = hi.copy()
    z_lo = hardy_z_array(lo, policy)
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        z_mid = hardy_z_array(mid, policy)
        left = np.sign(z_mid) == np.sign(z_lo)
        lo = np.where(left, mid, lo)
        z_lo = np.where(left, z_mid, z_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def theta_count_estimate(t: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Main term theta(t)/pi + 1 of the zero-counting function."""
    return rs_theta(t, policy) / math.pi + 1.0


def build_zero_table(T_max: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> ZeroTable:
    """All critical-line zeros with ordinate <= T_max."""
    if T_max < 10:
        raise DomainError("build_zero_table needs T_max >= 10")
    lo_parts, hi_parts = [], []
    a = 0.0
    # scan whole blocks so zeros do not depend on T_max (bit-stable caches)
    while a < T_max:
        b = a + SCAN_BLOCK
        t, z = _scan_block(a, b, policy)
        flips = np.nonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)[0]
        exact = np.nonzero(z == 0.0)[0]
        lo_parts.append(t[flips])
        hi_parts.append(t[flips + 1])
        for j in exact:
            lo_parts.append(np.array([t[j] - 1e-12]))
            hi_parts.append(np.array([t[j] + 1e-12]))
        hidden = _hidden_pairs(t, z, policy)
        if hidden:
            lo_parts.append(np.array([h[0] for h in hidden]))
            hi_parts.append(np.array([h[1] for h in hidden]))
        a = b
    lo = np.concatenate(lo_parts) if lo_parts else np.empty(0)
    hi = np.concatenate(hi_parts) if hi_parts else np.empty(0)
    order = np.argsort(lo, kind="stable")
    zeros = _bisect(lo[order], hi[order], policy, ZERO_TOL)
    zeros = np.unique(zeros)
    zeros = zeros[zeros <= T_max]
    table = ZeroTable(zeros=zeros, upper_bound=float(T_max))
    mismatch = zero_count_mismatch(table, T_max, policy)
    if abs(mismatch) >= COUNT_TOL:
        raise CoverageError(
            f"zero count {zeros.size} vs theta estimate {theta_count_estimate(T_max, policy):.3f} at T={T_max}"
        )
    return table


def zero_count_mismatch(table: ZeroTable, T: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """N(T) - (theta(T)/pi + 1), i.e. S(T) from the table."""
    return float(table.count(T)) - theta_count_estimate(T, policy)


# ---------------------------------------------------------------------------
# Gram points


def gram_points(lower: float, upper: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> NuSequence:
    """All t in (lower, upper] with theta(t) = pi * nu."""
    if lower < 10:
        raise DomainError("gram_points is defined here for t >= 10")
    if upper < lower:
        raise DomainError("upper < lower")
    nu_lo = math.floor(rs_theta(lower, policy) / math.pi) + 1
    nu_hi = math.floor(rs_theta(upper, policy) / math.pi)
    if nu_hi < nu_lo:
        return NuSequence(points=np.empty(0), first_index=nu_lo)
    nu = np.arange(nu_lo, nu_hi + 1, dtype=float)
    target = math.pi * nu
    # invert the leading term t/2 ln(t/(2 pi e)) - pi/8, then Newton on theta
    w = (target + math.pi / 8.0) / (math.pi * math.e)
    t = TWO_PI * math.e * np.exp(np.real(lambertw(w)))
    t = np.clip(t, lower, upper)
    for _ in range(60):
        step = (rs_theta(t, policy) - target) / rs_theta_prime(t)
        t = t - step
        if np.max(np.abs(step)) < 1e-12:
            break
    pts = t
    keep = (pts > lower) & (pts <= upper)
    return NuSequence(points=pts[keep], first_index=int(nu[keep][0]) if keep.any() else nu_lo)


# ---------------------------------------------------------------------------
# S and S_1


def S_of_t(t, table: ZeroTable, policy: PrecisionPolicy = DEFAULT_POLICY):
    """S(t) = N(t) - 1 - theta(t)/pi, with N counted from the table."""
    arr = np.asarray(t, dtype=float)
    if arr.size and float(np.max(arr)) > table.upper_bound:
        raise CoverageError(f"t={float(np.max(arr))} exceeds zero table coverage {table.upper_bound}")
    res = table.count(arr) - 1.0 - rs_theta(np.atleast_1d(arr), policy).reshape(arr.shape) / math.pi
    return float(res) if arr.ndim == 0 else res


def _integrate_s_segments(a: np.ndarray, b: np.ndarray, count: np.ndarray) -> np.ndarray:
    """Integral of (count - 1 - theta/pi) over [a_i, b_i], theta smooth there.

    Each segment gets ceil(length) Gauss-Legendre panels; segments are
    grouped by panel count so the common short case stays vectorised.
    """
    total = np.zeros(a.shape)
    if a.size == 0:
        return total
    length = b - a
    n_panels = np.maximum(1, np.ceil(length)).astype(np.int64)
    for n in np.unique(n_panels):
        sel = np.nonzero(n_panels == n)[0]
        h = length[sel] / n
        acc = np.zeros(sel.size)
        for p in range(int(n)):
            left = a[sel] + p * h
            nodes = left[:, None] + 0.5 * h[:, None] * (_GL_X[None, :] + 1.0)
            th = rs_theta(nodes.ravel()).reshape(nodes.shape)
            integrand = (count[sel, None] - 1.0) - th / math.pi
            acc += 0.5 * h * (integrand @ _GL_W)
        total[sel] = acc
    return total


def S1_of_t(t, table: ZeroTable, policy: PrecisionPolicy = DEFAULT_POLICY):
    """S_1(t) = integral of S over [0, t]."""
    arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    if flat.size and float(np.max(flat)) > table.upper_bound:
        raise CoverageError(f"t={float(np.max(flat))} exceeds zero table coverage {table.upper_bound}")
    if flat.size and float(np.min(flat)) < 0:
        raise DomainError("S1_of_t needs t >= 0")
    k = table.count(flat)
    anchors = np.concatenate([[0.0], table.zeros])
    base = table.s1_at_zeros()[k]
    start = anchors[k]
    res = base + _integrate_s_segments(start, flat, k)
    res = res.reshape(arr.shape)
    return float(res) if arr.ndim == 0 else res

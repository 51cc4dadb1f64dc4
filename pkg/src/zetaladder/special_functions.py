"""Scalar and vectorised special functions: Z(t), zeta(s), theta(t), ln Gamma, d(n).

Hardy's Z uses the Riemann-Siegel main sum with the C0..C4 correction for
large t and Euler-Maclaurin through the functional equation below
``RS_THRESHOLD``. All routines are deterministic functions of their inputs
and the :class:`PrecisionPolicy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as sps

from . import _kernels
from .errors import BudgetExceeded, DomainError

TWO_PI = 2.0 * math.pi
EULER_GAMMA = 0.5772156649015329

RS_THRESHOLD = 1000.0
EM_RATIO = 0.75


@dataclass(frozen=True)
class PrecisionPolicy:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_series_terms: int = 120
    max_panel_depth: int = 8

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_series_terms < 1 or self.max_panel_depth < 1:
            raise DomainError("max_series_terms and max_panel_depth must be >= 1")

    def with_rel_tol(self, rel_tol: float) -> PrecisionPolicy:
        return replace(self, rel_tol=rel_tol)

    def digest_fields(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_series_terms": self.max_series_terms,
            "max_panel_depth": self.max_panel_depth,
        }


DEFAULT_POLICY = PrecisionPolicy()


@dataclass
class Constants:
    """Fixed constants consumed by the functionals.

    ``a_coeffs[1:]`` are ``None`` until fitted or configured. ``cbar`` maps
    the moment order l to the constant in the S_1 moment functional.
    """

    euler_c: float = EULER_GAMMA
    two_pi_sq: float = 2.0 * math.pi**2
    a_coeffs: list = field(default_factory=lambda: [1.0 / (2.0 * math.pi**2), None, None, None, None])
    cbar: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.5 < self.euler_c < 0.6:
            raise DomainError(f"euler_c={self.euler_c} outside (0.5, 0.6)")
        if len(self.a_coeffs) != 5:
            raise DomainError("a_coeffs needs five entries")
        for l, v in self.cbar.items():
            if int(l) < 1 or not v > 0:
                raise DomainError(f"cbar({l}) = {v} invalid")

    @property
    def a_fitted(self) -> bool:
        return all(a is not None for a in self.a_coeffs)


# ---------------------------------------------------------------------------
# Riemann-Siegel theta


def _theta_series_coeffs(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    b2k = np.abs(sps.bernoulli(2 * n)[2 : 2 * n + 1 : 2])
    return (1.0 - 2.0 ** (1 - 2 * k)) * b2k / (4.0 * k * (2 * k - 1))


_THETA_COEFFS = _theta_series_coeffs(30)


def _theta_array(t: np.ndarray, policy: PrecisionPolicy) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < 10.0
    if small.any():
        ts = t[small]
        out[small] = np.imag(sps.loggamma(0.25 + 0.5j * ts)) - 0.5 * ts * math.log(math.pi)
    big = ~small
    if big.any():
        tb = t[big]
        val = 0.5 * tb * np.log(tb / TWO_PI) - 0.5 * tb - math.pi / 8.0
        inv = 1.0 / tb
        inv2 = inv * inv
        power = inv.copy()
        n_max = min(policy.max_series_terms, _THETA_COEFFS.size)
        for k in range(n_max):
            term = _THETA_COEFFS[k] * power
            val += term
            if np.max(np.abs(term)) < 0.1 * policy.abs_tol:
                break
            power = power * inv2
        else:
            raise BudgetExceeded("theta asymptotic series did not reach abs_tol")
        out[big] = val
    return out


def rs_theta(t, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Riemann-Siegel theta; accepts a scalar or an array of t > 0."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise DomainError("rs_theta needs t >= 0")
    res = _theta_array(np.atleast_1d(arr), policy)
    return float(res[0]) if arr.ndim == 0 else res


def rs_theta_prime(t):
    """Derivative of theta; the asymptotic form is accurate to O(t^-2)."""
    t = np.asarray(t, dtype=float)
    return 0.5 * np.log(t / TWO_PI) - 1.0 / (48.0 * t * t)


# ---------------------------------------------------------------------------
# Riemann-Siegel correction polynomials


@lru_cache(maxsize=None)
def _rs_correction_polys(degree: int = 60) -> np.ndarray:
    """Taylor coefficients (in u = p - 1/2) of C_0..C_4.

    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) is entire; its series
    is obtained by exact power-series division at high working precision.
    """
    extra = 14
    deg = degree + extra
    with mpmath.workdps(110):
        two_pi = 2 * mpmath.pi
        c58, s58 = mpmath.cos(5 * mpmath.pi / 8), mpmath.sin(5 * mpmath.pi / 8)
        num = [mpmath.mpf(0)] * (deg + 1)
        den = [mpmath.mpf(0)] * (deg + 1)
        for j in range(deg // 4 + 1):
            if 4 * j <= deg:
                num[4 * j] += c58 * (-1) ** j * two_pi ** (2 * j) / mpmath.factorial(2 * j)
            if 4 * j + 2 <= deg:
                num[4 * j + 2] += s58 * (-1) ** j * two_pi ** (2 * j + 1) / mpmath.factorial(2 * j + 1)
        for j in range(deg // 2 + 1):
            den[2 * j] = -((-1) ** j) * two_pi ** (2 * j) / mpmath.factorial(2 * j)
        psi = [mpmath.mpf(0)] * (deg + 1)
        for n in range(deg + 1):
            psi[n] = (num[n] - mpmath.fsum(den[k] * psi[n - k] for k in range(1, n + 1))) / den[0]

        def deriv(m):
            return [psi[j + m] * mpmath.ff(j + m, m) for j in range(degree + 1)]

        pi = mpmath.pi
        combos = [
            [(0, 1)],
            [(3, -1 / (96 * pi**2))],
            [(2, 1 / (64 * pi**2)), (6, 1 / (18432 * pi**4))],
            [(1, -1 / (64 * pi**2)), (5, -1 / (3840 * pi**4)), (9, -1 / (5308416 * pi**6))],
            [
                (0, 1 / (128 * pi**2)),
                (4, 19 / (24576 * pi**4)),
                (8, 11 / (5898240 * pi**6)),
                (12, 1 / (2038431744 * pi**8)),
            ],
        ]
        polys = np.zeros((5, degree + 1))
        for k, combo in enumerate(combos):
            acc = [mpmath.mpf(0)] * (degree + 1)
            for order, weight in combo:
                d = deriv(order)
                acc = [a + weight * b for a, b in zip(acc, d)]
            polys[k] = [float(a) for a in acc]
    return polys


@lru_cache(maxsize=8)
def _log_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    n_arr = np.arange(1, n + 1, dtype=float)
    return np.log(n_arr), 1.0 / np.sqrt(n_arr)


def _log_table_for(n_needed: int) -> tuple[np.ndarray, np.ndarray]:
    size = 1 << max(10, int(math.ceil(math.log2(max(n_needed, 2)))))
    return _log_table(size)


@lru_cache(maxsize=None)
def _bernoulli_over_factorial(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    sign = np.where(k % 2 == 1, 1.0, -1.0)
    return sign * 2.0 * sps.zeta(2.0 * k) / TWO_PI ** (2 * k)


# ---------------------------------------------------------------------------
# zeta and Z


def zeta_array(sigma: float, t, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Vectorised zeta(sigma + i t) by Euler-Maclaurin summation."""
    t = np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=float)))
    if t.size == 0:
        return np.empty(0, dtype=complex)
    if sigma == 1.0 and np.any(t == 0.0):
        raise DomainError("zeta has a pole at s = 1")
    max_abs = float(np.max(np.abs(t))) + abs(sigma)
    n_needed = int((max_abs + 60.0) / (TWO_PI * EM_RATIO)) + 2
    log_n, _ = _log_table_for(max(n_needed, 16))
    bern = _bernoulli_over_factorial(max(policy.max_series_terms, 1))
    vals, status, _ = _kernels.zeta_em(
        float(sigma), t, log_n, bern, policy.abs_tol, policy.max_series_terms, EM_RATIO
    )
    if status != _kernels.STATUS_OK:
        raise BudgetExceeded(
            f"Euler-Maclaurin tail did not reach abs_tol={policy.abs_tol} "
            f"within {policy.max_series_terms} terms"
        )
    return vals


def zeta_on_sigma(sigma: float, t: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> complex:
    """zeta(sigma + i t) for sigma >= 1/2."""
    if sigma < 0.5:
        raise DomainError(f"sigma={sigma} < 1/2")
    return complex(zeta_array(sigma, [t], policy)[0])


def hardy_z_array(t, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Vectorised Hardy Z(t) for t >= 0."""
    t = np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=float)))
    if t.size and np.min(t) < 0:
        raise DomainError("hardy_Z needs t >= 0")
    out = np.empty_like(t)
    theta = _theta_array(t, policy) if t.size else t
    small = t < RS_THRESHOLD
    if small.any():
        zeta = zeta_array(0.5, t[small], policy)
        out[small] = np.real(np.exp(1j * theta[small]) * zeta)
    big = ~small
    if big.any():
        tb = np.ascontiguousarray(t[big])
        n_max = int(math.sqrt(float(tb.max()) / TWO_PI)) + 1
        log_n, inv_sqrt = _log_table_for(n_max)
        out[big] = _kernels.rs_z(tb, np.ascontiguousarray(theta[big]), log_n, inv_sqrt, _rs_correction_polys())
    return out


def hardy_Z(t: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    """Hardy's Z(t); |Z(t)| = |zeta(1/2 + i t)|."""
    if t < 0:
        raise DomainError("hardy_Z needs t >= 0")
    return float(hardy_z_array([t], policy)[0])


def _grid_points(t0: float, h: float, m: int) -> np.ndarray:
    return t0 + h * np.arange(m, dtype=float)


def hardy_z_grid(t0: float, h: float, m: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Z(t0 + j h) for j < m; same values as :func:`hardy_z_array` up to rounding."""
    if m <= 0:
        return np.empty(0)
    if t0 < RS_THRESHOLD or h <= 0:
        return hardy_z_array(_grid_points(t0, h, m), policy)
    t = _grid_points(t0, h, m)
    theta = _theta_array(t, policy)
    n_max = int(math.sqrt(float(t[-1]) / TWO_PI)) + 1
    log_n, inv_sqrt = _log_table_for(n_max)
    return _kernels.rs_z_grid(float(t0), float(h), int(m), theta, log_n, inv_sqrt, _rs_correction_polys())


def zeta_grid(sigma: float, t0: float, h: float, m: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """zeta(sigma + i (t0 + j h)) for j < m with one shared Dirichlet cutoff."""
    if m <= 0:
        return np.empty(0, dtype=complex)
    if h <= 0:
        return zeta_array(sigma, _grid_points(t0, h, m), policy)
    t_big = max(abs(t0), abs(t0 + (m - 1) * h)) + abs(sigma)
    log_n, _ = _log_table_for(int((t_big + 60.0) / (TWO_PI * EM_RATIO)) + 2)
    bern = _bernoulli_over_factorial(policy.max_series_terms)
    vals, status = _kernels.zeta_em_grid(
        float(sigma), float(t0), float(h), int(m), log_n, bern, policy.abs_tol, policy.max_series_terms, EM_RATIO
    )
    if status != _kernels.STATUS_OK:
        raise BudgetExceeded(f"Euler-Maclaurin tail did not reach abs_tol={policy.abs_tol}")
    return vals


# ---------------------------------------------------------------------------
# log-Gamma

_STIRLING = [1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156, -3617 / 122400]
_SHIFT = 16.0


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for real x > 0 via the Stirling series after shifting x >= 16."""
    if not x > 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x}")
    shift = 0.0
    prod = 1.0
    while x < _SHIFT:
        prod *= x
        x += 1.0
        if prod > 1e250:
            shift += math.log(prod)
            prod = 1.0
    shift += math.log(prod)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for c in _STIRLING:
        series += c * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + 0.5 * math.log(TWO_PI) + series - shift


# ---------------------------------------------------------------------------
# divisor function


def divisor_d(n: int) -> int:
    """Number of divisors of n, by trial-division factorisation."""
    n = int(n)
    if n < 1:
        raise DomainError(f"divisor_d needs n >= 1, got {n}")
    count = 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        count *= e + 1
        p += 1 if p == 2 else 2
    if n > 1:
        count *= 2
    return count


def divisor_counts(lo: int, hi: int) -> np.ndarray:
    """d(n) for lo <= n <= hi by a segmented divisor sieve."""
    if lo < 1:
        raise DomainError("divisor_counts needs lo >= 1")
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    counts = np.zeros(hi - lo + 1, dtype=np.int64)
    root = math.isqrt(hi)
    # every n = i * j with i <= j: count i once, j once (twice unless i == j)
    for i in range(1, root + 1):
        first_j = max(i, -(-lo // i))
        if first_j * i > hi:
            continue
        start = first_j * i - lo
        idx = np.arange(start, hi - lo + 1, i)
        counts[idx] += 2
        if first_j == i:
            counts[i * i - lo] -= 1
    return counts

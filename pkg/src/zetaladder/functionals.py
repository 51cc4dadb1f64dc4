"""Finite-tau evaluation of the limit functionals and the coefficient fit.

Every functional is of the form (1/tau) * Q(tau; x) where Q is an integral,
a sum or a composition of integrals over intervals whose endpoints scale
with x * tau; the limit tau -> oo is x (or x / pi for the Gram sum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import DivisionDegenerate, DomainError, IllConditioned, MissingConstant
from .ladder import DEFAULT_T0, reverse_step
from .quadrature import CRIT2, CRIT4, MomentCache, moment_integral, s1_2l, sigma2
from .special_functions import (
    DEFAULT_POLICY,
    Constants,
    PrecisionPolicy,
    divisor_counts,
    hardy_z_array,
    ln_gamma,
    rs_theta_prime,
    zeta_on_sigma,
)
from .zeros import ZeroTable, gram_points

TWO_PI_SQ = 2.0 * math.pi**2
DEFAULT_EPSILON = 0.05
COND_CAP = 1e12
TNU_WEIGHTS = ("theta_prime", "plain")


@dataclass
class FunctionalSample:
    tau: float
    x_target: float
    value: float
    rel_error_vs_target: float = field(init=False)
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rel_error_vs_target = abs(self.value / self.x_target - 1.0) if self.x_target != 0 else math.nan

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "x_target": self.x_target,
            "value": self.value,
            "rel_error_vs_target": self.rel_error_vs_target,
            "components": dict(self.components),
        }


@dataclass(frozen=True)
class Settings:
    """Everything a functional needs besides (x, tau): policy, constants, caches."""

    policy: PrecisionPolicy = DEFAULT_POLICY
    constants: Constants = field(default_factory=Constants)
    cache: MomentCache = field(default_factory=MomentCache)
    table: ZeroTable | None = None
    T0: float = DEFAULT_T0
    epsilon: float = DEFAULT_EPSILON
    tnu_weight: str = "theta_prime"

    @property
    def c(self) -> float:
        return self.constants.euler_c


def _settings(settings: Settings | None) -> Settings:
    return settings if settings is not None else Settings()


def zeta_2sigma(sigma: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> float:
    return zeta_on_sigma(2.0 * sigma, 0.0, policy).real


def _check_sigma(sigma: float, epsilon: float) -> None:
    if not sigma >= 0.5 + epsilon:
        raise DomainError(f"sigma={sigma} must be >= 1/2 + epsilon = {0.5 + epsilon}")


def _check_x(x: float) -> None:
    if not x > 0:
        raise DomainError(f"x={x} must be > 0")


def _ladder_interval(base: float, mode: str, st: Settings) -> tuple[float, float]:
    upper = reverse_step(base, mode, st.policy, T0=st.T0, euler_c=st.c, cache=st.cache)
    return base, upper


def _crit2(a: float, b: float, st: Settings) -> float:
    return moment_integral(a, b, CRIT2, st.policy, cache=st.cache).value


# ---------------------------------------------------------------------------
# coefficients


def c_coeffs(sigma: float, a, *, epsilon: float = DEFAULT_EPSILON, policy: PrecisionPolicy = DEFAULT_POLICY) -> list:
    """c_0 = 1, c_s = 2 pi^2 zeta(2 sigma)^(-s) a_s for s = 1..4."""
    _check_sigma(sigma, epsilon)
    if any(v is None for v in a):
        raise MissingConstant("fourth-moment coefficients a_1..a_4 are unset; run the fit first")
    z2 = zeta_2sigma(sigma, policy)
    return [1.0] + [TWO_PI_SQ * z2 ** (-s) * float(a[s]) for s in range(1, 5)]


# ---------------------------------------------------------------------------
# the first functional


def functional_F1(x: float, tau: float, mode: str = "asymptotic", settings: Settings | None = None) -> FunctionalSample:
    """(1/tau) * integral of Z^2 over one ladder step from x tau / (1 - c)."""
    st = _settings(settings)
    _check_x(x)
    lo, hi = _ladder_interval(x * tau / (1.0 - st.c), mode, st)
    basic = _crit2(lo, hi, st)
    return FunctionalSample(tau, x, basic / tau, {"lower": lo, "upper": hi, "basic_state": basic})


# ---------------------------------------------------------------------------
# the cross-breed composition


def crossbreed_parts(T: float, sigma: float, mode: str, st: Settings) -> dict:
    """All integrals entering the composition at base point T."""
    lo, hi = _ladder_interval(T, mode, st)
    i_sigma = moment_integral(lo, hi, sigma2(sigma), st.policy, cache=st.cache, epsilon=st.epsilon).value
    i_crit2 = _crit2(lo, hi, st)
    i_crit4 = moment_integral(0.0, lo, CRIT4, st.policy, cache=st.cache).value
    return {"lower": lo, "upper": hi, "sigma2_increment": i_sigma, "crit2_increment": i_crit2, "crit4_base": i_crit4}


def crossbreed_composition(parts: dict, coeffs: list) -> tuple[float, float]:
    """[I_sigma]^4 I_4 / sum_s c_s I_2^(4-s) I_sigma^s, evaluated via the quotient C = I_2 / I_sigma.

    Returns (composition, denominator sum in units of I_sigma^4).
    """
    i_sigma, i2, i4 = parts["sigma2_increment"], parts["crit2_increment"], parts["crit4_base"]
    if not i_sigma > 0:
        raise DivisionDegenerate("off-line increment integral vanished")
    quotient = i2 / i_sigma
    denom = sum(c * quotient ** (4 - s) for s, c in enumerate(coeffs))
    if not (math.isfinite(denom) and denom > 1e-300):
        raise DivisionDegenerate(f"denominator sum {denom} degenerate; tau too small for these coefficients")
    return i4 / denom, denom


def crossbreed_functional(
    x: float,
    sigma: float,
    tau: float,
    coeffs=None,
    mode: str = "asymptotic",
    settings: Settings | None = None,
) -> FunctionalSample:
    """The cross-breed functional at finite tau; target x.

    ``coeffs`` is a :class:`CoeffFit`, a list a_0..a_4, or None for the
    coefficients stored in the settings' constants.
    """
    st = _settings(settings)
    _check_x(x)
    _check_sigma(sigma, st.epsilon)
    a = _a_coeffs(coeffs, st)
    c = c_coeffs(sigma, a, epsilon=st.epsilon, policy=st.policy)
    z2 = zeta_2sigma(sigma, st.policy)
    base = TWO_PI_SQ * x * tau / z2**4
    parts = crossbreed_parts(base, sigma, mode, st)
    comp, denom = crossbreed_composition(parts, c)
    comps = dict(parts)
    comps.update(
        {
            "numerator_sigma2_increment": parts["sigma2_increment"],
            "denominator_crit2_increment": parts["crit2_increment"],
            "denominator_sigma2_increment": parts["sigma2_increment"],
            "quotient": parts["crit2_increment"] / parts["sigma2_increment"],
            "denominator_sum": denom * parts["sigma2_increment"] ** 4,
            "composition": comp,
        }
    )
    return FunctionalSample(tau, x, comp / tau, comps)


def _a_coeffs(coeffs, st: Settings) -> list:
    if coeffs is None:
        return list(st.constants.a_coeffs)
    if isinstance(coeffs, CoeffFit):
        return list(coeffs.a_coeffs)
    return list(coeffs)


def basic_formula_ratio(T: float, sigma: float, coeffs=None, mode: str = "asymptotic", settings: Settings | None = None) -> float:
    """Left side of the basic formula divided by zeta^4(2 sigma) T / (2 pi^2)."""
    st = _settings(settings)
    c = c_coeffs(sigma, _a_coeffs(coeffs, st), epsilon=st.epsilon, policy=st.policy)
    comp, _ = crossbreed_composition(crossbreed_parts(T, sigma, mode, st), c)
    return comp / (zeta_2sigma(sigma, st.policy) ** 4 * T / TWO_PI_SQ)


# ---------------------------------------------------------------------------
# Fermat rationals


@dataclass(frozen=True)
class FermatRational:
    x: int
    y: int
    z: int
    n: int

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise DomainError(f"{name}={v} must be a natural number")
        if not isinstance(self.n, int) or self.n < 3:
            raise DomainError(f"exponent n={self.n} must be an integer >= 3")

    @property
    def value(self) -> Fraction:
        return Fraction(self.x**self.n + self.y**self.n, self.z**self.n)


@dataclass
class Extrapolation:
    limit: float
    slope: float
    fit_error: float

    def separated_from(self, level: float, factor: float = 3.0) -> bool:
        return abs(self.limit - level) > factor * self.fit_error


def extrapolate_inverse_log(taus, values) -> Extrapolation:
    """Least-squares fit value = limit + slope / ln(tau); fit_error is the stderr of the limit.

    With two points the fit is exact and the distance between the
    extrapolated limit and the last value is used as the error instead.
    """
    taus = np.asarray(taus, dtype=float)
    vals = np.asarray(values, dtype=float)
    if taus.size < 2:
        raise DomainError("extrapolation needs at least two tau values")
    design = np.column_stack([np.ones_like(taus), 1.0 / np.log(taus)])
    coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
    limit, slope = float(coef[0]), float(coef[1])
    if taus.size == 2:
        return Extrapolation(limit, slope, abs(vals[-1] - limit))
    resid = vals - design @ coef
    dof = taus.size - 2
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    return Extrapolation(limit, slope, math.sqrt(max(cov[0, 0], 0.0)))


@dataclass
class FermatVerdict:
    rational: Fraction
    samples: list
    extrapolation: Extrapolation
    separated: bool

    def describe(self) -> str:
        return "separated from 1" if self.separated else "not separated from 1"


def fermat_probe(
    fr: FermatRational,
    sigma: float,
    tau_grid,
    coeffs=None,
    mode: str = "asymptotic",
    settings: Settings | None = None,
) -> FermatVerdict:
    """Cross-breed functional at x = (x^n + y^n) / z^n over a tau grid, with a numeric verdict."""
    x = float(fr.value)
    samples = [crossbreed_functional(x, sigma, tau, coeffs, mode, settings) for tau in tau_grid]
    ext = extrapolate_inverse_log([s.tau for s in samples], [s.value for s in samples])
    return FermatVerdict(fr.value, samples, ext, ext.separated_from(1.0))


# ---------------------------------------------------------------------------
# chain members


def divisor_sum(lower: float, upper: float) -> int:
    """sum of d(n) over lower < n <= upper, by a segmented sieve."""
    lo = math.floor(lower) + 1
    hi = math.floor(upper)
    if hi < lo:
        return 0
    return int(divisor_counts(lo, hi).sum())


def divisor_sum_functional(x: float, tau: float, mode: str = "asymptotic", settings: Settings | None = None) -> FunctionalSample:
    """(1/tau) * sum of d(n) over one ladder step from x tau / (1 - c)."""
    st = _settings(settings)
    _check_x(x)
    lo, hi = _ladder_interval(x * tau / (1.0 - st.c), mode, st)
    total = divisor_sum(lo, hi)
    return FunctionalSample(tau, x, total / tau, {"lower": lo, "upper": hi, "divisor_sum": total})


def tnu_sum(lower: float, upper: float, policy: PrecisionPolicy = DEFAULT_POLICY, weight: str = "theta_prime") -> float:
    """sum over Gram points t_nu in (lower, upper] of the t_nu summand.

    weight "theta_prime": Z(t_nu)^2 / theta'(t_nu), i.e. |zeta|^2 times the
    local Gram spacing over pi; weight "plain": Z(t_nu)^2.
    """
    if weight not in TNU_WEIGHTS:
        raise DomainError(f"t_nu weight must be one of {TNU_WEIGHTS}")
    pts = gram_points(lower, upper, policy).points
    if pts.size == 0:
        return 0.0
    z2 = hardy_z_array(pts, policy) ** 2
    if weight == "theta_prime":
        z2 = z2 / rs_theta_prime(pts)
    return float(np.sum(z2))


def tnu_sum_functional(x: float, tau: float, mode: str = "asymptotic", settings: Settings | None = None) -> FunctionalSample:
    """(1/tau) * Gram-point sum over one ladder step; target x / pi."""
    st = _settings(settings)
    _check_x(x)
    lo, hi = _ladder_interval(x * tau / (1.0 - st.c), mode, st)
    total = tnu_sum(lo, hi, st.policy, st.tnu_weight)
    return FunctionalSample(tau, x / math.pi, total / tau, {"lower": lo, "upper": hi, "tnu_sum": total})


def gamma_ratio_functional(x: float, tau: float, mode: str = "asymptotic", settings: Settings | None = None) -> FunctionalSample:
    """(1/tau) * ln(Gamma(upper) / Gamma(lower)) over one ladder step."""
    st = _settings(settings)
    _check_x(x)
    lo, hi = _ladder_interval(x * tau / (1.0 - st.c), mode, st)
    ratio = log_gamma_ratio(lo, hi)
    return FunctionalSample(tau, x, ratio / tau, {"lower": lo, "upper": hi, "log_gamma_ratio": ratio})


def log_gamma_ratio(lower: float, upper: float) -> float:
    return ln_gamma(upper) - ln_gamma(lower) if upper != lower else 0.0


def sigma_moment(upper: float, sigma: float, st: Settings) -> float:
    if upper < 1.0:
        raise DomainError(f"upper limit {upper} below 1")
    return moment_integral(1.0, upper, sigma2(sigma), st.policy, cache=st.cache, epsilon=st.epsilon).value


def sigma_moment_functional(x: float, sigma: float, tau: float, settings: Settings | None = None) -> FunctionalSample:
    """(1/tau) * integral of |zeta(sigma+it)|^2 over [1, x tau / zeta(2 sigma)]."""
    st = _settings(settings)
    _check_x(x)
    _check_sigma(sigma, st.epsilon)
    upper = x * tau / zeta_2sigma(sigma, st.policy)
    val = sigma_moment(upper, sigma, st)
    return FunctionalSample(tau, x, val / tau, {"upper": upper, "sigma_moment": val})


def _cbar(l: int, st: Settings) -> float:
    v = st.constants.cbar.get(int(l))
    if v is None:
        raise MissingConstant(f"cbar({l}) is unset; calibrate it first")
    return float(v)


def s1_moment(upper: float, l: int, st: Settings) -> float:
    if st.table is None:
        raise MissingConstant("S_1 moment needs a zero table")
    return moment_integral(0.0, upper, s1_2l(l), st.policy, table=st.table, cache=st.cache).value


def s1_moment_functional(x: float, l: int, tau: float, settings: Settings | None = None) -> FunctionalSample:
    """(1/tau) * integral of |S_1(t)|^(2l) over [0, x tau / cbar(l)]."""
    st = _settings(settings)
    _check_x(x)
    if int(l) < 1:
        raise DomainError("l must be >= 1")
    upper = x * tau / _cbar(l, st)
    val = s1_moment(upper, l, st)
    return FunctionalSample(tau, x, val / tau, {"upper": upper, "s1_moment": val})


def calibrate_cbar(l: int, tau_ref: float, settings: Settings | None = None) -> float:
    """Set cbar(l) so that the S_1 moment functional equals 1 at x = 1, tau = tau_ref."""
    st = _settings(settings)
    if int(l) < 1:
        raise DomainError("l must be >= 1")
    if st.table is None:
        raise MissingConstant("calibration needs a zero table")
    mean = s1_moment(tau_ref, l, st) / tau_ref
    if not mean > 0:
        raise DivisionDegenerate("S_1 moment vanished")
    guess = tau_ref / mean
    lo, hi = 0.8 * guess, 1.25 * guess
    f = lambda u: s1_moment(u, l, st) - tau_ref  # noqa: E731
    while f(lo) > 0:
        lo *= 0.8
    while f(hi) < 0:
        hi *= 1.25
    upper = brentq(f, lo, hi, xtol=1e-12 * guess, rtol=1e-15)
    cbar = tau_ref / upper
    st.constants.cbar[int(l)] = cbar
    return cbar


# ---------------------------------------------------------------------------
# fourth-moment coefficient fit


@dataclass
class CoeffFit:
    a_coeffs: list
    residual: float
    tau_grid: list
    condition: float = math.nan

    def __post_init__(self):
        self.a_coeffs[0] = 1.0 / TWO_PI_SQ


def fit_from_values(T_grid, fourth_moments, cond_cap: float = COND_CAP) -> CoeffFit:
    """Least squares of I_4(T)/T - ln^4 T / (2 pi^2) against ln^3 T, ln^2 T, ln T, 1.

    ``residual`` is the root-mean-square relative misfit of I_4(T)/T.
    """
    T = np.asarray(T_grid, dtype=float)
    y_full = np.asarray(fourth_moments, dtype=float) / T
    L = np.log(T)
    a0 = 1.0 / TWO_PI_SQ
    y = y_full - a0 * L**4
    design = np.column_stack([L**3, L**2, L, np.ones_like(L)])
    cond = float(np.linalg.cond(design))
    if not cond <= cond_cap:
        raise IllConditioned(f"design matrix condition {cond:.3g} exceeds cap {cond_cap:.3g}")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = a0 * L**4 + design @ coef
    residual = float(np.sqrt(np.mean(((fitted - y_full) / y_full) ** 2)))
    return CoeffFit([a0] + [float(v) for v in coef], residual, [float(v) for v in T], cond)


def fit_fourth_moment_coeffs(
    tau_grid, policy: PrecisionPolicy = DEFAULT_POLICY, *, cache: MomentCache | None = None, cond_cap: float = COND_CAP
) -> CoeffFit:
    """Fit a_1..a_4 with a_0 = 1/(2 pi^2) pinned, from computed fourth moments."""
    grid = sorted(float(t) for t in tau_grid)
    if len(grid) < 8:
        raise DomainError("the fit needs at least 8 grid points")
    if grid[0] < 500 or grid[-1] > 1e4:
        raise DomainError("fit grid must lie in [500, 1e4]")
    values = [moment_integral(0.0, T, CRIT4, policy, cache=cache).value for T in grid]
    return fit_from_values(grid, values, cond_cap)

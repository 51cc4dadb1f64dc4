import math

import numpy as np
import pytest
from em_oracle import zeta_em
from hypothesis import given, settings
from hypothesis import strategies as st

from zetaladder.errors import BudgetExceeded, DomainError
from zetaladder.special_functions import (
    DEFAULT_POLICY,
    EULER_GAMMA,
    Constants,
    PrecisionPolicy,
    divisor_counts,
    divisor_d,
    hardy_Z,
    hardy_z_array,
    hardy_z_grid,
    ln_gamma,
    rs_theta,
    zeta_array,
    zeta_grid,
    zeta_on_sigma,
)

TOL = DEFAULT_POLICY.abs_tol


def test_policy_validation():
    with pytest.raises(DomainError):
        PrecisionPolicy(abs_tol=0)
    with pytest.raises(DomainError):
        PrecisionPolicy(rel_tol=-1)
    with pytest.raises(DomainError):
        PrecisionPolicy(max_series_terms=0)
    with pytest.raises(DomainError):
        PrecisionPolicy(max_panel_depth=0)


def test_constants_defaults_and_checks():
    c = Constants()
    assert c.a_coeffs[0] == 1.0 / (2.0 * math.pi**2)
    assert c.euler_c == EULER_GAMMA
    assert not c.a_fitted
    with pytest.raises(DomainError):
        Constants(euler_c=0.7)
    with pytest.raises(DomainError):
        Constants(cbar={1: -0.5})


# ---------------------------------------------------------------------------
# Z and zeta


def test_z_at_first_zero():
    assert abs(hardy_Z(14.134725142)) < 1e-6


def test_z_at_zero_is_zeta_half():
    assert hardy_Z(0.0) == pytest.approx(-1.4603545088095868, abs=1e-10)


@pytest.mark.parametrize("t", ["10.0", "100.0", "999.5", "1000.5", "7005.0"])
def test_z_matches_oracle(oracle, t):
    assert hardy_Z(float(t)) == pytest.approx(oracle["hardy_z"][t], abs=1e-9)


def test_zeta_two():
    assert zeta_on_sigma(2.0, 0.0).real == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert zeta_on_sigma(2 * 1.0, 0.0).imag == 0.0


def test_zeta_sigma_06_t_100():
    ref = zeta_em(0.6, 100.0)
    assert abs(zeta_on_sigma(0.6, 100.0) - ref) < 1e-10


@pytest.mark.parametrize("key", ["0.6,3.0", "1.0,100.0", "2.0,0.0", "0.75,4000.0", "3.0,20.0"])
def test_zeta_matches_oracle(oracle, key):
    s, t = (float(v) for v in key.split(","))
    re, im = oracle["zeta"][key]
    assert abs(zeta_on_sigma(s, t) - complex(re, im)) < 10 * TOL


def test_zeta_rejects_left_half_and_pole():
    with pytest.raises(DomainError):
        zeta_on_sigma(0.4, 10.0)
    with pytest.raises(DomainError):
        zeta_on_sigma(1.0, 0.0)


def test_z_rejects_negative_t():
    with pytest.raises(DomainError):
        hardy_Z(-1.0)


def test_budget_exceeded_when_terms_capped():
    with pytest.raises(BudgetExceeded):
        zeta_on_sigma(0.6, 100.0, PrecisionPolicy(abs_tol=1e-14, max_series_terms=1))


@given(st.floats(0.0, 3000.0))
def test_reflection_abs_z_equals_abs_zeta(t):
    z = hardy_Z(t)
    zeta = zeta_on_sigma(0.5, t)
    assert abs(abs(z) - abs(zeta)) <= 2 * TOL * max(1.0, abs(z))


@given(st.floats(0.55, 3.0), st.floats(0.0, 5000.0))
def test_conjugate_symmetry(sigma, t):
    a = zeta_on_sigma(sigma, t)
    b = zeta_on_sigma(sigma, -t)
    assert abs(a - b.conjugate()) <= 2 * TOL


@settings(max_examples=100)
@given(st.floats(0.55, 3.0), st.floats(0.0, 5000.0))
def test_oracle_agreement_random_points(sigma, t):
    if sigma == 1.0 and t == 0.0:
        return
    assert abs(zeta_on_sigma(sigma, t) - zeta_em(sigma, t)) <= 10 * TOL


def test_grid_matches_pointwise():
    t0, h, m = 5000.3, 0.0371, 700
    t = t0 + h * np.arange(m)
    assert np.max(np.abs(hardy_z_grid(t0, h, m) - hardy_z_array(t))) < 1e-10
    zg = zeta_grid(1.0, t0, h, m)
    assert np.max(np.abs(zg - zeta_array(1.0, t))) < 1e-10


def test_deterministic():
    t = np.linspace(1000, 1100, 257)
    assert np.array_equal(hardy_z_array(t), hardy_z_array(t))


# ---------------------------------------------------------------------------
# theta


def test_theta_root_near_first_gram_point():
    assert abs(rs_theta(17.8455995)) < 1e-6


def test_theta_at_first_zero(oracle):
    # the log-Gamma oracle gives -1.72867...
    assert rs_theta(14.134725) == pytest.approx(oracle["theta"]["14.134725"], abs=1e-4)
    assert rs_theta(14.134725) == pytest.approx(-1.72867, abs=1e-4)


@pytest.mark.parametrize("t", ["5.0", "50.0", "1000.0", "54321.0"])
def test_theta_matches_oracle(oracle, t):
    assert rs_theta(float(t)) == pytest.approx(oracle["theta"][t], abs=1e-9)


@given(st.floats(10.0, 1e5))
def test_theta_monotone(t):
    assert rs_theta(t + 1.0) > rs_theta(t)


# ---------------------------------------------------------------------------
# ln Gamma


def test_ln_gamma_small_integers():
    assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert ln_gamma(2.0) == pytest.approx(0.0, abs=1e-14)
    assert ln_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-13)


@pytest.mark.parametrize("x", ["0.5", "3.7", "100.0", "10000.0"])
def test_ln_gamma_oracle(oracle, x):
    assert ln_gamma(float(x)) == pytest.approx(oracle["ln_gamma"][x], rel=1e-12)


@given(st.floats(1e-3, 1e7))
def test_ln_gamma_vs_stdlib(x):
    assert ln_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)


def test_ln_gamma_domain():
    with pytest.raises(DomainError):
        ln_gamma(0.0)
    with pytest.raises(DomainError):
        ln_gamma(-2.5)


# ---------------------------------------------------------------------------
# divisors


def _brute_d(n):
    return sum(1 for k in range(1, n + 1) if n % k == 0)


def test_divisor_examples():
    assert divisor_d(1) == 1
    assert divisor_d(12) == 6
    assert divisor_d(97) == 2
    with pytest.raises(DomainError):
        divisor_d(0)


def test_divisor_brute_force():
    assert [divisor_d(n) for n in range(1, 400)] == [_brute_d(n) for n in range(1, 400)]


def test_divisor_multiplicative_exhaustive():
    d = [0] + [divisor_d(n) for n in range(1, 40001)]
    for m in range(1, 201):
        for n in range(1, 201):
            if math.gcd(m, n) == 1:
                assert d[m * n] == d[m] * d[n]


def test_sieve_matches_pointwise():
    assert divisor_counts(1, 10).sum() == 27
    seg = divisor_counts(777, 2000)
    assert list(seg) == [divisor_d(n) for n in range(777, 2001)]


@given(st.integers(1, 10**6), st.integers(0, 300))
def test_sieve_segments(lo, width):
    hi = lo + width
    assert list(divisor_counts(lo, hi)) == [divisor_d(n) for n in range(lo, hi + 1)]

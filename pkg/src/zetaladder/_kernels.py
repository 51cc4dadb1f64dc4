"""Compiled inner loops for Z(t) and zeta(s).

Everything here works on float arrays and status codes; the public wrappers
in :mod:`zetaladder.special_functions` do validation and raise exceptions.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

STATUS_OK = 0
STATUS_BUDGET = 1


@nb.njit(cache=True)
def _horner(coeffs, u):
    acc = 0.0
    for j in range(coeffs.shape[0] - 1, -1, -1):
        acc = acc * u + coeffs[j]
    return acc


@nb.njit(cache=True)
def rs_z(t, theta, log_n, inv_sqrt_n, rs_poly):
    """Riemann-Siegel Z(t) with the C0..C4 remainder terms.

    ``rs_poly[k]`` holds the Taylor coefficients of C_k in u = p - 1/2.
    """
    out = np.empty(t.shape[0])
    two_pi = 2.0 * math.pi
    for i in range(t.shape[0]):
        ti = t[i]
        a = math.sqrt(ti / two_pi)
        n_terms = int(a)
        p = a - n_terms
        th = theta[i]
        s = 0.0
        for n in range(n_terms):
            s += inv_sqrt_n[n] * math.cos(th - ti * log_n[n])
        u = p - 0.5
        inv_a = 1.0 / a
        rem = 0.0
        scale = 1.0
        for k in range(rs_poly.shape[0]):
            rem += _horner(rs_poly[k], u) * scale
            scale *= inv_a
        sign = 1.0 if (n_terms - 1) % 2 == 0 else -1.0
        out[i] = 2.0 * s + sign * math.sqrt(inv_a) * rem
    return out


@nb.njit(cache=True)
def _em_cutoff(abs_s, ratio):
    cutoff = int((abs_s + 60.0) / (2.0 * math.pi * ratio)) + 1
    return cutoff if cutoff >= 12 else 12


@nb.njit(cache=True)
def _em_tail(s, cutoff, bern, stop, max_terms):
    """Euler-Maclaurin remainder at cutoff N; returns (value, converged, terms)."""
    n_pow = np.exp(-s * math.log(cutoff))
    acc = cutoff * n_pow / (s - 1.0) + 0.5 * n_pow
    inv_cut2 = 1.0 / (cutoff * cutoff)
    # s (s+1) ... (s+2k-2) N^{-s-2k+1}, kept as one product to avoid overflow
    prod = s * n_pow / cutoff
    for k in range(1, max_terms + 1):
        term = bern[k - 1] * prod
        acc += term
        if abs(term) < stop:
            return acc, True, k
        prod = prod * ((s + 2 * k - 1) * inv_cut2) * (s + 2 * k)
    return acc, False, max_terms


@nb.njit(cache=True)
def zeta_em(sigma, t, log_n, bern, abs_tol, max_terms, ratio):
    """Euler-Maclaurin zeta(sigma + i t) for each t.

    ``bern[k-1]`` is B_{2k}/(2k)!. The cutoff N is chosen so that
    (|s| + 60) / (2 pi N) <= ratio, which keeps the first ~30 correction
    terms decaying geometrically.
    Returns (values, status, terms_used).
    """
    m = t.shape[0]
    out = np.empty(m, dtype=np.complex128)
    status = STATUS_OK
    used = 0
    stop = 0.1 * abs_tol
    for i in range(m):
        s = complex(sigma, t[i])
        cutoff = _em_cutoff(abs(s), ratio)
        acc_re = 0.0
        acc_im = 0.0
        ti = t[i]
        for n in range(1, cutoff):
            ln = log_n[n - 1]
            mag = math.exp(-sigma * ln)
            ang = ti * ln
            acc_re += mag * math.cos(ang)
            acc_im -= mag * math.sin(ang)
        tail, ok, k = _em_tail(s, cutoff, bern, stop, max_terms)
        if not ok:
            status = STATUS_BUDGET
        if k > used:
            used = k
        out[i] = complex(acc_re, acc_im) + tail
    return out, status, used


RESEED = 256


@nb.njit(cache=True)
def _dirichlet_grid(weights, log_n, n_start, t0, h, m):
    """sum_n weights[n-1] * n^{-i t_j} on t_j = t0 + j h, for j >= n_start[n-1].

    The phase is advanced by complex multiplication and re-seeded from the
    exact exponential every RESEED steps.
    """
    acc_re = np.zeros(m)
    acc_im = np.zeros(m)
    for idx in range(weights.shape[0]):
        ln = log_n[idx]
        w = weights[idx]
        step_re = math.cos(h * ln)
        step_im = -math.sin(h * ln)
        j = n_start[idx]
        while j < m:
            ang = (t0 + j * h) * ln
            z_re = w * math.cos(ang)
            z_im = -w * math.sin(ang)
            stop = min(m, j + RESEED)
            for jj in range(j, stop):
                acc_re[jj] += z_re
                acc_im[jj] += z_im
                nr = z_re * step_re - z_im * step_im
                z_im = z_re * step_im + z_im * step_re
                z_re = nr
            j = stop
    return acc_re, acc_im


@nb.njit(cache=True)
def zeta_em_grid(sigma, t0, h, m, log_n, bern, abs_tol, max_terms, ratio):
    """zeta(sigma + i t_j) on an equispaced grid with a common cutoff."""
    t_max = t0 + (m - 1) * h
    cutoff = _em_cutoff(abs(complex(sigma, max(abs(t0), abs(t_max)))), ratio)
    weights = np.exp(-sigma * log_n[: cutoff - 1])
    starts = np.zeros(cutoff - 1, dtype=np.int64)
    acc_re, acc_im = _dirichlet_grid(weights, log_n, starts, t0, h, m)
    out = np.empty(m, dtype=np.complex128)
    status = STATUS_OK
    stop = 0.1 * abs_tol
    for j in range(m):
        s = complex(sigma, t0 + j * h)
        tail, ok, _ = _em_tail(s, cutoff, bern, stop, max_terms)
        if not ok:
            status = STATUS_BUDGET
        out[j] = complex(acc_re[j], acc_im[j]) + tail
    return out, status


@nb.njit(cache=True)
def rs_z_grid(t0, h, m, theta, log_n, inv_sqrt_n, rs_poly):
    """Riemann-Siegel Z on an increasing equispaced grid (t0 >= 2 pi)."""
    two_pi = 2.0 * math.pi
    t_max = t0 + (m - 1) * h
    n_max = int(math.sqrt(t_max / two_pi))
    starts = np.empty(n_max, dtype=np.int64)
    for idx in range(n_max):
        n = idx + 1
        # first grid index with floor(sqrt(t / 2 pi)) >= n
        t_need = two_pi * n * n
        j = int(math.ceil((t_need - t0) / h)) if t_need > t0 else 0
        while j > 0 and int(math.sqrt((t0 + (j - 1) * h) / two_pi)) >= n:
            j -= 1
        while j < m and int(math.sqrt((t0 + j * h) / two_pi)) < n:
            j += 1
        starts[idx] = j
    acc_re, acc_im = _dirichlet_grid(inv_sqrt_n[:n_max], log_n, starts, t0, h, m)
    out = np.empty(m)
    for j in range(m):
        tj = t0 + j * h
        a = math.sqrt(tj / two_pi)
        n_terms = int(a)
        u = a - n_terms - 0.5
        th = theta[j]
        main = 2.0 * (math.cos(th) * acc_re[j] - math.sin(th) * acc_im[j])
        inv_a = 1.0 / a
        rem = 0.0
        scale = 1.0
        for k in range(rs_poly.shape[0]):
            rem += _horner(rs_poly[k], u) * scale
            scale *= inv_a
        sign = 1.0 if (n_terms - 1) % 2 == 0 else -1.0
        out[j] = main + sign * math.sqrt(inv_a) * rem
    return out

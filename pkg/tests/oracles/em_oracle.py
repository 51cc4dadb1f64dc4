"""A plain Euler-Maclaurin zeta in mpmath, used as an independent oracle."""

from __future__ import annotations

import mpmath as mp


def zeta_em(sigma: float, t: float, dps: int = 32) -> complex:
    with mp.workdps(dps):
        s = mp.mpc(sigma, t)
        n_cut = int(abs(s) / mp.pi) + 30
        acc = mp.fsum(mp.power(n, -s) for n in range(1, n_cut))
        N = mp.mpf(n_cut)
        acc += N ** (1 - s) / (s - 1) + N ** (-s) / 2
        poch = s
        term_pow = N ** (-s - 1)
        for k in range(1, 60):
            term = mp.bernoulli(2 * k) / mp.factorial(2 * k) * poch * term_pow
            acc += term
            if abs(term) < mp.mpf(10) ** (-dps + 4):
                break
            poch *= (s + 2 * k - 1) * (s + 2 * k)
            term_pow /= N * N
        return complex(acc)

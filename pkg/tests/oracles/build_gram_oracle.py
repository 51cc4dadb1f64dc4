"""Gram-point sum reference at x = 1, tau = 1e4, mpmath only.

Merges the key "tnu_sum_tau1e4" into values.json:

    python3 tests/oracles/build_gram_oracle.py
"""

from __future__ import annotations

import json
import os

import mpmath as mp

mp.mp.dps = 30
OUT = os.path.join(os.path.dirname(__file__), "values.json")
EULER = mp.euler


def ladder_step(lo):
    J = lambda T: T * mp.log(T / (2 * mp.pi)) - T  # noqa: E731
    return mp.findroot(lambda u: J(u) - J(lo) - (1 - EULER) * lo, lo * 1.1)


def main():
    tau = mp.mpf(10000)
    lo = tau / (1 - EULER)
    hi = ladder_step(lo)
    n = int(mp.floor(mp.siegeltheta(lo) / mp.pi)) - 1
    total = mp.mpf(0)
    count = 0
    while True:
        g = mp.grampoint(n)
        n += 1
        if g <= lo:
            continue
        if g > hi:
            break
        total += mp.siegelz(g) ** 2 / mp.siegeltheta(g, derivative=1)
        count += 1
    with open(OUT) as fh:
        data = json.load(fh)
    data["tnu_sum_tau1e4"] = {"lower": float(lo), "upper": float(hi), "count": count, "sum": float(total)}
    with open(OUT, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
    print(data["tnu_sum_tau1e4"])


if __name__ == "__main__":
    main()

"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import csv
import io
import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from zetaladder import cli
from zetaladder.chain import MEMBERS, distinctness_experiment, evaluate_chain
from zetaladder.functionals import (
    FermatRational,
    Settings,
    basic_formula_ratio,
    fermat_probe,
    fit_fourth_moment_coeffs,
    functional_F1,
)
from zetaladder.ladder import check_partition_properties, reverse_iterate, reverse_step
from zetaladder.quadrature import MomentCache, fourth_moment, second_moment_J, second_moment_main_term
from zetaladder.special_functions import EULER_GAMMA
from zetaladder.zeros import build_zero_table, zero_count_mismatch

TAUS = [1e3, 3e3, 1e4]


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_1_zero_engine(oracle):
    t0 = time.perf_counter()
    table = build_zero_table(1000.0)
    elapsed = time.perf_counter() - t0
    err = max(abs(a - b) for a, b in zip(table.zeros[:25], oracle["zeros_25"]))
    worst = max(abs(zero_count_mismatch(table, T)) for T in np.arange(15.0, 1000.5, 5.0))
    ok = err < 1e-6 and worst <= 2 and elapsed < 60
    verdict(1, ok, f"max zero error {err:.2e}, max |N(T) - theta/pi - 1| {worst:.3f}, {elapsed:.1f}s")


def test_criterion_2_second_moment(oracle):
    t0 = time.perf_counter()
    rec = second_moment_J(1000.0, cache=MomentCache())
    elapsed = time.perf_counter() - t0
    diff = abs(rec.value - oracle["J_1000"])
    main = second_moment_main_term(1000.0)
    rel_main = abs(rec.value / main - 1)
    ok = diff <= rec.err_estimate and rel_main < 0.03 and elapsed < 60
    verdict(
        2,
        ok,
        f"J(1000)={rec.value:.10f}, |J - oracle|={diff:.1e} vs err_estimate {rec.err_estimate:.1e}; "
        f"main term {main:.4f} off by {rel_main:.1%} (limit 3%), {elapsed:.1f}s",
    )


def test_criterion_3_fourth_moment():
    t0 = time.perf_counter()
    cache = MomentCache()
    ratios = [fourth_moment(T, cache=cache).value / (T * math.log(T) ** 4 / (2 * math.pi**2)) for T in (2000.0, 5000.0, 1e4)]
    short = fit_fourth_moment_coeffs(np.linspace(500.0, 5000.0, 8), cache=cache)
    long = fit_fourth_moment_coeffs(np.linspace(500.0, 1e4, 8), cache=cache)
    elapsed = time.perf_counter() - t0
    ok = all(0.5 < r < 2 for r in ratios) and long.residual < short.residual and elapsed < 600
    verdict(
        3,
        ok,
        f"leading-term ratios {[round(r, 4) for r in ratios]}, fit residual {short.residual:.2e} -> {long.residual:.2e}, "
        f"{elapsed:.1f}s",
    )


def test_criterion_4_ladder(cache):
    seq = reverse_iterate(5000.0, 3, "integral", cache=cache)
    rep = check_partition_properties(seq, cache=cache)
    ordered = all(b > a for a, b in zip(seq.iterates[:-1], seq.iterates[1:]))
    modes = abs(reverse_step(1000.0, "integral", cache=cache) / reverse_step(1000.0, "asymptotic") - 1)
    ok = (
        ordered
        and rep.equidistance_defect < 0.2
        and rep.increment_defect < 0.2
        and all(0.7 < r < 1.4 for r in rep.increment_ratios)
        and modes < 0.02
    )
    verdict(
        4,
        ok,
        f"ordered={ordered}, defects {rep.equidistance_defect:.4f}/{rep.increment_defect:.4f}, "
        f"increment ratios {[round(r, 3) for r in rep.increment_ratios]}, modes differ {modes:.2%}",
    )


def test_criterion_5_first_functional(st):
    parts = []
    ok = True
    for x in (0.5, 1.0, 2.0):
        e3 = abs(functional_F1(x, 1e3, "asymptotic", st).value / x - 1)
        e4 = abs(functional_F1(x, 1e4, "asymptotic", st).value / x - 1)
        ok &= e4 < e3 and e4 < 0.25
        parts.append(f"x={x}: {e3:.3f} -> {e4:.3f}")
    verdict(5, ok, "; ".join(parts))


def test_criterion_6_basic_formula(st, fit):
    r3 = basic_formula_ratio(1e3, 1.0, fit, "asymptotic", st)
    r4 = basic_formula_ratio(1e4, 1.0, fit, "asymptotic", st)
    ok = abs(r4 - 1) < 0.25 and abs(r4 - 1) < abs(r3 - 1)
    verdict(6, ok, f"ratio {r3:.4f} at T=1e3, {r4:.4f} at T=1e4 (band 1 +- 0.25)")


def test_criterion_7_chain(st, fit):
    t0 = time.perf_counter()
    rep = evaluate_chain(1.0 - EULER_GAMMA, 1.0, 1, TAUS, settings=st, coeffs=fit)
    elapsed = time.perf_counter() - t0
    last = {m: row[-1] for m, row in zip(MEMBERS, rep.ratios)}
    in_band = not rep.errors and all(0.5 < v < 2 for v in last.values())
    shrinking = {}
    for m in ("divisor_sum", "log_gamma_ratio", "sigma_moment"):
        d = [abs(r - 1) for r in rep.ratios[MEMBERS.index(m)]]
        shrinking[m] = d[0] > d[1] > d[2]
    ok = in_band and all(shrinking.values()) and elapsed < 1800
    verdict(
        7,
        ok,
        "ratios at 1e4 " + ", ".join(f"{m}={v:.3f}" for m, v in last.items()) + f"; decreasing {shrinking}; {elapsed:.1f}s",
    )


def test_criterion_8_distinctness(st):
    two = distinctness_experiment(1.0, 2.0, [1e4], "asymptotic", st).ratios[-1]
    same = distinctness_experiment(1.0, 1.0, TAUS, "asymptotic", st).ratios
    ok = abs(two / 2 - 1) < 0.1 and same == [1.0] * len(TAUS)
    verdict(8, ok, f"x2/x1 ratio {two:.4f} at 1e4, x1 = x2 gives {same}")


def test_criterion_9_fermat(st, fit):
    a = fermat_probe(FermatRational(1, 1, 1, 3), 1.0, TAUS, fit, "asymptotic", st)
    fr = FermatRational(3, 4, 5, 3)
    b = fermat_probe(fr, 1.0, TAUS, fit, "asymptotic", st)
    ea, eb = a.extrapolation, b.extrapolation
    ok_a = abs(ea.limit / 2 - 1) < 0.25 and a.separated
    ok_b = fr.value == Fraction(91, 125) and b.separated
    verdict(
        9,
        ok_a and ok_b,
        f"(1,1,1,3): limit {ea.limit:.3f} +- {ea.fit_error:.3f}, {a.describe()}; "
        f"(3,4,5,3): value {fr.value}, limit {eb.limit:.3f} +- {eb.fit_error:.3f}, {b.describe()}",
    )


def _run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_criterion_10_determinism(tmp_path, capsys):
    d = str(tmp_path)
    commands = [
        ("moment", "--kind", "crit4", "--upper", 700),
        ("ladder", "--T", 2000, "--k", 3),
        ("zeros", "--T", 200),
        ("fit", "--grid", "500:10000:8"),
        ("calibrate", "--l", 1, "--tau-ref", 1000),
        ("functional", "--name", "tnu", "--tau", 1000, "--tau", 3000),
        ("chain", "--tau", 1000, "--tau", 2000),
        ("fermat", "--triple", 1, 2, 3, "--n", 3, "--tau", 1000, "--tau", 2000, "--tau", 3000, "--mode", "asymptotic"),
    ]
    same = {}
    for argv in commands:
        full = (*argv, "--cache-dir", d)
        c1, out1 = _run(full, capsys)
        c2, out2 = _run(full, capsys)
        rows = list(csv.reader(io.StringIO(out1)))
        same[argv[0]] = c1 == c2 == 0 and out1 == out2 and len(rows) > 1
    verdict(10, all(same.values()), f"byte-identical reruns {same}")


@pytest.fixture(autouse=True)
def _quiet_cache_env(monkeypatch):
    monkeypatch.delenv("ZETALADDER_CACHE", raising=False)
    os.environ.pop("ZETALADDER_CACHE", None)

"""Command-line front end: ``zetaladder <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 computation failure.
Settings are layered: built-in defaults, then constants stored in the cache
directory by ``fit``/``calibrate``, then ``--config FILE``, then flags.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .cache import DiskStore, ZeroTableStore, digest
from .chain import MEMBERS, chain_family_compare, evaluate_chain
from .config import (
    DEFAULT_CACHE_DIR,
    RunConfig,
    apply_values,
    constants_values,
    read_config_file,
    write_config_file,
)
from .errors import ConfigError, DomainError, MissingConstant, ZetaLadderError
from .functionals import (
    FermatRational,
    Settings,
    calibrate_cbar,
    crossbreed_functional,
    divisor_sum_functional,
    fermat_probe,
    fit_fourth_moment_coeffs,
    functional_F1,
    gamma_ratio_functional,
    s1_moment_functional,
    sigma_moment_functional,
    tnu_sum_functional,
)
from .ladder import MODES, check_partition_properties, reverse_iterate
from .quadrature import CRIT2, CRIT4, MomentCache, MomentRecord, moment_integral, s1_2l, sigma2
from .reporting import line_plot_svg, to_csv, to_json
from .zeros import build_zero_table, zero_count_mismatch

log = logging.getLogger("zetaladder")

STORED_CONFIG = "config.cfg"
DEFAULT_FIT_GRID = "500:10000:8"
FUNCTIONALS = ("F1", "crossbreed", "divisor", "tnu", "gamma", "sigma", "s1")
FIVE_INTEGRALS = (
    "numerator_sigma2_increment",
    "denominator_crit2_increment",
    "denominator_sigma2_increment",
    "crit4_base",
    "denominator_sum",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# configuration


def _flag_values(args) -> dict:
    vals = {}
    for key, attr in (("sigma", "sigma"), ("epsilon", "epsilon"), ("l", "l"), ("mode", "mode"), ("alpha", "alpha")):
        v = getattr(args, attr, None)
        if v is not None:
            vals[key] = v
    if args.x:
        vals["x"] = list(args.x)
    if args.tau:
        vals["tau"] = list(args.tau)
    if args.tol is not None:
        vals["rel_tol"] = args.tol
    if args.out is not None:
        vals["out"] = args.out
    if args.plot is not None:
        vals["plot"] = args.plot
    if args.cache_dir is not None:
        vals["cache_dir"] = args.cache_dir
    return vals


def build_config(args) -> RunConfig:
    file_vals = read_config_file(args.config) if args.config else {}
    flag_vals = _flag_values(args)
    cache_dir = flag_vals.get("cache_dir") or file_vals.get("cache_dir") or os.environ.get("ZETALADDER_CACHE") or DEFAULT_CACHE_DIR
    cfg = RunConfig(cache_dir=cache_dir)
    stored = os.path.join(cache_dir, STORED_CONFIG)
    if os.path.exists(stored):
        apply_values(cfg, read_config_file(stored))
    apply_values(cfg, file_vals)
    apply_values(cfg, flag_vals)
    return cfg.validate()


class Context:
    """Config plus the caches a command needs; flushes the stores on close."""

    def __init__(self, cfg: RunConfig, use_cache: bool = True):
        self.cfg = cfg
        self.use_cache = use_cache
        self.moments = DiskStore(cfg.cache_dir, "moments") if use_cache else None
        self.records = DiskStore(cfg.cache_dir, "records") if use_cache else None
        self.tables = ZeroTableStore(cfg.cache_dir) if use_cache else None
        self.cache = MomentCache(self.moments)
        self._table = None

    def table(self, upper: float):
        if self._table is not None and self._table.upper_bound >= upper:
            return self._table
        pol = self.cfg.policy
        t_max = ZeroTableStore.covering(upper)
        tab = self.tables.load(upper, pol) if self.tables else None
        if tab is None:
            log.info("building zero table up to %s", t_max)
            tab = build_zero_table(t_max, pol)
            if self.tables:
                self.tables.save(tab, pol)
        self._table = tab
        return tab

    def settings(self, table=None) -> Settings:
        c = self.cfg
        return Settings(
            policy=c.policy,
            constants=c.constants,
            cache=self.cache,
            table=table,
            epsilon=c.epsilon,
            tnu_weight=c.tnu_weight,
        )

    def store_constants(self) -> None:
        path = os.path.join(self.cfg.cache_dir, STORED_CONFIG)
        vals = read_config_file(path) if os.path.exists(path) else {}
        vals.update(constants_values(self.cfg.constants))
        write_config_file(path, vals)

    def ensure_coeffs(self) -> None:
        """Fit a_1..a_4 on the default grid the first time they are needed."""
        if self.cfg.constants.a_fitted:
            return
        log.info("fourth-moment coefficients unset; fitting on %s", DEFAULT_FIT_GRID)
        fit = fit_fourth_moment_coeffs(parse_grid(DEFAULT_FIT_GRID), self.cfg.policy, cache=self.cache)
        self.cfg.constants.a_coeffs[:] = fit.a_coeffs
        if self.use_cache:
            self.store_constants()

    def close(self) -> None:
        for s in (self.moments, self.records):
            if s is not None:
                s.flush()


def parse_grid(spec: str) -> list:
    """lo:hi:n as n equally spaced points."""
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise UsageError(f"grid must look like lo:hi:n, got {spec!r}") from exc
    if n < 2 or not hi > lo:
        raise UsageError("grid needs hi > lo and n >= 2")
    return [float(v) for v in np.linspace(lo, hi, n)]


# ---------------------------------------------------------------------------
# emission


def _emit(ctx: Context, args, command: str, columns: list, rows: list, results, errors=(), plot=None) -> None:
    cfg = ctx.cfg
    if cfg.output == "json":
        text = to_json(command, cfg.to_dict(), results, errors)
    else:
        text = to_csv(command, cfg.to_dict(), columns, rows, errors)
    if args.output_file:
        with open(args.output_file, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.plot == "svg" and plot is not None:
        path = args.plot_file or f"{command}.svg"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(plot)


def _inv_log_series(taus, devs) -> list:
    return [(1.0 / math.log(t), d) for t, d in zip(taus, devs) if d is not None]


# ---------------------------------------------------------------------------
# commands


def _moment_kind(args, cfg):
    if args.kind == "crit2":
        return CRIT2
    if args.kind == "crit4":
        return CRIT4
    if args.kind == "sigma2":
        return sigma2(cfg.sigma)
    return s1_2l(cfg.l)


def cmd_moment(ctx: Context, args) -> int:
    cfg = ctx.cfg
    kind = _moment_kind(args, cfg)
    params = {"kind": kind.key(), "lower": args.lower, "upper": args.upper, "epsilon": cfg.epsilon}
    key = digest("moment", params, cfg.policy.digest_fields())
    hit = ctx.records.get(key) if ctx.records else None
    if hit is not None:
        rec = MomentRecord(**hit)
    else:
        table = ctx.table(args.upper) if kind.name == "s1_2l" else None
        rec = moment_integral(args.lower, args.upper, kind, cfg.policy, table=table, cache=ctx.cache, epsilon=cfg.epsilon)
        rec = MomentRecord(**{k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in rec.to_dict().items()})
        if ctx.records is not None:
            ctx.records[key] = rec.to_dict()
    cols = ["kind", "lower", "upper", "power", "value", "err_estimate", "evaluations"]
    _emit(ctx, args, "moment", cols, [rec.to_dict()], rec.to_dict())
    return 0


def cmd_ladder(ctx: Context, args) -> int:
    cfg = ctx.cfg
    seq = reverse_iterate(args.T, args.k, cfg.mode, cfg.policy, euler_c=cfg.constants.euler_c, cache=ctx.cache)
    rows = []
    for r, t in enumerate(seq.iterates):
        rows.append(
            {
                "r": r,
                "iterate": t,
                "increment": seq.increments[r - 1] if r else None,
                "residual": seq.residuals[r - 1] if r else None,
            }
        )
    results = {"mode": seq.mode, "base_T": seq.base_T, "iterates": list(seq.iterates), "increments": list(seq.increments)}
    if seq.k >= 2:
        rep = check_partition_properties(seq, cfg.policy, euler_c=cfg.constants.euler_c, cache=ctx.cache)
        results["partition"] = dict(rep.__dict__)
    _emit(ctx, args, "ladder", ["r", "iterate", "increment", "residual"], rows, results)
    return 0


def _functional(name, x, tau, ctx, st):
    cfg = ctx.cfg
    if name == "F1":
        return functional_F1(x, tau, cfg.mode, st)
    if name == "crossbreed":
        return crossbreed_functional(x, cfg.sigma, tau, None, cfg.mode, st)
    if name == "divisor":
        return divisor_sum_functional(x, tau, cfg.mode, st)
    if name == "tnu":
        return tnu_sum_functional(x, tau, cfg.mode, st)
    if name == "gamma":
        return gamma_ratio_functional(x, tau, cfg.mode, st)
    if name == "sigma":
        return sigma_moment_functional(x, cfg.sigma, tau, st)
    return s1_moment_functional(x, cfg.l, tau, st)


def _s1_upper(cfg: RunConfig, xs, taus) -> float:
    cbar = cfg.constants.cbar.get(cfg.l)
    if cbar is None:
        raise MissingConstant(f"cbar({cfg.l}) is unset; run calibrate --l {cfg.l} first")
    return max(xs) * max(taus) / cbar


def cmd_functional(ctx: Context, args) -> int:
    cfg = ctx.cfg
    table = None
    if args.name == "crossbreed":
        ctx.ensure_coeffs()
    if args.name == "s1":
        table = ctx.table(_s1_upper(cfg, cfg.x_values, cfg.tau_grid))
    st = ctx.settings(table)
    rows, results = [], []
    for x in cfg.x_values:
        for tau in cfg.tau_grid:
            s = _functional(args.name, x, tau, ctx, st)
            rows.append({"name": args.name, "x": x, "tau": tau, "x_target": s.x_target, "value": s.value,
                         "rel_error_vs_target": s.rel_error_vs_target})
            results.append({"name": args.name, "x": x, **s.to_dict()})
    plot = line_plot_svg(
        {f"x={x:g}": _inv_log_series(cfg.tau_grid, [r["rel_error_vs_target"] for r in rows if r["x"] == x]) for x in cfg.x_values},
        title=f"{args.name}: |value/target - 1|",
        xlabel="1 / ln tau",
        ylabel="|value/target - 1|",
    )
    cols = ["name", "x", "tau", "x_target", "value", "rel_error_vs_target"]
    _emit(ctx, args, "functional", cols, rows, results, plot=plot)
    return 0


def cmd_chain(ctx: Context, args) -> int:
    cfg = ctx.cfg
    errors = []
    table = None
    try:
        ctx.ensure_coeffs()
    except ZetaLadderError as exc:
        errors.append({"member": "crossbreed", "tau": None, "code": exc.code, "message": str(exc)})
    try:
        table = ctx.table(_s1_upper(cfg, cfg.x_values, cfg.tau_grid))
    except ZetaLadderError as exc:
        errors.append({"member": "s1_moment", "tau": None, "code": exc.code, "message": str(exc)})
    st = ctx.settings(table)
    reports = [evaluate_chain(x, cfg.sigma, cfg.l, cfg.tau_grid, cfg.mode, st) for x in cfg.x_values]
    cols = ["x", "tau", *MEMBERS, *(f"ratio_{m}" for m in MEMBERS)]
    rows = []
    for rep in reports:
        codes = {(e["member"], e["tau"]): e["code"] for e in rep.errors}
        for j, tau in enumerate(rep.tau_grid):
            row = {"x": rep.x, "tau": tau}
            for i, m in enumerate(MEMBERS):
                v = rep.members[i][j]
                row[m] = v if v is not None else codes.get((m, tau), "error")
                row[f"ratio_{m}"] = rep.ratios[i][j] if rep.ratios[i][j] is not None else "error"
            rows.append(row)
        errors.extend({"x": rep.x, **e} for e in rep.errors)
    results = {"chains": [r.to_dict() for r in reports]}
    if len(cfg.x_values) > 1:
        fam = chain_family_compare(cfg.x_values, cfg.sigma, cfg.l, cfg.tau_grid[-1], cfg.mode, st)
        results["family"] = fam.to_dict()
    first = reports[0]
    plot = line_plot_svg(
        {
            m: _inv_log_series(first.tau_grid, [abs(r - 1.0) if r is not None else None for r in first.ratios[i]])
            for i, m in enumerate(MEMBERS)
            if i > 0
        },
        title=f"chain at x={first.x:.6g}: |ratio - 1| per member",
        xlabel="1 / ln tau",
        ylabel="|ratio - 1|",
    )
    _emit(ctx, args, "chain", cols, rows, results, errors, plot=plot)
    return 0 if any(r.completed_members() for r in reports) else 2


def cmd_fermat(ctx: Context, args) -> int:
    cfg = ctx.cfg
    if args.n < 3:
        raise UsageError("--n must be >= 3")
    try:
        fr = FermatRational(*args.triple, args.n)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    ctx.ensure_coeffs()
    verdict = fermat_probe(fr, cfg.sigma, cfg.tau_grid, None, cfg.mode, ctx.settings())
    ext = verdict.extrapolation
    rows = []
    for s in verdict.samples:
        row = {"tau": s.tau, "rational": str(fr.value), "x": float(fr.value), "value": s.value,
               "rel_error_vs_target": s.rel_error_vs_target}
        row.update({k: s.components[k] for k in FIVE_INTEGRALS})
        row.update({"limit": ext.limit, "fit_error": ext.fit_error, "verdict": verdict.describe()})
        rows.append(row)
    results = {
        "triple": list(args.triple),
        "n": args.n,
        "rational": str(fr.value),
        "samples": [s.to_dict() for s in verdict.samples],
        "extrapolation": dict(ext.__dict__),
        "verdict": verdict.describe(),
        "separated": verdict.separated,
    }
    cols = ["tau", "rational", "x", "value", "rel_error_vs_target", *FIVE_INTEGRALS, "limit", "fit_error", "verdict"]
    plot = line_plot_svg(
        {"|value - x|": _inv_log_series(cfg.tau_grid, [abs(s.value - float(fr.value)) for s in verdict.samples])},
        title=f"Fermat probe at {fr.value}",
        xlabel="1 / ln tau",
        ylabel="|value - x|",
    )
    _emit(ctx, args, "fermat", cols, rows, results, plot=plot)
    return 0


def cmd_fit(ctx: Context, args) -> int:
    cfg = ctx.cfg
    grid = parse_grid(args.grid)
    fit = fit_fourth_moment_coeffs(grid, cfg.policy, cache=ctx.cache)
    cfg.constants.a_coeffs[:] = fit.a_coeffs
    if ctx.use_cache:
        ctx.store_constants()
    rows = [{"s": s, "a_s": a} for s, a in enumerate(fit.a_coeffs)]
    results = {"a_coeffs": fit.a_coeffs, "residual": fit.residual, "condition": fit.condition, "tau_grid": fit.tau_grid}
    _emit(ctx, args, "fit", ["s", "a_s"], rows, results, [])
    return 0


def cmd_calibrate(ctx: Context, args) -> int:
    cfg = ctx.cfg
    tau_ref = args.tau_ref
    table = ctx.table(2.0 * tau_ref)
    cbar = calibrate_cbar(cfg.l, tau_ref, ctx.settings(table))
    if ctx.use_cache:
        ctx.store_constants()
    rows = [{"l": cfg.l, "tau_ref": tau_ref, "cbar": cbar}]
    _emit(ctx, args, "calibrate", ["l", "tau_ref", "cbar"], rows, rows[0])
    return 0


def cmd_zeros(ctx: Context, args) -> int:
    cfg = ctx.cfg
    table = ctx.table(args.T)
    z = table.zeros[table.zeros <= args.T]
    rows = [{"n": i + 1, "gamma": float(g)} for i, g in enumerate(z)]
    results = {"T": args.T, "count": int(z.size), "count_minus_theta_estimate": zero_count_mismatch(table, args.T, cfg.policy),
               "zeros": [float(g) for g in z]}
    _emit(ctx, args, "zeros", ["n", "gamma"], rows, results)
    return 0


COMMANDS = {
    "moment": cmd_moment,
    "ladder": cmd_ladder,
    "functional": cmd_functional,
    "chain": cmd_chain,
    "fermat": cmd_fermat,
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
    "zeros": cmd_zeros,
}


def _positive(conv):
    def parse(s):
        try:
            v = conv(s)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"not a number: {s!r}") from exc
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {s}")
        return v

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="flat key = value config file")
    g.add_argument("--sigma", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--x", type=_positive(float), action="append", help="repeatable")
    g.add_argument("--l", type=int)
    g.add_argument("--tau", type=_positive(float), action="append", help="repeatable, ascending")
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--alpha", type=float)
    g.add_argument("--tol", type=_positive(float), help="relative quadrature tolerance")
    g.add_argument("--cache-dir")
    g.add_argument("--no-cache", action="store_true", help="do not read or write the on-disk cache")
    g.add_argument("--out", choices=("csv", "json"))
    g.add_argument("--plot", choices=("svg",))
    g.add_argument("--plot-file")
    g.add_argument("-o", "--output-file")
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="zetaladder", description="Finite-tau experiments with Jacob's-ladder zeta functionals.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("moment", parents=[common], help="moment integral over [lower, upper]")
    s.add_argument("--kind", choices=("crit2", "crit4", "sigma2", "s1"), default="crit2")
    s.add_argument("--lower", type=float, default=0.0)
    s.add_argument("--upper", type=float, required=True)

    s = sub.add_parser("ladder", parents=[common], help="reverse iterates T, T^1, ..., T^k")
    s.add_argument("--T", type=_positive(float), required=True)
    s.add_argument("--k", type=int, default=3)

    s = sub.add_parser("functional", parents=[common], help="one functional over the x and tau grids")
    s.add_argument("--name", choices=FUNCTIONALS, default="F1")

    sub.add_parser("chain", parents=[common], help="the seven-member chain over the tau grid")

    s = sub.add_parser("fermat", parents=[common], help="cross-breed functional at (x^n + y^n) / z^n")
    s.add_argument("--triple", type=int, nargs=3, required=True, metavar=("X", "Y", "Z"))
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("fit", parents=[common], help="fit the fourth-moment coefficients a_1..a_4")
    s.add_argument("--grid", default=DEFAULT_FIT_GRID, help="lo:hi:n, equally spaced")

    s = sub.add_parser("calibrate", parents=[common], help="calibrate cbar(l)")
    s.add_argument("--tau-ref", type=_positive(float), default=5000.0)

    s = sub.add_parser("zeros", parents=[common], help="critical-line zeros up to T")
    s.add_argument("--T", type=_positive(float), required=True)
    return p


def _error_doc(command, cfg, exc) -> str:
    code = getattr(exc, "code", "error")
    conf = cfg.to_dict() if cfg is not None else None
    return to_json(command, conf, None, [{"code": code, "message": str(exc)}])


def main(argv=None) -> int:
    cfg = None
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        if args.l is not None and args.l < 1:
            raise UsageError("--l must be >= 1")
        cfg = build_config(args)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    ctx = Context(cfg, use_cache=not args.no_cache)
    try:
        return COMMANDS[command](ctx, args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except ZetaLadderError as exc:
        sys.stderr.write(f"{command} failed: {exc}\n")
        sys.stdout.write(_error_doc(command, cfg, exc))
        return 2
    finally:
        ctx.close()


if __name__ == "__main__":
    sys.exit(main())

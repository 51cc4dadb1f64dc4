"""Run configuration and the flat key=value config format.

Documented keys (anything else is rejected)::

    sigma            real, >= 1/2 + epsilon            (default 1.0)
    epsilon          real > 0                          (default 0.05)
    x                comma-separated reals > 0         (default 1 - c)
    l                integer >= 1                      (default 1)
    tau              comma-separated ascending reals   (default 1000,3000,10000)
    mode             integral | asymptotic             (default integral)
    alpha            real > 1, upper end of [1, alpha] (default 2)
    tnu_weight       theta_prime | plain               (default theta_prime)
    abs_tol, rel_tol, max_series_terms, max_panel_depth   precision policy
    euler_c          the constant c                    (default Euler's gamma)
    a1 .. a4         fourth-moment coefficients        (unset until fitted)
    cbar.<l>         S_1 moment constant for order l   (unset until calibrated)
    cache_dir        path                              (default .zetaladder-cache)
    out              csv | json                        (default csv)
    plot             svg or empty                      (default empty)

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError
from .ladder import MODES
from .special_functions import EULER_GAMMA, Constants, PrecisionPolicy

DEFAULT_TAU = (1000.0, 3000.0, 10000.0)
DEFAULT_CACHE_DIR = ".zetaladder-cache"
OUTPUTS = ("csv", "json")
PLOTS = (None, "svg")
TNU_WEIGHTS = ("theta_prime", "plain")

_SCALAR_KEYS = {
    "sigma": float,
    "epsilon": float,
    "l": int,
    "mode": str,
    "alpha": float,
    "tnu_weight": str,
    "abs_tol": float,
    "rel_tol": float,
    "max_series_terms": int,
    "max_panel_depth": int,
    "euler_c": float,
    "cache_dir": str,
    "out": str,
    "plot": str,
}
_LIST_KEYS = ("x", "tau")
_COEFF_KEYS = ("a1", "a2", "a3", "a4")


@dataclass
class RunConfig:
    sigma: float = 1.0
    epsilon: float = 0.05
    x_values: list = field(default_factory=lambda: [1.0 - EULER_GAMMA])
    l: int = 1
    tau_grid: list = field(default_factory=lambda: list(DEFAULT_TAU))
    mode: str = "integral"
    alpha: float = 2.0
    tnu_weight: str = "theta_prime"
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)
    constants: Constants = field(default_factory=Constants)
    cache_dir: str = DEFAULT_CACHE_DIR
    output: str = "csv"
    plot: str | None = None

    def validate(self) -> RunConfig:
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigError("epsilon must be a positive number")
        if not self.sigma >= 0.5 + self.epsilon:
            raise ConfigError(f"sigma={self.sigma} must be >= 1/2 + epsilon = {0.5 + self.epsilon}")
        if not self.x_values or any(not (v > 0 and math.isfinite(v)) for v in self.x_values):
            raise ConfigError("x values must be positive")
        if self.l < 1:
            raise ConfigError("l must be >= 1")
        if not self.tau_grid:
            raise ConfigError("tau grid is empty")
        if any(not (t > 0 and math.isfinite(t)) for t in self.tau_grid):
            raise ConfigError("tau values must be positive")
        if any(b <= a for a, b in zip(self.tau_grid[:-1], self.tau_grid[1:])):
            raise ConfigError("tau grid must be strictly ascending")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if not self.alpha > 1:
            raise ConfigError("alpha must exceed 1")
        if self.tnu_weight not in TNU_WEIGHTS:
            raise ConfigError(f"tnu_weight must be one of {TNU_WEIGHTS}")
        if self.output not in OUTPUTS:
            raise ConfigError(f"out must be one of {OUTPUTS}")
        if self.plot not in PLOTS:
            raise ConfigError("plot must be svg or empty")
        return self

    def to_dict(self) -> dict:
        c = self.constants
        return {
            "sigma": self.sigma,
            "epsilon": self.epsilon,
            "x": list(self.x_values),
            "l": self.l,
            "tau": list(self.tau_grid),
            "mode": self.mode,
            "alpha": self.alpha,
            "tnu_weight": self.tnu_weight,
            "policy": self.policy.digest_fields(),
            "constants": {
                "euler_c": c.euler_c,
                "a_coeffs": list(c.a_coeffs),
                "cbar": {str(k): v for k, v in sorted(c.cbar.items())},
            },
            "cache_dir": self.cache_dir,
            "out": self.output,
            "plot": self.plot,
        }


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _LIST_KEYS:
            return [float(v) for v in raw.split(",") if v.strip()]
        if key in _COEFF_KEYS or key.startswith("cbar."):
            return float(raw)
        conv = _SCALAR_KEYS[key]
        if key == "plot" and raw == "":
            return None
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def _known(key: str) -> bool:
    if key in _SCALAR_KEYS or key in _LIST_KEYS or key in _COEFF_KEYS:
        return True
    if key.startswith("cbar."):
        return key[5:].isdigit() and int(key[5:]) >= 1
    return False


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, raw = (p.strip() for p in s.split("=", 1))
        if not _known(key):
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def read_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read(), path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def format_config(values: dict) -> str:
    lines = []
    for key in sorted(values):
        v = values[key]
        if isinstance(v, list):
            v = ",".join(repr(float(u)) for u in v)
        elif v is None:
            v = ""
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def write_config_file(path: str, values: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(format_config(values))
    os.replace(tmp, path)


def apply_values(cfg: RunConfig, values: dict) -> RunConfig:
    """Overlay parsed key=value settings on a RunConfig."""
    pol = cfg.policy.digest_fields()
    a = list(cfg.constants.a_coeffs)
    cbar = dict(cfg.constants.cbar)
    euler_c = cfg.constants.euler_c
    for key, v in values.items():
        if key == "x":
            cfg.x_values = list(v)
        elif key == "tau":
            cfg.tau_grid = list(v)
        elif key in pol:
            pol[key] = v
        elif key in _COEFF_KEYS:
            a[int(key[1])] = v
        elif key.startswith("cbar."):
            cbar[int(key[5:])] = v
        elif key == "euler_c":
            euler_c = v
        elif key == "out":
            cfg.output = v
        else:
            setattr(cfg, key, v)
    try:
        cfg.policy = PrecisionPolicy(**pol)
        cfg.constants = Constants(euler_c=euler_c, a_coeffs=a, cbar=cbar)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def constants_values(constants: Constants) -> dict:
    """Fitted or calibrated constants as config keys (for the stored config)."""
    out = {}
    for s in range(1, 5):
        if constants.a_coeffs[s] is not None:
            out[f"a{s}"] = float(constants.a_coeffs[s])
    for l, v in constants.cbar.items():
        out[f"cbar.{int(l)}"] = float(v)
    return out


def replace_config(cfg: RunConfig, **kw) -> RunConfig:
    return dataclasses.replace(cfg, **kw)

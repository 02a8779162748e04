"""Run configuration: a TOML document validated into :class:`RunConfig`.

Grammar (every key optional except ``model``)::

    model = "phi4"                  # built-in name, or a [model] table
    modes = "all"                   # or a mode index
    eps_list = [0.0125, 0.025, 0.05, 0.1]
    run_bs = true
    run_evolution = false
    out = "results"

    [grid1d]    L, N
    [grid2d]    Lx, Nx, Ly, Ny
    [gamma]     family, amplitude, alpha, alpha_y, x0, y0, beta, decay_C, decay_a,
                expression, parity
    [tolerances] model, residual, vanish, zero_mode, corrector_residual, max_unknowns
    [evolution] eps, branch, Ly, Ny, t_end, skip, seed, sponge_width_x,
                sponge_width_y, sponge_strength, window_fraction, sample_every

A ``[model]`` table is one of ``{kind = "well", c, depth, width}``,
``{kind = "expression", lambda_e_minus, lambda_e_plus, f, kink}`` or
``{kind = "expression", lambda_e_minus, lambda_e_plus, potential}``.
"""
from __future__ import annotations

import difflib
import re
import sys
from dataclasses import dataclass, field

from .errors import ConfigValidationError, ParseError
from .gamma import GammaSpec, gamma_from_config
from .models import BUILTINS, FieldModel, builtin, model_from_expressions, potential_well
from .operator1d import Grid1D

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_EPS = (0.0125, 0.025, 0.05, 0.1)

_TOP = {"model", "modes", "eps_list", "run_bs", "run_evolution", "out",
        "grid1d", "grid2d", "gamma", "tolerances", "evolution"}
_TABLES = {
    "grid1d": {"L": 20.0, "N": 2001},
    "grid2d": {"Lx": 10.0, "Nx": 201, "Ly": 8.0, "Ny": 161},
    "tolerances": {"model": 1e-6, "residual": 1e-10, "vanish": 1e-12, "zero_mode": 5e-3,
                   "corrector_residual": 1e-2, "max_unknowns": 250000},
    "evolution": {"eps": 0.2, "branch": 1, "Ly": 60.0, "Ny": 1201, "t_end": 300.0, "skip": 20.0,
                  "seed": "mode", "sponge_width_x": 2.5, "sponge_width_y": 12.0,
                  "sponge_strength": 1.0, "window_fraction": 0.5, "sample_every": 200},
}
_GAMMA_KEYS = {"family", "amplitude", "alpha", "alpha_y", "x0", "y0", "beta", "decay_C", "decay_a",
               "expression", "parity"}
_MODEL_KEYS = {"kind", "name", "c", "depth", "width", "lambda_e_minus", "lambda_e_plus", "f", "kink",
               "potential"}
_INT_FIELDS = {"grid1d.N", "grid2d.Nx", "grid2d.Ny", "evolution.Ny", "evolution.branch",
               "evolution.sample_every", "tolerances.max_unknowns"}


@dataclass(frozen=True)
class RunConfig:
    model: dict
    grid1d: dict
    grid2d: dict
    gamma: dict
    modes: str | int = "all"
    eps_list: tuple = DEFAULT_EPS
    run_bs: bool = True
    run_evolution: bool = False
    tolerances: dict = field(default_factory=lambda: dict(_TABLES["tolerances"]))
    evolution: dict = field(default_factory=lambda: dict(_TABLES["evolution"]))
    out: str = "results"

    def field_model(self) -> FieldModel:
        return build_model(self.model)

    def gamma_spec(self) -> GammaSpec:
        return gamma_from_config(self.gamma)

    def grids(self) -> tuple[Grid1D, Grid1D, Grid1D]:
        g1, g2 = self.grid1d, self.grid2d
        return Grid1D(g1["L"], g1["N"]), Grid1D(g2["Lx"], g2["Nx"]), Grid1D(g2["Ly"], g2["Ny"])

    def as_dict(self) -> dict:
        return {"model": self.model, "grid1d": self.grid1d, "grid2d": self.grid2d, "gamma": self.gamma,
                "modes": self.modes, "eps_list": list(self.eps_list), "run_bs": self.run_bs,
                "run_evolution": self.run_evolution, "tolerances": self.tolerances,
                "evolution": self.evolution}


def build_model(block: dict) -> FieldModel:
    kind = block["kind"]
    if kind == "builtin":
        return builtin(block["name"])
    if kind == "well":
        return potential_well(block["c"], block["depth"], block.get("width", 1.0), block.get("name"))
    return model_from_expressions(block.get("name", "custom"), block["lambda_e_minus"], block["lambda_e_plus"],
                                  f=block.get("f"), kink=block.get("kink"), potential=block.get("potential"))


def _locate(text: str, key: str) -> tuple[int | None, int | None]:
    m = re.search(rf"(?m)(^|[\s{{,.])({re.escape(key)})\s*=", text)
    if m is None:
        return None, None
    start = m.start(2)
    line = text.count("\n", 0, start) + 1
    return line, start - (text.rfind("\n", 0, start) + 1) + 1


def _reject_unknown(text: str, keys, allowed, prefix: str = "") -> None:
    for key in keys:
        if key not in allowed:
            close = difflib.get_close_matches(key, sorted(allowed), n=1)
            hint = f"; did you mean '{prefix}{close[0]}'?" if close else ""
            line, col = _locate(text, key)
            raise ParseError(f"unknown key '{prefix}{key}'{hint}", line, col)


def _number(name: str, value, positive: bool = True, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(name, f"expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise ConfigValidationError(name, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigValidationError(name, f"must be positive, got {value!r}")
    return value


def _table(text: str, raw: dict, name: str) -> dict:
    block = raw.get(name, {})
    if not isinstance(block, dict):
        raise ConfigValidationError(name, "expected a table")
    defaults = _TABLES[name]
    _reject_unknown(text, block, defaults, f"{name}.")
    out = dict(defaults)
    out.update(block)
    for key, default in defaults.items():
        full = f"{name}.{key}"
        if isinstance(default, str):
            continue
        if full == "evolution.branch":
            if out[key] not in (1, -1):
                raise ConfigValidationError(full, "must be 1 or -1")
            continue
        out[key] = _number(full, out[key], integer=full in _INT_FIELDS)
        if full not in _INT_FIELDS:
            out[key] = float(out[key])
    return out


def _model_block(text: str, value) -> dict:
    if isinstance(value, str):
        if value not in BUILTINS:
            raise ConfigValidationError("model", f"unknown built-in {value!r}; choose from {sorted(BUILTINS)}")
        return {"kind": "builtin", "name": value}
    if not isinstance(value, dict):
        raise ConfigValidationError("model", "expected a built-in name or a table")
    _reject_unknown(text, value, _MODEL_KEYS, "model.")
    block = dict(value)
    kind = block.setdefault("kind", "expression")
    if kind == "well":
        for key in ("c", "depth"):
            if key not in block:
                raise ConfigValidationError(f"model.{key}", "required for kind = 'well'")
            _number(f"model.{key}", block[key], positive=False)
        _number("model.width", block.get("width", 1.0))
    elif kind == "expression":
        for key in ("lambda_e_minus", "lambda_e_plus"):
            if key not in block:
                raise ConfigValidationError(f"model.{key}", "required for an expression model")
            _number(f"model.{key}", block[key], positive=False)
        if "potential" not in block and not ("f" in block and "kink" in block):
            raise ConfigValidationError("model", "give 'potential', or both 'f' and 'kink'")
    else:
        raise ConfigValidationError("model.kind", f"expected 'well' or 'expression', got {kind!r}")
    return block


def _gamma_block(text: str, value) -> dict:
    if not isinstance(value, dict):
        raise ConfigValidationError("gamma", "expected a table")
    _reject_unknown(text, value, _GAMMA_KEYS, "gamma.")
    block = dict(value)
    family = block.setdefault("family", "x-gauss")
    families = ("x-gauss", "y-gauss", "xy-gauss", "x-plus-y-gauss", "custom")
    if family not in families:
        raise ConfigValidationError("gamma.family", f"expected one of {list(families)}, got {family!r}")
    if family == "custom":
        for key in ("expression", "parity", "decay_C"):
            if key not in block:
                raise ConfigValidationError(f"gamma.{key}", "required for a custom profile")
    else:
        for key in ("expression", "parity"):
            if key in block:
                raise ConfigValidationError(f"gamma.{key}", "only valid for family = 'custom'")
    for key in ("alpha", "alpha_y", "decay_C", "decay_a"):
        if key in block:
            _number(f"gamma.{key}", block[key])
    for key in ("amplitude", "x0", "y0", "beta"):
        if key in block:
            _number(f"gamma.{key}", block[key], positive=False)
    return block


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed config: {exc.msg if hasattr(exc, 'msg') else exc}",
                         getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None
    _reject_unknown(text, raw, _TOP)
    if "model" not in raw:
        raise ConfigValidationError("model", "required")
    model = _model_block(text, raw["model"])
    gamma = _gamma_block(text, raw.get("gamma", {}))
    grid1d = _table(text, raw, "grid1d")
    grid2d = _table(text, raw, "grid2d")
    for name, n in (("grid1d.N", grid1d["N"]), ("grid2d.Nx", grid2d["Nx"]), ("grid2d.Ny", grid2d["Ny"])):
        if n < 3 or n % 2 == 0:
            raise ConfigValidationError(name, f"must be odd and >= 3, got {n}")
    tolerances = _table(text, raw, "tolerances")
    evolution = _table(text, raw, "evolution")
    if evolution["seed"] not in ("mode", "gaussian"):
        raise ConfigValidationError("evolution.seed", "expected 'mode' or 'gaussian'")
    if evolution["Ny"] % 2 == 0:
        raise ConfigValidationError("evolution.Ny", "must be odd")
    if not 0 < evolution["window_fraction"] < 1:
        raise ConfigValidationError("evolution.window_fraction", "must lie in (0, 1)")

    modes = raw.get("modes", "all")
    if not (modes == "all" or (isinstance(modes, int) and not isinstance(modes, bool) and modes >= 0)):
        raise ConfigValidationError("modes", f"expected 'all' or a non-negative index, got {modes!r}")
    eps_list = raw.get("eps_list", list(DEFAULT_EPS))
    if not isinstance(eps_list, list) or not eps_list:
        raise ConfigValidationError("eps_list", "expected a non-empty list")
    for e in eps_list:
        _number("eps_list", e)
    if any(b <= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigValidationError("eps_list", "must be strictly ascending")
    flags = {}
    for key, default in (("run_bs", True), ("run_evolution", False)):
        flags[key] = raw.get(key, default)
        if not isinstance(flags[key], bool):
            raise ConfigValidationError(key, "expected true or false")
    out = raw.get("out", "results")
    if not isinstance(out, str):
        raise ConfigValidationError("out", "expected a path string")
    return RunConfig(model, grid1d, grid2d, gamma, modes, tuple(float(e) for e in eps_list),
                     flags["run_bs"], flags["run_evolution"], tolerances, evolution, out)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

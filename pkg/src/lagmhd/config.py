"""Strict sectioned ``key = value`` run configuration.

Grammar is the INI subset understood by :mod:`configparser` (no
interpolation, no duplicate keys, ``#``/``;`` comments). Keys are case
sensitive. Every section and key below is optional except ``grid.L``,
``grid.n_cells`` and ``scheme.t_end``::

    [grid]      domain = full|half   L   n_cells
    [problem]   regime = cauchy|dirichlet|neumann
    [params]    mu1 mu2 alpha beta kappa0 lambda nu R cv        (default 1,0,0,0,1,1,1,1,1)
    [scheme]    t_end dt_max=0.01 cfl=0.5 integrator=semi-implicit|explicit
                record_stride=1 positivity_floor=1e-10 magnetic=true
    [initial]   profile = far_field|gaussian|tabulated
                amp_v amp_u amp_theta amp_b1 amp_b2 amp_w1 amp_w2 center width   (gaussian)
                path                                                             (tabulated CSV)
    [probes]    points = comma separated coordinates
    [checks]    entropy_delta=0.05 reconstruct=false reconstruct_tol=0.05
    [mms]       case levels=3 t_end=0.2 dt_coeff=1.0
    [output]    dir = out
"""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    TABULATED_COLUMNS,
    DomainKind,
    Grid,
    Params,
    Profile,
    ProblemType,
    far_field_profile,
    gaussian_profile,
    tabulated_profile,
)
from .solver import SchemeConfig


class ConfigError(ValueError):
    pass


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(s):
    f = float(s)
    if f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _bool(s):
    low = s.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError("not a boolean")


def _floats(s):
    return tuple(_float(p) for p in s.split(",") if p.strip())


def _choice(*options):
    def parse(s):
        s = s.strip()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s

    return parse


SCHEMA = {
    "grid": {"domain": _choice("full", "half"), "L": _float, "n_cells": _int},
    "problem": {"regime": _choice(*(p.value for p in ProblemType))},
    "params": {k: _float for k in ("mu1", "mu2", "alpha", "beta", "kappa0", "lambda", "nu", "R", "cv")},
    "scheme": {
        "t_end": _float,
        "dt_max": _float,
        "cfl": _float,
        "integrator": _choice("semi-implicit", "explicit"),
        "record_stride": _int,
        "positivity_floor": _float,
        "magnetic": _bool,
    },
    "initial": {
        "profile": _choice("far_field", "gaussian", "tabulated"),
        **{k: _float for k in ("amp_v", "amp_u", "amp_theta", "amp_b1", "amp_b2", "amp_w1", "amp_w2", "center", "width")},
        "path": str,
    },
    "probes": {"points": _floats},
    "checks": {"entropy_delta": _float, "reconstruct": _bool, "reconstruct_tol": _float},
    "mms": {"case": str, "levels": _int, "t_end": _float, "dt_coeff": _float},
    "output": {"dir": str},
}

REQUIRED = (("grid", "L"), ("grid", "n_cells"), ("scheme", "t_end"))


@dataclass(frozen=True)
class InitialSpec:
    profile: str = "far_field"
    options: dict = field(default_factory=dict)
    path: Path | None = None


@dataclass(frozen=True)
class ChecksConfig:
    entropy_delta: float = 0.05
    reconstruct: bool = False
    reconstruct_tol: float = 0.05


@dataclass(frozen=True)
class MMSConfig:
    case: str | None = None
    levels: int = 3
    t_end: float = 0.2
    dt_coeff: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    problem: ProblemType
    params: Params
    scheme: SchemeConfig
    initial: InitialSpec
    probes: tuple[float, ...]
    checks: ChecksConfig
    mms: MMSConfig
    output_dir: Path

    def profile(self) -> Profile:
        return build_profile(self.initial)


def build_profile(spec: InitialSpec) -> Profile:
    if spec.profile == "far_field":
        return far_field_profile()
    if spec.profile == "gaussian":
        o = spec.options
        return gaussian_profile(
            amp_v=o.get("amp_v", 0.0),
            amp_u=o.get("amp_u", 0.0),
            amp_theta=o.get("amp_theta", 0.5),
            amp_b=(o.get("amp_b1", 0.0), o.get("amp_b2", 0.0)),
            amp_w=(o.get("amp_w1", 0.0), o.get("amp_w2", 0.0)),
            center=o.get("center", 0.0),
            width=o.get("width", 1.0),
        )
    return tabulated_profile(read_table(spec.path))


def read_table(path: Path) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"initial.path: cannot read {path}: {exc.strerror}") from None
    if len(rows) < 3:
        raise ConfigError("initial.path: table needs a header and at least two rows")
    header = [h.strip() for h in rows[0]]
    for h in header:
        if h not in TABULATED_COLUMNS:
            raise ConfigError(f"initial.path: unknown column {h!r}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"initial.path: {exc}") from None
    return {h: data[:, i] for i, h in enumerate(header)}


def _read_parser(text: str, source: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, strict=True, default_section="__no_default__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: key outside any [section]") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate key {exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate section [{exc.section}]") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{source}: line {lineno}: cannot parse {line.strip()!r}") from None
    return cp


def parse_config_text(text: str, source: str = "<config>", base_dir: Path | None = None) -> RunConfig:
    cp = _read_parser(text, source)
    values: dict[str, dict] = {s: {} for s in SCHEMA}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            try:
                values[section][key] = SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: invalid value {raw!r} ({exc})") from None
    for section, key in REQUIRED:
        if key not in values[section]:
            raise ConfigError(f"{section}.{key} is required")
    return _build(values, base_dir or Path("."))


def _build(values, base_dir: Path) -> RunConfig:
    g, pr, pa, sc = values["grid"], values["problem"], values["params"], values["scheme"]
    problem = ProblemType(pr.get("regime", "cauchy"))
    domain = g.get("domain", problem.domain_kind.value)
    if DomainKind(domain) is not problem.domain_kind:
        raise ConfigError(f"grid.domain: {domain!r} does not match problem.regime {problem.value!r}")
    if not g["L"] > 0:
        raise ConfigError("grid.L: must be positive")
    if g["n_cells"] < 4:
        raise ConfigError("grid.n_cells: must be an integer >= 4")
    grid = Grid(DomainKind(domain), g["L"], g["n_cells"])

    pkw = {("lam" if k == "lambda" else k): v for k, v in pa.items()}
    try:
        params = Params(**pkw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    checks_for_scheme = {
        "cfl": lambda v: 0 < v <= 1,
        "dt_max": lambda v: v > 0,
        "t_end": lambda v: v > 0,
        "record_stride": lambda v: v >= 1,
        "positivity_floor": lambda v: v >= 0,
    }
    for key, ok in checks_for_scheme.items():
        if key in sc and not ok(sc[key]):
            raise ConfigError(f"scheme.{key}: value {sc[key]} out of range")
    scheme = SchemeConfig(**sc)

    ini = dict(values["initial"])
    profile = ini.pop("profile", "far_field")
    path = ini.pop("path", None)
    if profile == "tabulated":
        if path is None:
            raise ConfigError("initial.path is required for the tabulated profile")
        path = Path(path)
        if not path.is_absolute():
            path = base_dir / path
    elif path is not None:
        raise ConfigError("initial.path is only valid with profile = tabulated")
    if profile != "gaussian" and ini:
        raise ConfigError(f"initial.{sorted(ini)[0]} is only valid with profile = gaussian")
    if "width" in ini and not ini["width"] > 0:
        raise ConfigError("initial.width: must be positive")
    initial = InitialSpec(profile, ini, path)

    probes = values["probes"].get("points", ())
    for N in probes:
        if not grid.x_left <= N <= grid.x_right:
            raise ConfigError(f"probes.points: {N} lies outside the domain")
    checks = ChecksConfig(**values["checks"])
    if checks.reconstruct and not probes:
        raise ConfigError("checks.reconstruct: probes required")
    if params.mu2 != 0 and params.alpha != 0 and probes:
        raise ConfigError("probes.points: the representation of v needs constant viscosity (mu2 = 0 or alpha = 0)")
    mms = MMSConfig(**values["mms"])
    if mms.levels < 2:
        raise ConfigError("mms.levels: need at least 2 levels")
    out = Path(values["output"].get("dir", "out"))
    return RunConfig(grid, problem, params, scheme, initial, tuple(probes), checks, mms, out)


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not valid UTF-8") from None
    return parse_config_text(text, str(path), path.parent)

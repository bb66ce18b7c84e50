"""Scenario configuration: a single JSON document with ``"version": 1``.

Rational numbers may be written as JSON integers or as ``"p/q"`` strings;
expressions use the text grammar of :func:`vertframe.symexpr.parse`.
Bundled presets live in ``vertframe/presets`` as plain JSON files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Optional

from . import linalg
from .geobundle import BundleChart
from .symexpr import CoordName, Expr, ParseError, coord_from_name, parse

SEED_ENV = "VERTFRAME_SEED"
SCENARIOS = ("linear-momentum", "angular-momentum", "affine", "reparam", "geodesic")


class ConfigError(ValueError):
    pass


def parse_rational(value, where: str = "value") -> Fraction:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a rational number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator()
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"{where}: expected a rational number, got {value!r}")


def parse_matrix(rows, size: int, where: str) -> List[List[Fraction]]:
    if not isinstance(rows, list) or len(rows) != size or any(not isinstance(r, list) or len(r) != size for r in rows):
        raise ConfigError(f"{where}: expected a {size} x {size} matrix")
    return [[parse_rational(v, where) for v in r] for r in rows]


def parse_expr(text, where: str) -> Expr:
    if isinstance(text, (int,)) and not isinstance(text, bool):
        return Expr.lift(text)
    if not isinstance(text, str):
        raise ConfigError(f"{where}: expected an expression string")
    try:
        return parse(text)
    except ParseError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass
class Generator:
    name: str
    components: List[Expr]


@dataclass
class ScenarioConfig:
    n: int = 2
    k: int = 2
    scenario: Optional[str] = None
    eta: Optional[List[List[Fraction]]] = None
    iota: Optional[List[List[Fraction]]] = None
    gamma: Optional[List[List[Expr]]] = None
    generators: List[Generator] = field(default_factory=list)
    initial: Dict[CoordName, Fraction] = field(default_factory=dict)
    t_max: Fraction = Fraction(10)
    dt: Fraction = Fraction(1, 1000)
    checks: Optional[List[str]] = None
    outputs: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    pairs: int = 50
    instances: int = 20
    theta_signs: Dict[str, int] = field(default_factory=lambda: {"momentum": 1, "volume": 1})
    params: Dict[str, object] = field(default_factory=dict)

    @property
    def chart(self) -> BundleChart:
        return BundleChart(self.n, self.k)

    def metric_blocks(self):
        eta = self.eta if self.eta is not None else linalg.identity(self.n)
        iota = self.iota if self.iota is not None else linalg.identity(self.k)
        return eta, iota, self.gamma

    def resolved_seed(self) -> int:
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                return int(env)
            except ValueError as exc:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
        return self.seed if self.seed is not None else 0


_KNOWN_KEYS = {
    "version", "n", "k", "scenario", "eta", "iota", "gamma", "generators", "initial", "integrator",
    "checks", "outputs", "seed", "pairs", "instances", "theta_signs", "params", "description",
}


def config_from_dict(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("version") != 1:
        raise ConfigError(f"unsupported config version {doc.get('version')!r} (expected 1)")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = ScenarioConfig()
    for key in ("n", "k", "pairs", "instances"):
        if key in doc:
            v = doc[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{key} must be a positive integer")
            setattr(cfg, key, v)
    if "seed" in doc:
        if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool):
            raise ConfigError("seed must be an integer")
        cfg.seed = doc["seed"]
    if "scenario" in doc:
        if doc["scenario"] not in SCENARIOS:
            raise ConfigError(f"unknown scenario {doc['scenario']!r}")
        cfg.scenario = doc["scenario"]
    chart = BundleChart(cfg.n, cfg.k)
    if "eta" in doc:
        cfg.eta = parse_matrix(doc["eta"], cfg.n, "eta")
    if "iota" in doc:
        cfg.iota = parse_matrix(doc["iota"], cfg.k, "iota")
    for name, M in (("eta", cfg.eta), ("iota", cfg.iota)):
        if M is not None:
            if not linalg.is_symmetric(M):
                raise ConfigError(f"{name} must be symmetric")
            if linalg.det(M) == 0:
                raise ConfigError(f"{name} must be invertible")
    if "gamma" in doc:
        g = doc["gamma"]
        if not isinstance(g, list) or len(g) != cfg.k or any(not isinstance(r, list) or len(r) != cfg.n for r in g):
            raise ConfigError(f"gamma must be a {cfg.k} x {cfg.n} array of expressions")
        cfg.gamma = [[parse_expr(v, f"gamma[{a}][{i}]") for i, v in enumerate(r)] for a, r in enumerate(g)]
        _check_coords(chart, [e for r in cfg.gamma for e in r], chart.y_coords, "gamma")
    for idx, gen in enumerate(doc.get("generators", [])):
        if not isinstance(gen, dict) or "components" not in gen:
            raise ConfigError(f"generators[{idx}] needs a components list")
        comps = gen["components"]
        if not isinstance(comps, list) or len(comps) != chart.dim:
            raise ConfigError(f"generators[{idx}] needs {chart.dim} components")
        exprs = [parse_expr(c, f"generators[{idx}].components[{j}]") for j, c in enumerate(comps)]
        _check_coords(chart, exprs, chart.y_coords, f"generators[{idx}]")
        cfg.generators.append(Generator(str(gen.get("name", f"g{idx}")), exprs))
    for name, value in doc.get("initial", {}).items():
        c = coord_from_name(name)
        if c.kind == "Param":
            raise ConfigError(f"initial: {name!r} is not a coordinate name")
        try:
            c.check_dims(cfg.n, cfg.k)
        except ValueError as exc:
            raise ConfigError(f"initial: {exc}") from exc
        cfg.initial[c] = parse_rational(value, f"initial.{name}")
    integ = doc.get("integrator", {})
    if "t_max" in integ:
        cfg.t_max = parse_rational(integ["t_max"], "integrator.t_max")
    if "dt" in integ:
        cfg.dt = parse_rational(integ["dt"], "integrator.dt")
    if cfg.dt <= 0:
        raise ConfigError("integrator.dt must be positive")
    if cfg.t_max < 0:
        raise ConfigError("integrator.t_max must be nonnegative")
    if "checks" in doc:
        if not isinstance(doc["checks"], list):
            raise ConfigError("checks must be a list of names")
        cfg.checks = [str(c) for c in doc["checks"]]
    cfg.outputs = {str(k): str(v) for k, v in doc.get("outputs", {}).items()}
    signs = doc.get("theta_signs", {})
    for key in signs:
        if key not in ("momentum", "volume") or signs[key] not in (1, -1):
            raise ConfigError("theta_signs entries must be momentum/volume set to 1 or -1")
        cfg.theta_signs[key] = signs[key]
    cfg.params = dict(doc.get("params", {}))
    return cfg


def _check_coords(chart: BundleChart, exprs, allowed, where: str) -> None:
    for e in exprs:
        try:
            chart.check_expr(e, allowed)
            for v in e.variables():
                if v.kind == "Param":
                    raise ValueError(f"free symbol {v} is not allowed")
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text, path)


def loads_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)


def preset_names() -> List[str]:
    return sorted(p.name[:-5] for p in resources.files("vertframe.presets").iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> ScenarioConfig:
    res = resources.files("vertframe.presets").joinpath(f"{name}.json")
    if not res.is_file():
        raise ConfigError(f"no bundled preset named {name!r}")
    return loads_config(res.read_text(encoding="utf-8"), f"preset {name}")

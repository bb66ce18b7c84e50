"""The worked scenarios behind ``vertframe run``.

Each runner takes a :class:`~vertframe.config.ScenarioConfig` and returns a
:class:`ScenarioResult`: a CSV table (header plus rows of floats) and a JSON
summary.  Outputs contain no timings, so identical configs give identical
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from . import linalg
from .config import ConfigError, ScenarioConfig, format_rational, parse_expr, parse_rational
from .flows import (
    AffineScenario,
    closed_form_flow,
    geodesic_transport_run,
    integrate_rk4,
    parallel_axis_analysis,
    reparam_momentum_run,
)
from .symobs import (
    KKMetric,
    NotSolvableError,
    hamiltonian_family_solve,
    invariance_check,
    no_torsion_fields,
    no_torsion_residual,
    st2_from_metric,
)
from .vframe import FramePoint, momentum_components

DRIFT_TOL = 1e-9
CLOSED_FORM_TOL = 1e-9


@dataclass
class ScenarioResult:
    name: str
    header: List[str]
    rows: List[List[float]]
    summary: Dict[str, object]
    passed: bool
    checks: Dict[str, bool] = field(default_factory=dict)


def initial_frame(cfg: ScenarioConfig) -> FramePoint:
    """Frame point from the config; unbound coordinates default to 0 and an identity coframe."""
    ch = cfg.chart
    point = {c: Fraction(0) for c in ch.y_coords}
    for mu in range(ch.dim):
        for a in range(ch.dim):
            c = ch.frame_coord(mu, a)
            if c is not None:
                point[c] = Fraction(1 if mu == a else 0)
    for c, v in cfg.initial.items():
        if c not in point:
            raise ConfigError(f"initial: {c} is not a coordinate of L_V Y")
        point[c] = v
    try:
        return FramePoint.from_point(ch, point)
    except ValueError as exc:
        raise ConfigError(f"initial: {exc}") from exc


def _metric(cfg: ScenarioConfig) -> KKMetric:
    eta, iota, gamma = cfg.metric_blocks()
    return KKMetric(cfg.chart, eta, iota, gamma)


def _rows(times, columns) -> List[List[float]]:
    cols = [np.asarray(c, dtype=float) for c in columns]
    return [[float(t)] + [float(c[i]) for c in cols] for i, t in enumerate(times)]


def run_conservation(cfg: ScenarioConfig) -> ScenarioResult:
    """Flows of the metric Hamiltonian fields X^mu and the drift of each J^mu along its own flow."""
    ch = cfg.chart
    if not cfg.generators:
        raise ConfigError("scenario needs at least one generator")
    G = _metric(cfg)
    obs = st2_from_metric(G)
    fields = hamiltonian_family_solve(obs).fields
    w0 = initial_frame(cfg)
    start_exact = w0.as_point(ch)
    start = {c: float(v) for c, v in start_exact.items()}
    t_max, dt = float(cfg.t_max), float(cfg.dt)
    trajs = [integrate_rk4(fields[mu], start, t_max, dt, coords=list(ch.lvy_coords), frame_chart=ch) for mu in range(ch.dim)]
    header = ["t"]
    values, drifts, summary_gens = [], [], {}
    all_ok = True
    for gen in cfg.generators:
        xi = ch.vector_field(gen.components)
        invariant = invariance_check(obs, xi)
        comps = momentum_components(xi)
        gen_drifts = []
        for mu in range(ch.dim):
            series = trajs[mu].evaluate(comps[mu])
            values.append(series)
            drifts.append(series - series[0])
            gen_drifts.append(float(np.max(np.abs(series - series[0]))))
        header += [f"J{mu}_{gen.name}" for mu in range(ch.dim)]
        conserved = all(d <= DRIFT_TOL for d in gen_drifts)
        all_ok = all_ok and (conserved or not invariant)
        summary_gens[gen.name] = {"invariant": invariant, "max_drift": gen_drifts, "conserved": conserved}
    header += [f"drift{mu}_{gen.name}" for gen in cfg.generators for mu in range(ch.dim)]
    endpoint_err = None
    if G.is_constant():
        ginv = [[e.constant_value() for e in row] for row in G.contravariant()]
        errs = []
        for mu in range(ch.dim):
            exact = closed_form_flow("constant-metric", {"chart": ch, "ginv": ginv, "mu": mu, "point": start_exact}, cfg.t_max)
            end = trajs[mu].endpoint()
            errs.append(max(abs(float(exact[c]) - end[c]) for c in end))
        endpoint_err = max(errs)
        all_ok = all_ok and endpoint_err <= CLOSED_FORM_TOL
    summary = {
        "scenario": cfg.scenario,
        "n": ch.n,
        "k": ch.k,
        "t_max": format_rational(cfg.t_max),
        "dt": format_rational(cfg.dt),
        "generators": summary_gens,
        "closed_form_endpoint_error": endpoint_err,
        "passed": all_ok,
    }
    times = trajs[0].times
    return ScenarioResult(cfg.scenario, header, _rows(times, values + drifts), summary, all_ok)


def run_affine(cfg: ScenarioConfig) -> ScenarioResult:
    ch = cfg.chart
    if ch.n != 1:
        raise ConfigError("affine scenario needs n = 1")
    try:
        k_mat = [[parse_rational(v, "params.k_mat") for v in row] for row in cfg.params.get("k_mat", linalg.zeros(ch.k, ch.k))]
        v = [parse_rational(x, "params.v") for x in cfg.params.get("v", [0] * ch.k)]
        lam_max = parse_rational(cfg.params.get("lambda_max", 1), "params.lambda_max")
        _, iota, _ = cfg.metric_blocks()
        scen = AffineScenario(iota, k_mat, v, initial_frame(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    exact = parallel_axis_analysis(scen, lam_max, samples=11)
    num = parallel_axis_analysis(scen, float(lam_max), dt=float(cfg.dt))
    exact_dev = {k: max(abs(Fraction(d) - Fraction(e)) for d, e in zip(exact.drifts[k], exact.expected[k])) for k in exact.drifts}
    float_dev = num.max_deviation_from_expected()
    j0_exact_zero = all(Fraction(d) == 0 for d in exact.drifts["J0"]) and all(Fraction(v) == 0 for v in exact.values["J0"])
    ok = all(d == 0 for d in exact_dev.values()) and all(d <= 1e-12 for d in float_dev.values()) and j0_exact_zero
    labels = list(num.drifts)
    header = ["lambda"] + labels + [f"drift_{l}" for l in labels] + [f"correction_{l}" for l in labels] + [f"deviation_{l}" for l in labels]
    cols = [num.values[l] for l in labels] + [num.drifts[l] for l in labels] + [num.expected[l] for l in labels]
    cols += [np.asarray(num.drifts[l], dtype=float) - np.asarray(num.expected[l], dtype=float) for l in labels]
    summary = {
        "scenario": "affine",
        "k": ch.k,
        "lambda_max": format_rational(lam_max),
        "rational_max_deviation": {k: format_rational(v) for k, v in exact_dev.items()},
        "float_max_deviation": float_dev,
        "J0_identically_zero": j0_exact_zero,
        "correction_rate": {l: format_rational(Fraction(exact.expected[l][-1]) / lam_max) if lam_max else "0" for l in labels},
        "passed": ok,
    }
    return ScenarioResult("affine", header, _rows(num.times, cols), summary, ok)


def run_reparam(cfg: ScenarioConfig) -> ScenarioResult:
    ch = cfg.chart
    if ch.n != 1:
        raise ConfigError("reparam scenario needs n = 1")
    f = parse_expr(cfg.params.get("f", "1"), "params.f")
    B = [[parse_rational(v, "params.B") for v in row] for row in cfg.params.get("B", [[0] * ch.k])]
    lam = parse_rational(cfg.params.get("lambda", 1), "params.lambda")
    try:
        report = reparam_momentum_run(f, _metric(cfg), initial_frame(cfg), float(cfg.t_max), float(cfg.dt), B=B, lam=lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    labels = list(report.values)
    header = ["t"] + labels + [f"drift_{l}" for l in labels]
    cols = [report.values[l] for l in labels] + [report.drifts[l] for l in labels]
    conserved = all(report.conserved.values())
    f_const = bool(report.notes["f_constant"])
    # a constant f is a symmetry and must be conserved; otherwise the report must flag the drift
    ok = conserved if f_const else not conserved
    summary = {
        "scenario": "reparam",
        "f": str(f),
        "conserved": conserved,
        "conserved_by_observable": report.conserved,
        "max_drift": report.max_abs(),
        "passed": bool(ok),
    }
    return ScenarioResult("reparam", header, _rows(report.times, cols), summary, bool(ok))


def run_geodesic(cfg: ScenarioConfig) -> ScenarioResult:
    G = _metric(cfg)
    try:
        fields = no_torsion_fields(G)
    except NotSolvableError as exc:
        raise ConfigError(f"geodesic scenario: {exc}") from exc
    nt_ok = not no_torsion_residual(fields)
    report = geodesic_transport_run(G, initial_frame(cfg), float(cfg.t_max), float(cfg.dt))
    traj = report.trajectory
    ok = nt_ok and report.geodesic_residual <= 1e-6 and report.transport_residual <= 1e-6 and report.energy_drift <= 1e-8
    header = ["t"] + [str(c) for c in traj.coords]
    summary = {
        "scenario": "geodesic",
        "geodesic_residual": report.geodesic_residual,
        "transport_residual": report.transport_residual,
        "energy_drift": report.energy_drift,
        "no_torsion_exact": nt_ok,
        "passed": bool(ok),
    }
    return ScenarioResult("geodesic", header, _rows(traj.times, [traj.states[:, j] for j in range(len(traj.coords))]), summary, bool(ok))


RUNNERS: Dict[str, Callable[[ScenarioConfig], ScenarioResult]] = {
    "linear-momentum": run_conservation,
    "angular-momentum": run_conservation,
    "affine": run_affine,
    "reparam": run_reparam,
    "geodesic": run_geodesic,
}


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    if cfg.scenario not in RUNNERS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    return RUNNERS[cfg.scenario](cfg)

"""Fixed-step RK4 flows, closed-form flows and conservation monitors.

Vector-field components are compiled once to float functions of a state
tuple; the integrator keeps every sample.  Two guards abort integration:
any state component above 1e12 in magnitude, and (when a chart is given) a
coframe block whose determinant falls below 1e-9.  Both raise an
:class:`IntegrationError` carrying the index of the last valid sample and
the partial trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import linalg
from .forms import VectorField
from .geobundle import BundleChart
from .symexpr import CoordName, Expr, compile_exprs, evaluate

BLOW_UP = 1e12
FRAME_DET_MIN = 1e-9


class IntegrationError(ArithmeticError):
    def __init__(self, msg: str, last_valid: int, partial: "Trajectory | None" = None):
        super().__init__(f"{msg} (last valid sample {last_valid})")
        self.last_valid = last_valid
        self.partial = partial


class IntegrationBlowUp(IntegrationError):
    pass


class SingularFrameAlongFlow(IntegrationError):
    pass


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    coords: tuple
    meta: dict = field(default_factory=dict)

    def column(self, c: CoordName) -> np.ndarray:
        return self.states[:, self.coords.index(c)]

    def point(self, i: int) -> Dict[CoordName, float]:
        return dict(zip(self.coords, (float(v) for v in self.states[i])))

    def endpoint(self) -> Dict[CoordName, float]:
        return self.point(len(self.times) - 1)

    def evaluate(self, expr: Expr) -> np.ndarray:
        f = compile_exprs([expr], self.coords)
        return np.array([f(tuple(s))[0] for s in self.states])


def _step_count(t_max: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    steps = int(round(t_max / dt))
    if abs(steps * dt - t_max) > 1e-9 * max(1.0, abs(t_max)):
        raise ValueError("t_max must be an integer multiple of dt")
    return steps


def _frame_det_fns(chart: BundleChart, coords: Sequence[CoordName]) -> Callable:
    dets = [linalg.det(chart.base_frame_matrix())]
    n = chart.n
    dets.append(linalg.det([[chart.frame_entry(n + a, n + b) for b in range(chart.k)] for a in range(chart.k)]))
    return compile_exprs(dets, coords)


def integrate_rk4(
    field_: VectorField | Sequence[Expr],
    start: Mapping[CoordName, float],
    t_max: float,
    dt: float,
    coords: Optional[Sequence[CoordName]] = None,
    frame_chart: Optional[BundleChart] = None,
) -> Trajectory:
    """Classical fixed-step RK4 for the ODE dz/dt = field(z).

    ``field_`` is a VectorField or a sequence of component expressions aligned
    with ``coords``.  Coordinates absent from the field stay constant.
    """
    coords = tuple(coords) if coords is not None else tuple(sorted(start, key=lambda c: c.key))
    missing = [c for c in coords if c not in start]
    if missing:
        raise ValueError(f"start point does not bind {sorted(map(str, missing))}")
    if isinstance(field_, VectorField):
        stray = [c for c in field_ if c not in coords]
        if stray:
            raise ValueError(f"field has components along {sorted(map(str, stray))} outside the state")
        exprs = [field_[c] for c in coords]
    else:
        exprs = [Expr.lift(e) for e in field_]
        if len(exprs) != len(coords):
            raise ValueError("component count does not match the coordinates")
    rhs = compile_exprs(exprs, coords)
    steps = _step_count(t_max, dt)
    dets = _frame_det_fns(frame_chart, coords) if frame_chart is not None else None

    dim = len(coords)
    states = np.empty((steps + 1, dim))
    s = [float(start[c]) for c in coords]
    states[0] = s
    half = dt / 2.0
    sixth = dt / 6.0
    comp = [0.0] * dim

    def fail(cls, msg, i):
        partial = Trajectory(np.arange(i + 1) * dt, states[: i + 1].copy(), coords, {"integrator": "rk4", "dt": dt})
        raise cls(msg, i, partial)

    if dets is not None and min(abs(v) for v in dets(s)) < FRAME_DET_MIN:
        fail(SingularFrameAlongFlow, "singular frame at start", 0)
    for i in range(1, steps + 1):
        k1 = rhs(s)
        k2 = rhs([a + half * b for a, b in zip(s, k1)])
        k3 = rhs([a + half * b for a, b in zip(s, k2)])
        k4 = rhs([a + dt * b for a, b in zip(s, k3)])
        # compensated summation keeps long runs of small increments from losing bits
        inc = [sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4) - c for b1, b2, b3, b4, c in zip(k1, k2, k3, k4, comp)]
        nxt = [a + b for a, b in zip(s, inc)]
        comp = [(n_ - a) - b for n_, a, b in zip(nxt, s, inc)]
        s = nxt
        if any(not math.isfinite(v) or abs(v) > BLOW_UP for v in s):
            fail(IntegrationBlowUp, "integration blow-up", i - 1)
        if dets is not None and min(abs(v) for v in dets(s)) < FRAME_DET_MIN:
            fail(SingularFrameAlongFlow, "singular frame along the flow", i - 1)
        states[i] = s
    times = np.arange(steps + 1) * dt
    return Trajectory(times, states, coords, {"integrator": "rk4", "dt": dt})


def rk4_convergence_slope(dts: Sequence[float] = (0.2, 0.1, 0.05, 0.025), t_max: float = 1.0) -> tuple:
    """Least-squares slope of log(error) against log(dt) for x' = x, x(0) = 1."""
    from .symexpr import x

    c = x(1)
    errors = []
    for dt in dts:
        traj = integrate_rk4([Expr.lift(c)], {c: 1.0}, t_max, dt, coords=[c])
        errors.append(abs(traj.states[-1, 0] - math.exp(t_max)))
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return slope, errors


# ---------------------------------------------------------------------------
# Closed-form flows
# ---------------------------------------------------------------------------

CLOSED_FORM_CASES = ("constant-metric", "angular-base", "angular-fiber", "affine-time", "affine-fiber")


def closed_form_flow(case: str, params: Mapping, t) -> Dict[CoordName, object]:
    """Exact flow of X^mu for a constant contravariant metric; the frame stays constant.

    params: ``chart`` (BundleChart), ``ginv`` ((n+k) x (n+k) constant matrix),
    ``mu`` (0-based value slot) and ``point`` (mapping of all L_V Y coordinates).
    Y^lam(t) = Y^lam + t G^(lam nu) P^mu_nu.
    """
    if case not in CLOSED_FORM_CASES:
        raise ValueError(f"unknown case id {case!r}")
    chart: BundleChart = params["chart"]
    mu = params["mu"]
    ginv = params["ginv"]
    point = dict(params["point"])
    if case.endswith("base") and not mu < chart.n:
        raise ValueError("base case needs a base slot")
    if case.endswith("fiber") and not mu >= chart.n:
        raise ValueError("fiber case needs a fiber slot")
    if case.startswith("affine") and chart.n != 1:
        raise ValueError("affine cases need n = 1")
    if case == "affine-time" and mu != 0:
        raise ValueError("affine-time is the flow of X^0")
    P_row = [0 if chart.frame_coord(mu, a) is None else point[chart.frame_coord(mu, a)] for a in range(chart.dim)]
    out = dict(point)
    for lam in range(chart.dim):
        vel = sum((Fraction(ginv[lam][nu]) * P_row[nu] if not isinstance(P_row[nu], float) else float(ginv[lam][nu]) * P_row[nu] for nu in range(chart.dim)), 0)
        out[chart.y_coord(lam)] = point[chart.y_coord(lam)] + t * vel
    return out


# ---------------------------------------------------------------------------
# Drift reports and the worked scenarios
# ---------------------------------------------------------------------------


@dataclass
class DriftReport:
    times: np.ndarray
    values: Dict[str, np.ndarray]
    drifts: Dict[str, np.ndarray]
    expected: Dict[str, np.ndarray] = field(default_factory=dict)
    conserved: Dict[str, bool] = field(default_factory=dict)
    notes: Dict[str, object] = field(default_factory=dict)

    def max_abs(self) -> Dict[str, float]:
        return {k: float(np.max(np.abs(v))) if len(v) else 0.0 for k, v in self.drifts.items()}

    def max_deviation_from_expected(self) -> Dict[str, float]:
        return {k: float(np.max(np.abs(self.drifts[k] - e))) for k, e in self.expected.items()}


@dataclass
class AffineScenario:
    """Semidirect-product symmetry on R x R^k: generator (k_mat y + x0 v) d/dy."""

    iota: List[List]
    k_mat: List[List]
    v: List
    start: object  # FramePoint with n = 1

    def __post_init__(self):
        k = len(self.iota)
        if self.start.n != 1 or self.start.k != k:
            raise ValueError("scenario mismatch: affine scenario needs n = 1 and k matching iota")
        if len(self.k_mat) != k or len(self.v) != k:
            raise ValueError("scenario mismatch: generator sizes")
        ik = linalg.matmul(linalg.to_fractions(self.iota), linalg.to_fractions(self.k_mat))
        if any(ik[a][b] + ik[b][a] != 0 for a in range(k) for b in range(k)):
            raise ValueError("scenario mismatch: k_mat is not in o(iota)")

    @property
    def chart(self) -> BundleChart:
        return BundleChart(1, len(self.iota))

    def generator(self) -> VectorField:
        from .symexpr import const

        ch = self.chart
        comps = {}
        x0 = Expr.lift(ch.base[0])
        for a in range(ch.k):
            total = const(self.v[a]) * x0
            for b in range(ch.k):
                if self.k_mat[a][b] != 0:
                    total = total + const(self.k_mat[a][b]) * Expr.lift(ch.fiber[b])
            comps[ch.fiber[a]] = total
        return VectorField(comps, chart=ch)

    def metric(self):
        from .symobs import KKMetric

        return KKMetric(self.chart, [[1]], self.iota)


def parallel_axis_analysis(scenario: AffineScenario, lam_max, samples: int = 11, dt: Optional[float] = None) -> DriftReport:
    """J^B o F^B_lam - J^B against lam P^B_0 P^B_A v^A for every fiber slot B.

    Exact rational path when ``dt`` is None, RK4 otherwise.  Also records the
    J^0 drift along F^0.
    """
    from .symobs import hamiltonian_family_solve, st2_from_metric
    from .vframe import momentum_components

    if not isinstance(scenario, AffineScenario):
        raise ValueError("scenario mismatch")
    ch = scenario.chart
    G = scenario.metric()
    ginv = [[e.constant_value() for e in row] for row in G.contravariant()]
    fields = hamiltonian_family_solve(st2_from_metric(G)).fields
    comps = momentum_components(scenario.generator())
    w0 = scenario.start.as_point(ch)
    exact = dt is None
    if exact:
        lams = [Fraction(lam_max) * j / (samples - 1) for j in range(samples)]
    else:
        steps = _step_count(float(lam_max), dt)
        lams = list(np.arange(steps + 1) * dt)
    values, drifts, expected = {}, {}, {}
    for mu in range(ch.dim):
        label = f"J{mu}"
        if exact:
            pts = [closed_form_flow("affine-time" if mu == 0 else "affine-fiber", {"chart": ch, "ginv": ginv, "mu": mu, "point": w0}, lam) for lam in lams]
            series = [evaluate(comps[mu], p) for p in pts]
        else:
            start = {c: float(v) for c, v in w0.items()}
            traj = integrate_rk4(fields[mu], start, float(lam_max), dt, coords=list(ch.lvy_coords), frame_chart=ch)
            series = list(traj.evaluate(comps[mu]))
        j0 = evaluate(comps[mu], w0) if exact else float(evaluate(comps[mu], w0))
        values[label] = np.array(series, dtype=object if exact else float)
        drifts[label] = np.array([s - j0 for s in series], dtype=object if exact else float)
        if mu >= ch.n:
            coef = sum((w0[ch.frame_coord(mu, a)] * scenario.v[a - 1] for a in range(1, ch.dim)), 0) * w0[ch.frame_coord(mu, 0)]
            expected[label] = np.array([lam * coef for lam in lams], dtype=object if exact else float)
        else:
            expected[label] = np.array([0 * lam for lam in lams], dtype=object if exact else float)
    report = DriftReport(np.array(lams, dtype=object if exact else float), values, drifts, expected)
    for label in drifts:
        report.conserved[label] = all(v == 0 for v in drifts[label]) if exact else bool(np.max(np.abs(drifts[label].astype(float))) <= 1e-9)
    report.notes["path"] = "rational" if exact else "rk4"
    return report


@dataclass
class GeodesicReport:
    trajectory: Trajectory
    geodesic_residual: float
    transport_residual: float
    energy_drift: float


def geodesic_transport_run(G, start, t_max: float, dt: float) -> GeodesicReport:
    """Integrate the no-torsion field X^0 (n = 1) and measure the geodesic and transport residuals.

    Geodesic residual: max |Y''^A + Gamma^A_(bc) Y'^b Y'^c| with Y', Y'' from
    central differences.  Transport residual: max |P'^lam_sig - Gamma^nu_(sig rho) Y'^rho P^lam_nu|
    over the allowed frame coordinates.  Energy: G_(ab) Y'^a Y'^b with the
    velocity read from the field.
    """
    from .symobs import christoffel, no_torsion_fields

    chart = G.chart
    if chart.n != 1:
        raise ValueError("geodesic run needs n = 1")
    fields = no_torsion_fields(G)
    coords = list(chart.lvy_coords)
    w0 = start.as_point(chart) if hasattr(start, "as_point") else dict(start)
    traj = integrate_rk4(fields[0], {c: float(v) for c, v in w0.items()}, t_max, dt, coords=coords, frame_chart=chart)
    d = chart.dim
    gam = christoffel(G)
    gam_f = compile_exprs([gam[m][a][b] for m in range(d) for a in range(d) for b in range(d)], coords)
    low = G.covariant()
    vel_exprs = [fields[0][chart.y_coord(a)] for a in range(d)]
    energy_f = compile_exprs([sum((low[a][b] * vel_exprs[a] * vel_exprs[b] for a in range(d) for b in range(d)), Expr())], coords)

    S = traj.states
    ys = S[:, :d]
    ydot = (ys[2:] - ys[:-2]) / (2 * dt)
    yddot = (ys[2:] - 2 * ys[1:-1] + ys[:-2]) / (dt * dt)
    frame_idx = {}
    for lam in range(d):
        for sig in range(d):
            c = chart.frame_coord(lam, sig)
            if c is not None:
                frame_idx[(lam, sig)] = coords.index(c)
    geo_res = 0.0
    tr_res = 0.0
    for i in range(1, len(S) - 1):
        g = np.array(gam_f(tuple(S[i]))).reshape(d, d, d)
        v = ydot[i - 1]
        acc = yddot[i - 1] + np.einsum("mab,a,b->m", g, v, v)
        geo_res = max(geo_res, float(np.max(np.abs(acc))))
        P = np.zeros((d, d))
        for (lam, sig), j in frame_idx.items():
            P[lam, sig] = S[i, j]
        for (lam, sig), j in frame_idx.items():
            pdot = (S[i + 1, j] - S[i - 1, j]) / (2 * dt)
            rhs = float(np.einsum("nr,r,n->", g[:, sig, :], v, P[lam, :]))
            tr_res = max(tr_res, abs(pdot - rhs))
    energies = np.array([energy_f(tuple(s))[0] for s in S])
    return GeodesicReport(traj, geo_res, tr_res, float(np.max(np.abs(energies - energies[0]))))


def reparam_momentum_run(f: Expr | str, G, start, t_max: float, dt: float, B=None, lam=1) -> DriftReport:
    """Track J_LVY(f) = f(x0)(P^A_0 s_A + P^0_0 r_0) and J_Z(f) = p f(x0) along X^0.

    The Z point is the image of the frame under phi_(B, lam).
    """
    from .symexpr import parse
    from .symobs import hamiltonian_family_solve, st2_from_metric
    from .vframe import momentum_components, phi_exprs

    chart = G.chart
    if chart.n != 1:
        raise ValueError("reparametrization run needs n = 1")
    f_expr = parse(f) if isinstance(f, str) else Expr.lift(f)
    if any(v != chart.base[0] for v in f_expr.variables()):
        raise ValueError("f must be a polynomial in x1 only")
    xi = chart.vector_field({chart.base[0]: f_expr})
    fields = hamiltonian_family_solve(st2_from_metric(G)).fields
    B = B if B is not None else [[0] * chart.k]
    phi = phi_exprs(chart, B, lam)
    comps = momentum_components(xi)
    jz = phi[chart.momentum_coords[-1]] * f_expr
    w0 = start.as_point(chart) if hasattr(start, "as_point") else dict(start)
    traj = integrate_rk4(fields[0], {c: float(v) for c, v in w0.items()}, t_max, dt, coords=list(chart.lvy_coords), frame_chart=chart)
    values, drifts = {}, {}
    for mu in range(chart.dim):
        s = traj.evaluate(comps[mu])
        values[f"J{mu}"] = s
        drifts[f"J{mu}"] = s - s[0]
    s = traj.evaluate(jz)
    values["JZ"] = s
    drifts["JZ"] = s - s[0]
    report = DriftReport(traj.times, values, drifts)
    for label, dr in drifts.items():
        report.conserved[label] = bool(np.max(np.abs(dr)) <= 1e-9)
    report.notes["f"] = str(f_expr)
    report.notes["f_constant"] = f_expr.is_constant()
    return report

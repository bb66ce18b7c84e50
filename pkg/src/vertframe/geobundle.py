"""The configuration bundle Y -> X in a single global adapted chart.

Vector fields on Y are :class:`~vertframe.forms.VectorField` instances whose
``chart`` is a :class:`BundleChart`.  Projectable fields (base components
depending on ``x`` only) form the Lie algebra of the automorphism group of Y;
their flows commute with projection to the base.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from . import linalg
from .forms import VectorField, lie_bracket_fields
from .symexpr import (
    ZERO,
    CoordName,
    Expr,
    Poly,
    SingularEvaluationError,
    const,
    evaluate,
    parse,
    pi,
    piA,
    piAx,
    pmom,
    pscalar,
    x,
    y,
)


class ChartMismatchError(ValueError):
    pass


class NotProjectableError(ValueError):
    def __init__(self, msg: str = "not projectable"):
        super().__init__(msg)


@dataclass(frozen=True)
class BundleChart:
    """Adapted chart on R^n x R^k with the derived coordinate inventories of Y, Z and L_V Y."""

    n: int
    k: int
    base: tuple = field(init=False, repr=False, compare=False)
    fiber: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError(f"need n >= 1 and k >= 1, got n={self.n}, k={self.k}")
        object.__setattr__(self, "base", tuple(x(i) for i in range(1, self.n + 1)))
        object.__setattr__(self, "fiber", tuple(y(a) for a in range(1, self.k + 1)))

    @property
    def dim(self) -> int:
        return self.n + self.k

    @property
    def y_coords(self) -> tuple:
        return self.base + self.fiber

    @property
    def momentum_coords(self) -> tuple:
        return tuple(pmom(i, a) for i in range(1, self.n + 1) for a in range(1, self.k + 1)) + (pscalar(),)

    @property
    def z_coords(self) -> tuple:
        return self.y_coords + self.momentum_coords

    @property
    def frame_coords(self) -> tuple:
        n, k = self.n, self.k
        return (
            tuple(pi(i, j) for i in range(1, n + 1) for j in range(1, n + 1))
            + tuple(piA(a, b) for a in range(1, k + 1) for b in range(1, k + 1))
            + tuple(piAx(a, i) for a in range(1, k + 1) for i in range(1, n + 1))
        )

    @property
    def lvy_coords(self) -> tuple:
        return self.y_coords + self.frame_coords

    def y_coord(self, a: int) -> CoordName:
        """Coordinate Y^a for 0-based a (base first, then fiber)."""
        return self.base[a] if a < self.n else self.fiber[a - self.n]

    def frame_coord(self, mu: int, a: int) -> Optional[CoordName]:
        """Coordinate P^mu_a of the coframe matrix, or None where the entry is structurally zero."""
        n = self.n
        if mu < n:
            return pi(mu + 1, a + 1) if a < n else None
        if a < n:
            return piAx(mu - n + 1, a + 1)
        return piA(mu - n + 1, a - n + 1)

    def frame_entry(self, mu: int, a: int) -> Expr:
        c = self.frame_coord(mu, a)
        return ZERO if c is None else Expr(Poly.var(c))

    def frame_matrix(self) -> List[List[Expr]]:
        return [[self.frame_entry(mu, a) for a in range(self.dim)] for mu in range(self.dim)]

    def base_frame_matrix(self) -> List[List[Expr]]:
        return [[self.frame_entry(i, j) for j in range(self.n)] for i in range(self.n)]

    def vector_field(self, components) -> VectorField:
        """Build a field on Y from n+k component expressions (or text) or a coordinate mapping."""
        if isinstance(components, Mapping):
            return VectorField({c: _as_expr(v) for c, v in components.items()}, chart=self)
        comps = list(components)
        if len(comps) != self.dim:
            raise ValueError(f"expected {self.dim} components, got {len(comps)}")
        return VectorField({self.y_coord(a): _as_expr(v) for a, v in enumerate(comps)}, chart=self)

    def check_expr(self, e: Expr, allowed: Sequence[CoordName]) -> None:
        stray = [v for v in e.variables() if v not in set(allowed) and v.kind != "Param"]
        if stray:
            raise ValueError(f"expression {e} uses coordinates {sorted(map(str, stray))} outside the chart")


def _as_expr(v) -> Expr:
    if isinstance(v, str):
        return parse(v)
    return Expr.lift(v)


def chart_of(*fields: VectorField) -> BundleChart:
    charts = {f.chart for f in fields if f.chart is not None}
    if len(charts) > 1:
        raise ChartMismatchError("vector fields live on different charts")
    if not charts:
        raise ChartMismatchError("vector field carries no chart")
    return charts.pop()


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """Coordinate Lie bracket [v, w]^m = v^a d_a w^m - w^a d_a v^m."""
    if v.chart is not None and w.chart is not None and v.chart != w.chart:
        raise ChartMismatchError("chart mismatch")
    return lie_bracket_fields(v, w)


def is_projectable(v: VectorField) -> bool:
    chart = chart_of(v)
    for xi in chart.base:
        comp = v[xi]
        for ya in chart.fiber:
            if not comp.diff(ya).is_zero():
                return False
    return True


def require_projectable(*fields: VectorField) -> None:
    for f in fields:
        if not is_projectable(f):
            raise NotProjectableError()


def base_pushforward(v: VectorField) -> VectorField:
    """The base field v_ with v_ o pi = pi_* o v."""
    require_projectable(v)
    chart = chart_of(v)
    return VectorField({c: v[c] for c in chart.base}, chart=chart)


def flow_commute_check(v: VectorField, pt: Sequence, t_max: float, dt: float) -> float:
    """Max over samples of |pi(Phi_t(pt)) - Phi_t(pi(pt))| for a projectable field."""
    from .flows import integrate_rk4

    require_projectable(v)
    chart = chart_of(v)
    start = {c: float(val) for c, val in zip(chart.y_coords, pt)}
    full = integrate_rk4(v, start, t_max, dt, coords=list(chart.y_coords))
    base_field = base_pushforward(v)
    base_start = {c: start[c] for c in chart.base}
    low = integrate_rk4(base_field, base_start, t_max, dt, coords=list(chart.base))
    projected = full.states[:, : chart.n]
    return float(abs(projected - low.states).max())


def jacobian(mapping: Sequence[Expr], coords: Sequence[CoordName]) -> List[List[Expr]]:
    return [[f.diff(c) for c in coords] for f in mapping]


def verticality_preservation_check(
    chart: BundleChart,
    components: Sequence,
    samples: int = 12,
    rng: random.Random | None = None,
) -> bool:
    """True iff the map's pushforward of every d/dy^A has vanishing d/dx part.

    ``components`` are the n+k component expressions of the map in adapted
    coordinates.  Raises ValueError when the Jacobian is singular at every
    sampled point.
    """
    rng = rng or random.Random(0)
    comps = [_as_expr(c) for c in components]
    if len(comps) != chart.dim:
        raise ValueError(f"expected {chart.dim} components")
    jac = jacobian(comps, chart.y_coords)
    det = linalg.det(jac)
    for _ in range(samples):
        point = {c: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for c in chart.y_coords}
        try:
            if evaluate(det, point) != 0:
                break
        except SingularEvaluationError:
            continue
    else:
        raise ValueError("singular Jacobian at all sampled points")
    for a in range(chart.n, chart.dim):
        for i in range(chart.n):
            if not jac[i][a].is_zero():
                return False
    return True


# ---------------------------------------------------------------------------
# Random generators used by the identity suite and the tests
# ---------------------------------------------------------------------------


def random_polynomial(rng: random.Random, coords: Sequence[CoordName], degree: int = 2, terms: int = 3, coeff_range: int = 3) -> Expr:
    monos = [()]
    for _ in range(degree):
        monos = monos + [m + (c,) for m in monos for c in coords if not m or c.key >= m[-1].key]
    monos = sorted(set(monos), key=lambda m: (len(m), [c.key for c in m]))
    chosen = rng.sample(monos, min(terms, len(monos)))
    total = ZERO
    for m in chosen:
        c = 0
        while c == 0:
            c = rng.randint(-coeff_range, coeff_range)
        term = const(c)
        for var in m:
            term = term * Expr(Poly.var(var))
        total = total + term
    return total


def random_projectable(chart: BundleChart, rng: random.Random, degree: int = 2, terms: int = 3) -> VectorField:
    comps: Dict[CoordName, Expr] = {}
    for c in chart.base:
        comps[c] = random_polynomial(rng, chart.base, degree, terms)
    for c in chart.fiber:
        comps[c] = random_polynomial(rng, chart.y_coords, degree, terms)
    return VectorField(comps, chart=chart)


def linear_field(chart: BundleChart, matrix: Sequence[Sequence]) -> VectorField:
    """The generator of Y -> gY for a block lower-triangular matrix in the Lie algebra of G_A."""
    comps = {}
    ycoords = [Expr(Poly.var(c)) for c in chart.y_coords]
    for a in range(chart.dim):
        total = ZERO
        for b in range(chart.dim):
            if matrix[a][b] != 0:
                total = total + const(matrix[a][b]) * ycoords[b]
        comps[chart.y_coord(a)] = total
    return VectorField(comps, chart=chart)

"""The vertically adapted frame bundle L_V Y.

A point of L_V Y is a point of Y together with a coframe, stored as the
block lower-triangular (n+k) x (n+k) matrix

    P = [[pi^i_j,  0      ],
         [pi^A_j,  pi^A_B ]]

with ``P^mu_a = theta^mu(d/dY^a)``.  Value slots ``mu`` run over
``r_1..r_n`` then ``s_1..s_k``.  The adapted group G_A acts on the right by
``P -> g^{-1} P`` (frames ``E -> E g``), and the soldering form is
``theta^mu = P^mu_a dY^a``.

Tensorial functions correspond to projectable vector fields: ``f^mu = P^mu_a f^a``.
Their Hamiltonian fields, the natural lifts of projectable fields, are

    X_f = f^a d/dY^a - P^mu_a (d_c f^a) d/dP^mu_c

over the allowed frame coordinates, and ``df^mu = -X_f ⨼ dtheta^mu``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from . import linalg
from .forms import Form, VectorField, VVForm
from .geobundle import BundleChart, chart_of, lie_bracket, require_projectable
from .multiphase import ZPoint, lift_to_Z, momentum_observable_Z, theta_Z
from .symexpr import ZERO, CoordName, Expr, Poly, const, evaluate, pmom, pscalar


class NotInT1Error(ValueError):
    def __init__(self, msg: str = "not in T1_V"):
        super().__init__(msg)


class SingularFrameError(ValueError):
    pass


def _var(c: CoordName) -> Expr:
    return Expr(Poly.var(c))


def _is_zero_number(v) -> bool:
    return v == 0 if not isinstance(v, float) else abs(v) < 1e-12


# ---------------------------------------------------------------------------
# Points and group elements
# ---------------------------------------------------------------------------


@dataclass
class FramePoint:
    """Numeric point of L_V Y: base/fiber coordinates and the three coframe blocks."""

    x: List
    y: List
    pi_nn: List[List]
    pi_kk: List[List]
    pi_kn: List[List]

    def __post_init__(self):
        n, k = len(self.x), len(self.y)
        if len(self.pi_nn) != n or any(len(r) != n for r in self.pi_nn):
            raise ValueError("pi^i_j block must be n x n")
        if len(self.pi_kk) != k or any(len(r) != k for r in self.pi_kk):
            raise ValueError("pi^A_B block must be k x k")
        if len(self.pi_kn) != k or any(len(r) != n for r in self.pi_kn):
            raise ValueError("pi^A_i block must be k x n")
        if _is_zero_number(linalg.det(self.pi_nn)) or _is_zero_number(linalg.det(self.pi_kk)):
            raise SingularFrameError("singular coframe block")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def k(self) -> int:
        return len(self.y)

    @property
    def chart(self) -> BundleChart:
        return BundleChart(self.n, self.k)

    def coframe_matrix(self) -> List[List]:
        return linalg.block_lower(self.pi_nn, self.pi_kk, self.pi_kn)

    @classmethod
    def from_coframe(cls, x: Sequence, y: Sequence, P: Sequence[Sequence]) -> "FramePoint":
        n = len(x)
        if any(P[i][a] != 0 for i in range(n) for a in range(n, len(P))):
            raise ValueError("coframe matrix is not vertically adapted")
        return cls(
            list(x),
            list(y),
            [list(P[i][:n]) for i in range(n)],
            [list(P[a][n:]) for a in range(n, len(P))],
            [list(P[a][:n]) for a in range(n, len(P))],
        )

    def as_point(self, chart: BundleChart | None = None) -> Dict[CoordName, object]:
        chart = chart or self.chart
        if (chart.n, chart.k) != (self.n, self.k):
            raise ValueError("frame point does not match the chart")
        point = dict(zip(chart.base, self.x))
        point.update(zip(chart.fiber, self.y))
        P = self.coframe_matrix()
        for mu in range(chart.dim):
            for a in range(chart.dim):
                c = chart.frame_coord(mu, a)
                if c is not None:
                    point[c] = P[mu][a]
        return point

    @classmethod
    def from_point(cls, chart: BundleChart, point: Mapping[CoordName, object]) -> "FramePoint":
        P = [[0 if chart.frame_coord(mu, a) is None else point[chart.frame_coord(mu, a)] for a in range(chart.dim)] for mu in range(chart.dim)]
        return cls.from_coframe([point[c] for c in chart.base], [point[c] for c in chart.fiber], P)


@dataclass(frozen=True)
class GAElement:
    """Element (N, K, A) of the adapted group, the matrix [[N, 0], [A, K]]."""

    N: tuple
    K: tuple
    A: tuple

    def __init__(self, N, K, A):
        object.__setattr__(self, "N", tuple(tuple(r) for r in N))
        object.__setattr__(self, "K", tuple(tuple(r) for r in K))
        object.__setattr__(self, "A", tuple(tuple(r) for r in A))
        n, k = len(self.N), len(self.K)
        if any(len(r) != n for r in self.N) or any(len(r) != k for r in self.K):
            raise ValueError("N and K must be square")
        if len(self.A) != k or any(len(r) != n for r in self.A):
            raise ValueError("A must be k x n")
        if linalg.det(self.N) == 0 or linalg.det(self.K) == 0:
            raise ValueError("singular group element")

    @classmethod
    def identity(cls, n: int, k: int) -> "GAElement":
        return cls(linalg.identity(n), linalg.identity(k), linalg.zeros(k, n))

    @classmethod
    def from_matrix(cls, M: Sequence[Sequence], n: int) -> "GAElement":
        if any(M[i][a] != 0 for i in range(n) for a in range(n, len(M))):
            raise ValueError("matrix is not block lower-triangular")
        return cls([r[:n] for r in M[:n]], [r[n:] for r in M[n:]], [r[:n] for r in M[n:]])

    @property
    def n(self) -> int:
        return len(self.N)

    @property
    def k(self) -> int:
        return len(self.K)

    def matrix(self) -> List[List]:
        return linalg.block_lower(self.N, self.K, self.A)

    def __mul__(self, other: "GAElement") -> "GAElement":
        return GAElement(
            linalg.matmul(self.N, other.N),
            linalg.matmul(self.K, other.K),
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(linalg.matmul(self.A, other.N), linalg.matmul(self.K, other.A))],
        )

    def inverse(self) -> "GAElement":
        Ni = linalg.inverse(self.N)
        Ki = linalg.inverse(self.K)
        Ai = [[-v for v in row] for row in linalg.matmul(linalg.matmul(Ki, self.A), Ni)]
        return GAElement(Ni, Ki, Ai)

    def __eq__(self, other):
        if not isinstance(other, GAElement):
            return NotImplemented
        return self.N == other.N and self.K == other.K and self.A == other.A

    def __hash__(self):
        return hash((self.N, self.K, self.A))

    def is_identity(self) -> bool:
        return self == GAElement.identity(self.n, self.k)


def ga_act_frame(w: FramePoint, g: GAElement) -> FramePoint:
    """Right action: frames E -> E g, so the coframe matrix becomes g^{-1} P."""
    if (g.n, g.k) != (w.n, w.k):
        raise ValueError("group element does not match the frame dimensions")
    P = linalg.matmul(g.inverse().matrix(), w.coframe_matrix())
    return FramePoint.from_coframe(w.x, w.y, P)


def relative_element(w: FramePoint, w2: FramePoint) -> GAElement:
    """The unique g with ga_act_frame(w, g) = w2 (points over the same base point)."""
    if list(w.x) != list(w2.x) or list(w.y) != list(w2.y):
        raise ValueError("frames lie over different points of Y")
    M = linalg.matmul(w.coframe_matrix(), linalg.inverse(w2.coframe_matrix()))
    return GAElement.from_matrix(M, w.n)


def ga_act_vector(g: GAElement, v: Sequence) -> list:
    """Standard left action of G_A on R^(n+k)."""
    return linalg.matvec(g.matrix(), list(v))


# ---------------------------------------------------------------------------
# Soldering form and structure form
# ---------------------------------------------------------------------------


def soldering_form(chart: BundleChart) -> VVForm:
    """theta = pi^i_j dx^j r_i + (pi^A_i dx^i + pi^A_B dy^B) s_A."""
    entries = []
    for mu in range(chart.dim):
        terms = {}
        for a in range(chart.dim):
            c = chart.frame_coord(mu, a)
            if c is not None:
                terms[(chart.y_coord(a),)] = _var(c)
        entries.append(Form(1, terms))
    return VVForm(1, 1, chart.dim, {(mu,): f for mu, f in enumerate(entries)})


def structure_form(chart: BundleChart) -> VVForm:
    """dtheta = dpi^mu_a ^ dY^a, written out directly."""
    comps = {}
    for mu in range(chart.dim):
        items = []
        for a in range(chart.dim):
            c = chart.frame_coord(mu, a)
            if c is not None:
                items.append(((c, chart.y_coord(a)), 1))
        comps[(mu,)] = Form.from_unsorted(2, items)
    return VVForm(2, 1, chart.dim, comps)


# ---------------------------------------------------------------------------
# Tensorial observables and Hamiltonian fields
# ---------------------------------------------------------------------------


class T1Observable:
    """Degree-1 tensorial function f^mu = P^mu_a f^a from components f^a on Y."""

    def __init__(self, chart: BundleChart, components: Mapping[CoordName, object] | Sequence):
        self.chart = chart
        field = chart.vector_field(components)
        self.components: List[Expr] = [field[c] for c in chart.y_coords]
        for e in self.components:
            chart.check_expr(e, chart.y_coords)

    @classmethod
    def from_field(cls, xi: VectorField) -> "T1Observable":
        return cls(chart_of(xi), {c: xi[c] for c in chart_of(xi).y_coords})

    def satisfies_constraint(self) -> bool:
        ch = self.chart
        return all(self.components[i].diff(ya).is_zero() for i in range(ch.n) for ya in ch.fiber)

    def values(self) -> List[Expr]:
        ch = self.chart
        out = []
        for mu in range(ch.dim):
            total = ZERO
            for a in range(ch.dim):
                if not self.components[a].is_zero():
                    total = total + ch.frame_entry(mu, a) * self.components[a]
            out.append(total)
        return out

    def as_vvform(self) -> VVForm:
        return VVForm(0, 1, self.chart.dim, {(mu,): Form.function(v) for mu, v in enumerate(self.values())})


def hamiltonian_solve_T1(f: T1Observable) -> VectorField:
    """Hamiltonian field X_f of a tensorial function (raises unless d f^i / d y^A = 0)."""
    if not f.satisfies_constraint():
        raise NotInT1Error()
    ch = f.chart
    comps: Dict[CoordName, Expr] = {ch.y_coord(a): f.components[a] for a in range(ch.dim)}
    # derivative table d_c f^a
    dfs = [[f.components[a].diff(ch.y_coord(c)) for c in range(ch.dim)] for a in range(ch.dim)]
    for mu in range(ch.dim):
        for c in range(ch.dim):
            target = ch.frame_coord(mu, c)
            if target is None:
                continue
            total = ZERO
            for a in range(ch.dim):
                if dfs[a][c].is_zero():
                    continue
                total = total + ch.frame_entry(mu, a) * dfs[a][c]
            if not total.is_zero():
                comps[target] = -total
    return VectorField(comps, chart=ch)


def structure_residual_T1(f: T1Observable, X: Optional[VectorField] = None) -> VVForm:
    """df + X ⨼ dtheta, componentwise; zero for a Hamiltonian pair."""
    X = X if X is not None else hamiltonian_solve_T1(f)
    return f.as_vvform().d() + structure_form(f.chart).interior(X)


def lift_to_LVY(xi: VectorField) -> VectorField:
    """Canonical lift of a projectable field to L_V Y."""
    require_projectable(xi)
    return hamiltonian_solve_T1(T1Observable.from_field(xi))


def momentum_components(xi: VectorField) -> List[Expr]:
    require_projectable(xi)
    return T1Observable.from_field(xi).values()


def momentum_observable_LVY(xi: VectorField) -> VVForm:
    """J(xi) = xi_LVY ⨼ theta as an R^(n+k)-valued function."""
    require_projectable(xi)
    return T1Observable.from_field(xi).as_vvform()


def momentum_via_contraction(xi: VectorField) -> VVForm:
    return soldering_form(chart_of(xi)).interior(lift_to_LVY(xi))


def poisson_LVY(xi: VectorField, zeta: VectorField) -> VVForm:
    """{J(xi), J(zeta)}^mu = -(xi_LVY ⨼ zeta_LVY ⨼ dtheta^mu)."""
    require_projectable(xi, zeta)
    chart = chart_of(xi, zeta)
    dtheta = structure_form(chart)
    return -dtheta.interior(lift_to_LVY(zeta)).interior(lift_to_LVY(xi))


def bracket_defect_LVY(xi: VectorField, zeta: VectorField) -> VVForm:
    return poisson_LVY(xi, zeta) - momentum_observable_LVY(lie_bracket(xi, zeta))


def lift_functoriality_residual(xi: VectorField, zeta: VectorField) -> VectorField:
    """lift([xi, zeta]) - [lift(xi), lift(zeta)]."""
    return lift_to_LVY(lie_bracket(xi, zeta)) - lie_bracket(lift_to_LVY(xi), lift_to_LVY(zeta))


def tensoriality_check(xi: VectorField, w: FramePoint, g: GAElement) -> bool:
    """J(xi)(w g) == g^{-1} J(xi)(w), exactly."""
    comps = momentum_components(xi)
    left = [evaluate(e, ga_act_frame(w, g).as_point()) for e in comps]
    right = ga_act_vector(g.inverse(), [evaluate(e, w.as_point()) for e in comps])
    return all(_is_zero_number(a - b) for a, b in zip(left, right))


def tensorial_value(xi: VectorField, w: FramePoint) -> list:
    """w^{-1}(xi_Y): the components of xi in the frame w, i.e. P xi."""
    point = w.as_point()
    chart = w.chart
    vec = [evaluate(xi[c], point) for c in chart.y_coords]
    return linalg.matvec(w.coframe_matrix(), vec)


def linear_automorphism_invariance(chart: BundleChart, M: Sequence[Sequence]) -> VVForm:
    """Pull theta back through the lift of Y -> M Y; returns pullback - theta (zero when invariant)."""
    GAElement.from_matrix(M, chart.n)  # validates shape and invertibility
    Minv = linalg.inverse(M)
    ys = [_var(c) for c in chart.y_coords]
    mapping: Dict[CoordName, Expr] = {}
    for a in range(chart.dim):
        total = ZERO
        for b in range(chart.dim):
            if M[a][b] != 0:
                total = total + const(M[a][b]) * ys[b]
        mapping[chart.y_coord(a)] = total
    for mu in range(chart.dim):
        for c in range(chart.dim):
            target = chart.frame_coord(mu, c)
            if target is None:
                continue
            total = ZERO
            for a in range(chart.dim):
                if Minv[a][c] != 0:
                    total = total + chart.frame_entry(mu, a) * const(Minv[a][c])
            mapping[target] = total
    theta = soldering_form(chart)
    pulled = VVForm(1, 1, chart.dim, {vi: f.pullback(mapping, chart.lvy_coords) for vi, f in theta.components.items()})
    return pulled - theta


# ---------------------------------------------------------------------------
# The associated bundle map to Z
# ---------------------------------------------------------------------------


def _check_bl(chart: BundleChart, B: Sequence[Sequence]) -> None:
    if len(B) != chart.n or any(len(r) != chart.k for r in B):
        raise ValueError(f"B must be {chart.n} x {chart.k}")


def act_on_BL(g: GAElement, B: Sequence[Sequence], lam) -> tuple:
    """Left action (N,K,A).(B,lam) = det(N^{-1}) (N B K^{-1}, lam - tr(B K^{-1} A))."""
    Ki = linalg.inverse(g.K)
    s = Fraction(1) / Fraction(linalg.det(g.N)) if not isinstance(linalg.det(g.N), float) else 1.0 / linalg.det(g.N)
    newB = [[s * v for v in row] for row in linalg.matmul(linalg.matmul(g.N, B), Ki)]
    newlam = s * (lam - linalg.trace(linalg.matmul(linalg.matmul(B, Ki), g.A)))
    return newB, newlam


def rho_hat(w: FramePoint, B: Sequence[Sequence], lam) -> ZPoint:
    """Image point in Z: p^j_B = det(pi) B^i_A pi^A_B (pi^-1)^j_i, p = det(pi)(B^i_A pi^A_k (pi^-1)^k_i + lam)."""
    n, k = w.n, w.k
    _check_bl(w.chart, B)
    d = linalg.det(w.pi_nn)
    if _is_zero_number(d):
        raise SingularFrameError("singular pi^i_j")
    inv = linalg.inverse(w.pi_nn)
    BpiK = linalg.matmul(B, w.pi_kk)  # B^i_A pi^A_B, n x k
    p_mom = [[d * sum((BpiK[i][b] * inv[j][i] for i in range(1, n)), BpiK[0][b] * inv[j][0]) for b in range(k)] for j in range(n)]
    BpiN = linalg.matmul(B, w.pi_kn)  # B^i_A pi^A_k, n x n
    tr = sum((BpiN[i][kk] * inv[kk][i] for i in range(n) for kk in range(n)), 0)
    return ZPoint(list(w.x), list(w.y), p_mom, d * (tr + lam))


def phi_exprs(chart: BundleChart, B: Sequence[Sequence], lam) -> Dict[CoordName, Expr]:
    """phi_(B,lam): L_V Y -> Z as polynomial expressions of the momentum coordinates.

    Uses det(pi) (pi^-1) = adj(pi), so the map is polynomial in the frame coordinates.
    """
    _check_bl(chart, B)
    n, k = chart.n, chart.k
    pi_nn = chart.base_frame_matrix()
    adj = linalg.adjugate(pi_nn)
    d = linalg.det(pi_nn)
    out: Dict[CoordName, Expr] = {}
    for j in range(n):
        for b in range(k):
            total = ZERO
            for i in range(n):
                for a in range(k):
                    if B[i][a] != 0:
                        total = total + const(B[i][a]) * chart.frame_entry(n + a, n + b) * adj[j][i]
            out[pmom(j + 1, b + 1)] = total
    total = const(lam) * d
    for i in range(n):
        for a in range(k):
            if B[i][a] == 0:
                continue
            for kk in range(n):
                total = total + const(B[i][a]) * chart.frame_entry(n + a, kk) * adj[kk][i]
    out[pscalar()] = total
    return out


def phi_pushforward_residual(xi: VectorField, B: Sequence[Sequence], lam) -> Dict[CoordName, Expr]:
    """xi_LVY(phi^c) - (xi_Z)^c o phi for every momentum coordinate c of Z."""
    chart = chart_of(xi)
    phi = phi_exprs(chart, B, lam)
    lifted = lift_to_LVY(xi)
    xz = lift_to_Z(xi)
    out = {}
    for c, expr in phi.items():
        out[c] = lifted.apply(expr) - xz[c].subs(phi)
    for c in chart.y_coords:
        out[c] = lifted[c] - xz[c]
    return out


def phi_pushforward_check(xi: VectorField, w: FramePoint, B: Sequence[Sequence], lam) -> bool:
    point = w.as_point()
    residual = phi_pushforward_residual(xi, B, lam)
    return all(_is_zero_number(evaluate(e, point)) for e in residual.values()) and all(e.is_zero() for e in residual.values())


# ---------------------------------------------------------------------------
# Wedge powers and the pairing with Z
# ---------------------------------------------------------------------------


def wedge_power(omega: VVForm, m: int) -> VVForm:
    """omega ^ ... ^ omega (m factors); m = 0 gives the scalar 1."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if omega.value_degree * m > omega.dim:
        raise ValueError(f"value degree overflow: {omega.value_degree * m} > {omega.dim}")
    result = VVForm.scalar_one(omega.dim)
    for _ in range(m):
        result = result.wedge(omega)
    return result


def _levi_civita(perm: Sequence[int]) -> int:
    from .forms import sort_with_sign

    sign, _ = sort_with_sign(perm)
    return sign


def v_map(B: Sequence[Sequence], lam, chart: BundleChart) -> Dict[tuple, object]:
    """Components of V(B, lam) in Lambda^n (R^(n+k))*, keyed by sorted value indices.

    V_(i1..in) = lam eps_(i1..in) / n!,  V_(A i1..i(n-1)) = B^j_A eps_(j i1..i(n-1)) / n!,
    zero with two or more fiber slots.  Only sorted keys are stored; the
    antisymmetric extension gives the rest.
    """
    _check_bl(chart, B)
    n, k = chart.n, chart.k
    fact = math.factorial(n)
    out: Dict[tuple, object] = {}
    base_key = tuple(range(n))
    out[base_key] = Fraction(lam) / fact if not isinstance(lam, float) else lam / fact
    for a in range(k):
        for omit in range(n):
            rest = tuple(i for i in range(n) if i != omit)
            # V_(A rest) = B^omit_A eps_(omit rest) / n!; move A behind rest
            val = Fraction(B[omit][a]) * _levi_civita((omit,) + rest) / fact
            val *= (-1) ** (n - 1)
            if val != 0:
                out[rest + (n + a,)] = val
    return out


def v_component(V: Dict[tuple, object], index: Sequence[int]):
    """Antisymmetric lookup V_I for an arbitrary ordered index tuple."""
    from .forms import sort_with_sign

    sign, key = sort_with_sign(index)
    if sign == 0:
        return 0
    return sign * V.get(key, 0)


def pairing_residual(chart: BundleChart, B: Sequence[Sequence], lam) -> Form:
    """<Lambda^n theta, V(B, lam)> - phi*Theta as an n-form on L_V Y."""
    theta = soldering_form(chart)
    left = wedge_power(theta, chart.n).pair(v_map(B, lam, chart))
    right = theta_Z(chart).pullback(phi_exprs(chart, B, lam), chart.lvy_coords)
    return left - right


def pairing_check_thm43(w: FramePoint, B: Sequence[Sequence], lam) -> bool:
    residual = pairing_residual(w.chart, B, lam)
    return residual.is_zero() and not residual.evaluate(w.as_point())


def pullback_residual(xi: VectorField, B: Sequence[Sequence], lam) -> Form:
    """phi*(J_Z(xi)) - <J_LVY(xi) ^ Lambda^(n-1) theta, n V(B, lam)>."""
    chart = chart_of(xi)
    n = chart.n
    left = momentum_observable_Z(xi).pullback(phi_exprs(chart, B, lam), chart.lvy_coords)
    rep = momentum_observable_LVY(xi).wedge(wedge_power(soldering_form(chart), n - 1))
    V = {key: n * val for key, val in v_map(B, lam, chart).items()}
    right = rep.pair(V)
    return left - right


def pullback_check_thm44(xi: VectorField, w: FramePoint, B: Sequence[Sequence], lam) -> bool:
    residual = pullback_residual(xi, B, lam)
    return residual.is_zero() and not residual.evaluate(w.as_point())


def wedge_leibniz_residual(chart: BundleChart, m: int) -> VVForm:
    """d(Lambda^m theta) - m dtheta ^ Lambda^(m-1) theta."""
    theta = soldering_form(chart)
    return wedge_power(theta, m).d() - structure_form(chart).wedge(wedge_power(theta, m - 1)).scale(m)


def bracket_wedge_rep_residual(xi: VectorField, zeta: VectorField, m: int) -> VVForm:
    """{f^Lambda^m theta, g^Lambda^m theta} - {f,g}^Lambda^m theta - m d(f^g^Lambda^(m-1) theta).

    The bracket of the wedge representatives is -(xi ⨼ zeta ⨼ (dtheta ^ Lambda^m theta)).
    """
    require_projectable(xi, zeta)
    chart = chart_of(xi, zeta)
    theta = soldering_form(chart)
    lx, lz = lift_to_LVY(xi), lift_to_LVY(zeta)
    big = structure_form(chart).wedge(wedge_power(theta, m))
    left = -big.interior(lz).interior(lx)
    right = poisson_LVY(xi, zeta).wedge(wedge_power(theta, m))
    if m >= 1:
        f, g = momentum_observable_LVY(xi), momentum_observable_LVY(zeta)
        right = right + f.wedge(g).wedge(wedge_power(theta, m - 1)).d().scale(m)
    return left - right


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def _rand_frac(rng: random.Random, lo: int = -5, hi: int = 5, den: int = 3) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def _rand_invertible(rng: random.Random, size: int) -> List[List[Fraction]]:
    while True:
        M = [[_rand_frac(rng) for _ in range(size)] for _ in range(size)]
        if linalg.det(M) != 0:
            return M


def random_frame_point(chart: BundleChart, rng: random.Random) -> FramePoint:
    return FramePoint(
        [_rand_frac(rng) for _ in range(chart.n)],
        [_rand_frac(rng) for _ in range(chart.k)],
        _rand_invertible(rng, chart.n),
        _rand_invertible(rng, chart.k),
        [[_rand_frac(rng) for _ in range(chart.n)] for _ in range(chart.k)],
    )


def random_group_element(chart: BundleChart, rng: random.Random) -> GAElement:
    return GAElement(
        _rand_invertible(rng, chart.n),
        _rand_invertible(rng, chart.k),
        [[_rand_frac(rng) for _ in range(chart.n)] for _ in range(chart.k)],
    )


def random_BL(chart: BundleChart, rng: random.Random) -> tuple:
    return [[_rand_frac(rng) for _ in range(chart.k)] for _ in range(chart.n)], _rand_frac(rng)


def identity_frame_point(chart: BundleChart) -> FramePoint:
    return FramePoint([0] * chart.n, [0] * chart.k, linalg.identity(chart.n), linalg.identity(chart.k), linalg.zeros(chart.k, chart.n))

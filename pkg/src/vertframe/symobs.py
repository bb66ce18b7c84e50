"""Symmetric degree-2 observables (metrics) on L_V Y and their Hamiltonian families.

A symmetric contravariant tensor g^(ab) on Y gives the tensorial function

    g^(mu nu) = P^mu_a P^nu_b g^(ab).

Its Hamiltonian fields X^mu satisfy the symmetrized structure equation

    dg^(mu nu) = -(X^mu ⨼ dtheta^nu + X^nu ⨼ dtheta^mu)

which fixes ``X^mu(Y^c) = P^mu_a g^(ac)`` and only the symmetric part of the
frame components ``X^mu(P^nu_c) + X^nu(P^mu_c) = -P^mu_a P^nu_b d_c g^(ab)``.
The antisymmetric remainder is the vertical ambiguity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import linalg
from .forms import Form, VectorField
from .geobundle import BundleChart, chart_of, linear_field, require_projectable
from .symexpr import ZERO, CoordName, Expr, const, parse
from .vframe import FramePoint, T1Observable, lift_to_LVY, momentum_components, structure_form


class NotSolvableError(ValueError):
    def __init__(self, msg: str = "not solvable in ansatz"):
        super().__init__(msg)


def _as_expr(v) -> Expr:
    return parse(v) if isinstance(v, str) else Expr.lift(v)


def _expr_matrix(M) -> List[List[Expr]]:
    return [[_as_expr(v) for v in row] for row in M]


class ST2Observable:
    """Symmetric contravariant tensor g^(ab) on Y, evaluated on frames as P g P^T."""

    def __init__(self, chart: BundleChart, g: Sequence[Sequence]):
        self.chart = chart
        self.g = _expr_matrix(g)
        d = chart.dim
        if len(self.g) != d or any(len(r) != d for r in self.g):
            raise ValueError(f"tensor must be {d} x {d}")
        if not linalg.is_symmetric(self.g):
            raise ValueError("tensor is not symmetric")
        for row in self.g:
            for e in row:
                chart.check_expr(e, chart.y_coords)
        for i in range(chart.n):
            for j in range(chart.n):
                if any(self.g[i][j].depends_on(ya) for ya in chart.fiber):
                    raise ValueError("base block g^ij must depend on x only")

    @classmethod
    def zero(cls, chart: BundleChart) -> "ST2Observable":
        return cls(chart, linalg.zeros(chart.dim, chart.dim))

    def values(self) -> List[List[Expr]]:
        P = self.chart.frame_matrix()
        return linalg.matmul(linalg.matmul(P, self.g), linalg.transpose(P))


class KKMetric:
    """Kaluza-Klein metric from base metric eta, fiber metric iota and connection gamma.

    The connection is gamma(v)^A = v^A - gamma^A_i v^i, giving

        G_ij = eta_ij + iota_AB gamma^A_i gamma^B_j
        G_iA = -iota_AB gamma^B_i
        G_AB = iota_AB
    """

    def __init__(self, chart: BundleChart, eta: Sequence[Sequence], iota: Sequence[Sequence], gamma: Optional[Sequence[Sequence]] = None):
        self.chart = chart
        self.eta = linalg.to_fractions(eta)
        self.iota = linalg.to_fractions(iota)
        n, k = chart.n, chart.k
        if len(self.eta) != n or len(self.iota) != k:
            raise ValueError("metric block sizes do not match the chart")
        for name, M in (("eta", self.eta), ("iota", self.iota)):
            if not linalg.is_symmetric(M):
                raise ValueError(f"{name} is not symmetric")
            if linalg.det(M) == 0:
                raise ValueError(f"{name} is singular")
        gamma = gamma if gamma is not None else linalg.zeros(k, n)
        if len(gamma) != k or any(len(r) != n for r in gamma):
            raise ValueError("gamma must be k x n")
        self.gamma = _expr_matrix(gamma)
        for row in self.gamma:
            for e in row:
                chart.check_expr(e, chart.y_coords)
        self.eta_inv = linalg.inverse(self.eta)
        self.iota_inv = linalg.inverse(self.iota)

    def covariant(self) -> List[List[Expr]]:
        n, k = self.chart.n, self.chart.k
        eta = [[const(v) for v in r] for r in self.eta]
        iota = [[const(v) for v in r] for r in self.iota]
        gam = self.gamma
        G = [[ZERO] * (n + k) for _ in range(n + k)]
        # iota_AB gamma^B_i
        ig = [[sum((iota[a][b] * gam[b][i] for b in range(k)), ZERO) for i in range(n)] for a in range(k)]
        for i in range(n):
            for j in range(n):
                G[i][j] = eta[i][j] + sum((gam[a][i] * ig[a][j] for a in range(k)), ZERO)
        for i in range(n):
            for a in range(k):
                G[i][n + a] = -ig[a][i]
                G[n + a][i] = -ig[a][i]
        for a in range(k):
            for b in range(k):
                G[n + a][n + b] = iota[a][b]
        return G

    def contravariant(self) -> List[List[Expr]]:
        """Closed-form inverse: G^ij = eta^ij, G^iA = eta^ij gamma^A_j, G^AB = iota^AB + gamma^A_i eta^ij gamma^B_j."""
        n, k = self.chart.n, self.chart.k
        ei = [[const(v) for v in r] for r in self.eta_inv]
        ii = [[const(v) for v in r] for r in self.iota_inv]
        gam = self.gamma
        H = [[ZERO] * (n + k) for _ in range(n + k)]
        eg = [[sum((ei[i][j] * gam[a][j] for j in range(n)), ZERO) for a in range(k)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                H[i][j] = ei[i][j]
            for a in range(k):
                H[i][n + a] = eg[i][a]
                H[n + a][i] = eg[i][a]
        for a in range(k):
            for b in range(k):
                H[n + a][n + b] = ii[a][b] + sum((gam[a][i] * eg[i][b] for i in range(n)), ZERO)
        return H

    def is_constant(self) -> bool:
        return all(e.is_constant() for row in self.gamma for e in row)


def st2_from_metric(G: KKMetric) -> ST2Observable:
    return ST2Observable(G.chart, G.contravariant())


@dataclass
class HamiltonianFamily:
    """A representative solution X^mu of the symmetrized structure equation."""

    chart: BundleChart
    observable: ST2Observable
    fields: List[VectorField]

    def residual(self, fields: Optional[List[VectorField]] = None) -> Dict[tuple, Form]:
        return structure_residual_ST2(self.observable, fields if fields is not None else self.fields)

    def with_ambiguity(self, extra: Sequence[VectorField]) -> List[VectorField]:
        return [X + Y for X, Y in zip(self.fields, extra)]


def structure_residual_ST2(obs: ST2Observable, fields: Sequence[VectorField]) -> Dict[tuple, Form]:
    """dg^(mu nu) + X^mu ⨼ dtheta^nu + X^nu ⨼ dtheta^mu for mu <= nu (nonzero entries only)."""
    chart = obs.chart
    vals = obs.values()
    dtheta = structure_form(chart)
    contr = [[dtheta.component((nu,)).interior(fields[mu]) for nu in range(chart.dim)] for mu in range(chart.dim)]
    out = {}
    for mu in range(chart.dim):
        for nu in range(mu, chart.dim):
            r = Form.function(vals[mu][nu]).d() + contr[mu][nu] + contr[nu][mu]
            if not r.is_zero():
                out[(mu, nu)] = r
    return out


def hamiltonian_family_solve(obs: ST2Observable) -> HamiltonianFamily:
    chart = obs.chart
    d = chart.dim
    P = chart.frame_matrix()
    comps: List[Dict[CoordName, Expr]] = [dict() for _ in range(d)]
    for mu in range(d):
        for c in range(d):
            total = ZERO
            for a in range(d):
                if not P[mu][a].is_zero() and not obs.g[a][c].is_zero():
                    total = total + P[mu][a] * obs.g[a][c]
            comps[mu][chart.y_coord(c)] = total
    dg = [[[obs.g[a][b].diff(chart.y_coord(c)) for c in range(d)] for b in range(d)] for a in range(d)]
    half = Fraction(1, 2)
    for c in range(d):
        for mu in range(d):
            for nu in range(mu, d):
                S = ZERO
                for a in range(d):
                    if P[mu][a].is_zero():
                        continue
                    for b in range(d):
                        if P[nu][b].is_zero() or dg[a][b][c].is_zero():
                            continue
                        S = S - P[mu][a] * P[nu][b] * dg[a][b][c]
                if S.is_zero():
                    continue
                slot_mu = chart.frame_coord(nu, c)  # X^mu(P^nu_c)
                slot_nu = chart.frame_coord(mu, c)  # X^nu(P^mu_c)
                if mu == nu:
                    if slot_mu is None:
                        raise NotSolvableError()
                    comps[mu][slot_mu] = comps[mu].get(slot_mu, ZERO) + S * half
                elif slot_mu is not None and slot_nu is not None:
                    comps[mu][slot_mu] = comps[mu].get(slot_mu, ZERO) + S * half
                    comps[nu][slot_nu] = comps[nu].get(slot_nu, ZERO) + S * half
                elif slot_mu is not None:
                    comps[mu][slot_mu] = comps[mu].get(slot_mu, ZERO) + S
                elif slot_nu is not None:
                    comps[nu][slot_nu] = comps[nu].get(slot_nu, ZERO) + S
                else:
                    raise NotSolvableError()
    fields = [VectorField(c, chart=chart) for c in comps]
    return HamiltonianFamily(chart, obs, fields)


def is_vertical_ambiguity(chart: BundleChart, extra: Sequence[VectorField]) -> bool:
    """Y^mu ⨼ dtheta^nu + Y^nu ⨼ dtheta^mu = 0 for all mu, nu."""
    dtheta = structure_form(chart)
    for mu in range(chart.dim):
        for nu in range(mu, chart.dim):
            r = dtheta.component((nu,)).interior(extra[mu]) + dtheta.component((mu,)).interior(extra[nu])
            if not r.is_zero():
                return False
    return True


def random_vertical_ambiguity(chart: BundleChart, rng: random.Random, coeff_range: int = 3) -> List[VectorField]:
    """Random Y^mu with frame components Y^mu(P^nu_c) antisymmetric in (mu, nu)."""
    d = chart.dim
    comps: List[Dict[CoordName, Expr]] = [dict() for _ in range(d)]
    for c in range(d):
        for mu in range(d):
            for nu in range(mu + 1, d):
                a, b = chart.frame_coord(nu, c), chart.frame_coord(mu, c)
                if a is None or b is None:
                    continue
                val = const(rng.randint(-coeff_range, coeff_range)) * chart.frame_entry(rng.randrange(d), rng.randrange(d)) + const(rng.randint(-coeff_range, coeff_range))
                comps[mu][a] = comps[mu].get(a, ZERO) + val
                comps[nu][b] = comps[nu].get(b, ZERO) - val
    return [VectorField(c, chart=chart) for c in comps]


def christoffel(G: KKMetric) -> List[List[List[Expr]]]:
    """Gamma[m][a][b] = 1/2 G^ms (d_a G_sb + d_b G_sa - d_s G_ab)."""
    chart = G.chart
    d = chart.dim
    low = G.covariant()
    up = G.contravariant()
    coords = chart.y_coords
    dlow = [[[low[a][b].diff(coords[c]) for c in range(d)] for b in range(d)] for a in range(d)]
    half = Fraction(1, 2)
    gam = [[[ZERO] * d for _ in range(d)] for _ in range(d)]
    for a in range(d):
        for b in range(a, d):
            first = [dlow[s][b][a] + dlow[s][a][b] - dlow[a][b][s] for s in range(d)]
            for m in range(d):
                total = ZERO
                for s in range(d):
                    if not first[s].is_zero() and not up[m][s].is_zero():
                        total = total + up[m][s] * first[s]
                val = total * half
                gam[m][a][b] = val
                gam[m][b][a] = val
    return gam


def no_torsion_fields(G: KKMetric) -> List[VectorField]:
    """X^mu = G^(nu lam) P^mu_nu d/dY^lam + Gamma^nu_(sig rho) G^(kap rho) P^mu_kap P^lam_nu d/dP^lam_sig."""
    chart = G.chart
    d = chart.dim
    up = G.contravariant()
    gam = christoffel(G)
    P = chart.frame_matrix()
    fields = []
    for mu in range(d):
        comps: Dict[CoordName, Expr] = {}
        # v^rho = G^(kap rho) P^mu_kap
        vel = [sum((P[mu][kap] * up[kap][rho] for kap in range(d) if not P[mu][kap].is_zero()), ZERO) for rho in range(d)]
        for lam in range(d):
            comps[chart.y_coord(lam)] = vel[lam]
        for lam in range(d):
            for sig in range(d):
                total = ZERO
                for nu in range(d):
                    if P[lam][nu].is_zero():
                        continue
                    inner = ZERO
                    for rho in range(d):
                        if not gam[nu][sig][rho].is_zero() and not vel[rho].is_zero():
                            inner = inner + gam[nu][sig][rho] * vel[rho]
                    if not inner.is_zero():
                        total = total + inner * P[lam][nu]
                if total.is_zero():
                    continue
                target = chart.frame_coord(lam, sig)
                if target is None:
                    raise NotSolvableError("no-torsion field leaves the vertically adapted frames")
                comps[target] = total
        fields.append(VectorField(comps, chart=chart))
    return fields


def no_torsion_select(family: HamiltonianFamily, G: KKMetric) -> List[VectorField]:
    if family.chart != G.chart:
        raise ValueError("family and metric live on different charts")
    return no_torsion_fields(G)


def no_torsion_residual(fields: Sequence[VectorField]) -> Dict[tuple, Form]:
    """X^mu ⨼ X^nu ⨼ dtheta^lam (nonzero entries only)."""
    chart = chart_of(*fields)
    dtheta = structure_form(chart)
    out = {}
    for mu in range(chart.dim):
        for nu in range(chart.dim):
            for lam in range(chart.dim):
                r = dtheta.component((lam,)).interior(fields[nu]).interior(fields[mu])
                if not r.is_zero():
                    out[(mu, nu, lam)] = r
    return out


def killing_check(xi: VectorField, G: KKMetric) -> List[List[Expr]]:
    """(L_xi G)_(mu kap) = xi^lam d_lam G_(mu kap) + G_(mu nu) d_kap xi^nu + G_(kap nu) d_mu xi^nu."""
    chart = G.chart
    d = chart.dim
    low = G.covariant()
    coords = chart.y_coords
    dxi = [[xi[coords[nu]].diff(coords[c]) for c in range(d)] for nu in range(d)]
    out = [[ZERO] * d for _ in range(d)]
    for mu in range(d):
        for kap in range(d):
            total = xi.apply(low[mu][kap])
            for nu in range(d):
                total = total + low[mu][nu] * dxi[nu][kap] + low[kap][nu] * dxi[nu][mu]
            out[mu][kap] = total
    return out


def is_killing(xi: VectorField, G: KKMetric) -> bool:
    return all(e.is_zero() for row in killing_check(xi, G) for e in row)


def invariance_residual(obs: ST2Observable, xi: VectorField) -> List[List[Expr]]:
    """xi_LVY(g^(mu nu))."""
    lifted = lift_to_LVY(xi)
    return [[lifted.apply(e) for e in row] for row in obs.values()]


def invariance_check(obs: ST2Observable, xi: VectorField) -> bool:
    require_projectable(xi)
    return all(e.is_zero() for row in invariance_residual(obs, xi) for e in row)


def poisson_T1_ST2(f: T1Observable, obs: ST2Observable, fields: Optional[Sequence[VectorField]] = None) -> tuple:
    """Return ({f,g}, {g,f}) as symmetric matrices of expressions.

    {f,g}^(mu nu) = -X_f(g^(mu nu)) and {g,f}^(mu nu) = -(X^mu_g(f^nu) + X^nu_g(f^mu)).
    """
    from .vframe import hamiltonian_solve_T1

    fields = list(fields) if fields is not None else hamiltonian_family_solve(obs).fields
    Xf = hamiltonian_solve_T1(f)
    fv = f.values()
    gv = obs.values()
    d = obs.chart.dim
    fg = [[-Xf.apply(gv[mu][nu]) for nu in range(d)] for mu in range(d)]
    gf = [[-(fields[mu].apply(fv[nu]) + fields[nu].apply(fv[mu])) for nu in range(d)] for mu in range(d)]
    return fg, gf


# ---------------------------------------------------------------------------
# Orthogonal generators
# ---------------------------------------------------------------------------


def orthogonal_basis(metric: Sequence[Sequence]) -> List[List[List[Fraction]]]:
    """Basis of {E : metric E is antisymmetric}, as E = metric^{-1} (e_ij - e_ji)."""
    size = len(metric)
    inv = linalg.inverse(linalg.to_fractions(metric))
    basis = []
    for i in range(size):
        for j in range(i + 1, size):
            S = linalg.zeros(size, size, Fraction(0))
            S[i][j], S[j][i] = Fraction(1), Fraction(-1)
            basis.append(linalg.matmul(inv, S))
    return basis


def block_generators(chart: BundleChart, eta: Sequence[Sequence], iota: Sequence[Sequence]) -> List[VectorField]:
    """Linear fields for the o(eta) + o(iota) block basis."""
    n, k = chart.n, chart.k
    out = []
    for E in orthogonal_basis(eta):
        out.append(linear_field(chart, linalg.block_lower(E, linalg.zeros(k, k), linalg.zeros(k, n))))
    for E in orthogonal_basis(iota):
        out.append(linear_field(chart, linalg.block_lower(linalg.zeros(n, n), E, linalg.zeros(k, n))))
    return out


# ---------------------------------------------------------------------------
# Conservation along Hamiltonian flows
# ---------------------------------------------------------------------------


@dataclass
class ConservationReport:
    invariant: bool
    drifts: List[float]
    message: str
    trajectories: list = field(default_factory=list, repr=False)


def conserved_quantity_check(
    xi: VectorField,
    obs: ST2Observable,
    w0: FramePoint,
    t_max: float,
    dt: float,
    fields: Optional[Sequence[VectorField]] = None,
) -> ConservationReport:
    """Integrate each X^mu from w0 and report max_t |J^mu(F^mu_t(w0)) - J^mu(w0)| per mu."""
    from .flows import integrate_rk4

    invariant = invariance_check(obs, xi)
    chart = obs.chart
    fields = list(fields) if fields is not None else hamiltonian_family_solve(obs).fields
    comps = momentum_components(xi)
    start = {c: float(v) for c, v in w0.as_point(chart).items()}
    drifts, trajs = [], []
    for mu in range(chart.dim):
        traj = integrate_rk4(fields[mu], start, t_max, dt, coords=list(chart.lvy_coords), frame_chart=chart)
        series = traj.evaluate(comps[mu])
        drifts.append(float(np.max(np.abs(series - series[0]))))
        trajs.append(traj)
    msg = "invariant" if invariant else "not invariant - drift expected"
    return ConservationReport(invariant, drifts, msg, trajs)

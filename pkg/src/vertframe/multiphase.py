"""Multiphase space Z: canonical n-form, lifted symmetries and momentum observables.

Coordinates on Z are ``(x^i, y^A, p^i_A, p)``.  The volume forms follow the
fixed conventions

    d^n x        = dx^1 ^ ... ^ dx^n
    d^(n-1) x_i  = d/dx^i ⨼ d^n x
    d^(n-2) x_ij = d/dx^j ⨼ d/dx^i ⨼ d^n x

and everything else (signs of the canonical form, its differential, the
bracket and the exact-term defect) is derived from them by the generic
exterior calculus in :mod:`vertframe.forms`.

The two-slot bracket is ``{J(xi), J(zeta)} = -(xi_Z ⨼ zeta_Z ⨼ dTheta)``;
with the ordinary vector-field bracket on Y this gives

    {J(xi), J(zeta)} = J([xi, zeta]) - d(xi_Z ⨼ zeta_Z ⨼ Theta).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

from . import linalg
from .forms import Form, VectorField, wedge_all
from .geobundle import BundleChart, chart_of, lie_bracket, require_projectable
from .symexpr import ZERO, CoordName, Expr, Poly, pmom, pscalar


@dataclass
class ZPoint:
    """A point of Z; ``p_mom[i][A]`` holds p^(i+1)_(A+1)."""

    x: List
    y: List
    p_mom: List[List]
    p: object

    def as_point(self, chart: BundleChart) -> Dict[CoordName, object]:
        if len(self.x) != chart.n or len(self.y) != chart.k or len(self.p_mom) != chart.n:
            raise ValueError("ZPoint dimensions do not match the chart")
        point = dict(zip(chart.base, self.x))
        point.update(zip(chart.fiber, self.y))
        for i in range(chart.n):
            if len(self.p_mom[i]) != chart.k:
                raise ValueError("ZPoint dimensions do not match the chart")
            for a in range(chart.k):
                point[pmom(i + 1, a + 1)] = self.p_mom[i][a]
        point[pscalar()] = self.p
        return point


def _var(c: CoordName) -> Expr:
    return Expr(Poly.var(c))


def coordinate_field(c: CoordName, chart: BundleChart | None = None) -> VectorField:
    return VectorField({c: 1}, chart=chart)


def volume_form(chart: BundleChart) -> Form:
    """d^n x."""
    return wedge_all(Form.differential(c) for c in chart.base)


def volume_form_i(chart: BundleChart, i: int) -> Form:
    """d^(n-1) x_i for 1-based i."""
    return volume_form(chart).interior(coordinate_field(chart.base[i - 1]))


def volume_form_ij(chart: BundleChart, i: int, j: int) -> Form:
    """d^(n-2) x_ij = d_j ⨼ d_i ⨼ d^n x (requires n >= 2)."""
    return volume_form_i(chart, i).interior(coordinate_field(chart.base[j - 1]))


def theta_Z(chart: BundleChart, momentum_sign: int = 1, volume_sign: int = 1) -> Form:
    """Canonical n-form p^i_A dy^A ^ d^(n-1)x_i + p d^n x.

    The sign arguments exist only for mutation tests of the identity suite.
    """
    theta = volume_form(chart).scale(_var(pscalar()) * volume_sign)
    for i in range(1, chart.n + 1):
        dn1 = volume_form_i(chart, i)
        for a in range(1, chart.k + 1):
            term = Form.differential(chart.fiber[a - 1]).wedge(dn1)
            theta = theta + term.scale(_var(pmom(i, a)) * momentum_sign)
    return theta


def exterior_derivative(omega: Form) -> Form:
    return omega.d()


def interior_product(v: VectorField, omega: Form) -> Form:
    return omega.interior(v)


def _contract(v: VectorField, omega: Form) -> Form:
    """Interior product that sends 0-forms to zero."""
    if omega.degree == 0:
        return Form(0)
    return omega.interior(v)


def lift_to_Z(xi: VectorField) -> VectorField:
    """Canonical lift xi_Z of a projectable field, in adapted coordinates."""
    require_projectable(xi)
    chart = chart_of(xi)
    n, k = chart.n, chart.k
    xs, ys = chart.base, chart.fiber
    comps: Dict[CoordName, Expr] = {c: xi[c] for c in chart.y_coords}
    div_base = ZERO
    for j in range(n):
        div_base = div_base + xi[xs[j]].diff(xs[j])
    for i in range(n):
        for a in range(k):
            total = ZERO
            for j in range(n):
                total = total + _var(pmom(j + 1, a + 1)) * xi[xs[i]].diff(xs[j])
            total = total - _var(pmom(i + 1, a + 1)) * div_base
            for b in range(k):
                total = total - _var(pmom(i + 1, b + 1)) * xi[ys[b]].diff(ys[a])
            comps[pmom(i + 1, a + 1)] = total
    p_comp = _var(pscalar()) * div_base
    for i in range(n):
        for a in range(k):
            p_comp = p_comp + _var(pmom(i + 1, a + 1)) * xi[ys[a]].diff(xs[i])
    comps[pscalar()] = -p_comp
    return VectorField(comps, chart=chart)


def momentum_observable_Z(xi: VectorField, theta: Optional[Form] = None) -> Form:
    """J_Z(xi) = xi_Z ⨼ Theta, an (n-1)-form on Z."""
    chart = chart_of(xi)
    theta = theta if theta is not None else theta_Z(chart)
    return theta.interior(lift_to_Z(xi))


def momentum_observable_Z_local(xi: VectorField) -> Form:
    """The adapted-coordinate formula (p^i_A xi^A + p xi^i) d^(n-1)x_i - p^i_A xi^j dy^A ^ d^(n-2)x_ij."""
    require_projectable(xi)
    chart = chart_of(xi)
    n, k = chart.n, chart.k
    result = Form(n - 1)
    for i in range(1, n + 1):
        coeff = _var(pscalar()) * xi[chart.base[i - 1]]
        for a in range(1, k + 1):
            coeff = coeff + _var(pmom(i, a)) * xi[chart.fiber[a - 1]]
        result = result + volume_form_i(chart, i).scale(coeff)
    if n >= 2:
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i == j or xi[chart.base[j - 1]].is_zero():
                    continue
                dn2 = volume_form_ij(chart, i, j)
                for a in range(1, k + 1):
                    term = Form.differential(chart.fiber[a - 1]).wedge(dn2)
                    result = result - term.scale(_var(pmom(i, a)) * xi[chart.base[j - 1]])
    return result


def hamiltonian_residual_Z(xi: VectorField, theta: Optional[Form] = None) -> Form:
    """dJ(xi) + xi_Z ⨼ dTheta, identically zero for a genuine momentum observable."""
    chart = chart_of(xi)
    theta = theta if theta is not None else theta_Z(chart)
    lifted = lift_to_Z(xi)
    return theta.interior(lifted).d() + theta.d().interior(lifted)


def poisson_Z(xi: VectorField, zeta: VectorField, theta: Optional[Form] = None) -> Form:
    """{J(xi), J(zeta)} = -(xi_Z ⨼ zeta_Z ⨼ dTheta)."""
    require_projectable(xi, zeta)
    chart = chart_of(xi, zeta)
    theta = theta if theta is not None else theta_Z(chart)
    dtheta = theta.d()
    return -dtheta.interior(lift_to_Z(zeta)).interior(lift_to_Z(xi))


def exact_term_Z(xi: VectorField, zeta: VectorField, theta: Optional[Form] = None) -> Form:
    """d(xi_Z ⨼ zeta_Z ⨼ Theta); an (n-1)-form (zero when n = 1)."""
    chart = chart_of(xi, zeta)
    theta = theta if theta is not None else theta_Z(chart)
    inner = _contract(lift_to_Z(xi), _contract(lift_to_Z(zeta), theta))
    if theta.degree < 2:
        return Form(chart.n - 1)
    return inner.d()


def bracket_defect_Z(xi: VectorField, zeta: VectorField, theta: Optional[Form] = None) -> Form:
    """{J(xi), J(zeta)} - J([xi, zeta]); equals -d(xi_Z ⨼ zeta_Z ⨼ Theta)."""
    chart = chart_of(xi, zeta)
    theta = theta if theta is not None else theta_Z(chart)
    bracket = lie_bracket(xi, zeta)
    return poisson_Z(xi, zeta, theta) - momentum_observable_Z(bracket, theta)


def defect_identity_residual(xi: VectorField, zeta: VectorField, theta: Optional[Form] = None) -> Form:
    """{J(xi), J(zeta)} - J([xi, zeta]) + d(xi_Z ⨼ zeta_Z ⨼ Theta)."""
    return bracket_defect_Z(xi, zeta, theta) + exact_term_Z(xi, zeta, theta)


def lift_bracket_projection_residual(xi: VectorField, zeta: VectorField) -> VectorField:
    """Y-part of [xi_Z, zeta_Z] minus [xi, zeta]."""
    chart = chart_of(xi, zeta)
    big = lie_bracket(lift_to_Z(xi), lift_to_Z(zeta)).restrict(chart.y_coords)
    return big - lie_bracket(xi, zeta)


def is_nondegenerate(omega: Form, chart: BundleChart, point: Dict[CoordName, object]) -> bool:
    """True when v -> v ⨼ omega is injective on coordinate directions at ``point``."""
    coords = list(chart.z_coords)
    rows = []
    basis_index: Dict = {}
    contractions = []
    for c in coords:
        contracted = omega.interior(coordinate_field(c)).evaluate(point)
        contractions.append(contracted)
        for idx in contracted:
            basis_index.setdefault(idx, len(basis_index))
    for contracted in contractions:
        row = [0] * len(basis_index)
        for idx, val in contracted.items():
            row[basis_index[idx]] = val
        rows.append(row)
    if not basis_index:
        return False
    return linalg.rank(rows) == len(coords)


def random_z_point(chart: BundleChart, rng: random.Random) -> Dict[CoordName, Fraction]:
    return {c: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for c in chart.z_coords}

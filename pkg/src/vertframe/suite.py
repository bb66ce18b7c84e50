"""The symbolic identity suite run by ``vertframe verify``.

Every check draws its random instances from one ``random.Random`` seeded by
the configuration, so reports are reproducible.  A check returns a
:class:`CheckResult`; failures carry the first offending residual.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from . import linalg
from .config import ScenarioConfig
from .geobundle import (
    BundleChart,
    base_pushforward,
    is_projectable,
    lie_bracket,
    random_polynomial,
    random_projectable,
)
from .multiphase import (
    bracket_defect_Z,
    defect_identity_residual,
    hamiltonian_residual_Z,
    is_nondegenerate,
    lift_bracket_projection_residual,
    momentum_observable_Z,
    momentum_observable_Z_local,
    random_z_point,
    theta_Z,
)
from .symexpr import Expr, evaluate
from .symobs import (
    KKMetric,
    NotSolvableError,
    ST2Observable,
    block_generators,
    hamiltonian_family_solve,
    invariance_check,
    is_killing,
    is_vertical_ambiguity,
    no_torsion_fields,
    no_torsion_residual,
    poisson_T1_ST2,
    random_vertical_ambiguity,
    st2_from_metric,
    structure_residual_ST2,
)
from .vframe import (
    GAElement,
    T1Observable,
    act_on_BL,
    bracket_defect_LVY,
    bracket_wedge_rep_residual,
    ga_act_frame,
    lift_functoriality_residual,
    linear_automorphism_invariance,
    momentum_observable_LVY,
    momentum_via_contraction,
    pairing_residual,
    phi_pushforward_residual,
    pullback_residual,
    random_BL,
    random_frame_point,
    random_group_element,
    relative_element,
    rho_hat,
    structure_residual_T1,
    tensoriality_check,
    wedge_leibniz_residual,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    residual: str = ""
    seconds: float = 0.0

    def as_dict(self) -> dict:
        out = {"name": self.name, "status": "pass" if self.passed else "fail", "detail": self.detail}
        if self.residual:
            out["residual"] = self.residual
        return out


class _Fail(Exception):
    def __init__(self, detail: str, residual=""):
        super().__init__(detail)
        self.detail = detail
        self.residual = str(residual)


def _require(ok: bool, detail: str, residual="") -> None:
    if not ok:
        raise _Fail(detail, residual)


@dataclass
class SuiteContext:
    cfg: ScenarioConfig
    chart: BundleChart
    rng: random.Random
    seed: int = 0
    _pairs: Optional[list] = field(default=None, repr=False)

    def theta(self):
        s = self.cfg.theta_signs
        return theta_Z(self.chart, s.get("momentum", 1), s.get("volume", 1))

    def pairs(self) -> list:
        if self._pairs is None:
            rng = random.Random(f"{self.seed}:pairs")
            self._pairs = [(random_projectable(self.chart, rng), random_projectable(self.chart, rng)) for _ in range(self.cfg.pairs)]
        return self._pairs

    def metric(self) -> KKMetric:
        eta, iota, gamma = self.cfg.metric_blocks()
        return KKMetric(self.chart, eta, iota, gamma)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def check_normalize(ctx: SuiteContext) -> str:
    ch, rng = ctx.chart, ctx.rng
    coords = list(ch.y_coords)
    for _ in range(20):
        a = random_polynomial(rng, coords, 2, 3)
        b = random_polynomial(rng, coords, 2, 3)
        if a.is_zero() or b.is_zero():
            continue
        _require((a / b) * (b / a) == 1, "field-of-fractions identity failed")
        _require(((a * b) / b - a).is_zero(), "cancellation failed", (a * b) / b - a)
        c = coords[rng.randrange(len(coords))]
        d = coords[rng.randrange(len(coords))]
        q = a / b
        _require(q.diff(c).diff(d) == q.diff(d).diff(c), "mixed partials differ")
        point = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for v in coords}
        if evaluate(b, point) != 0:
            _require(evaluate(q, point) == Fraction(evaluate(a, point)) / evaluate(b, point), "evaluation mismatch")
    return "20 random rational-function identities"


def check_jacobi(ctx: SuiteContext) -> str:
    ch, rng = ctx.chart, ctx.rng
    for _ in range(10):
        u, v, w = (random_projectable(ch, rng) for _ in range(3))
        jac = lie_bracket(u, lie_bracket(v, w)) + lie_bracket(v, lie_bracket(w, u)) + lie_bracket(w, lie_bracket(u, v))
        _require(jac.is_zero(), "Jacobi identity failed", jac)
        b = lie_bracket(u, v)
        _require(is_projectable(b), "bracket of projectable fields is not projectable", b)
        diff = base_pushforward(b) - lie_bracket(base_pushforward(u), base_pushforward(v))
        _require(diff.is_zero(), "base pushforward is not a Lie morphism", diff)
    return "10 random triples"


def check_z_hamiltonian(ctx: SuiteContext) -> str:
    theta = ctx.theta()
    count = 0
    for xi, _ in ctx.pairs():
        r = hamiltonian_residual_Z(xi, theta)
        _require(r.is_zero(), "dJ + xi_Z ⨼ dTheta is nonzero", r)
        local = momentum_observable_Z(xi, theta) - momentum_observable_Z_local(xi)
        _require(local.is_zero(), "momentum observable differs from the local formula", local)
        count += 1
    return f"{count} generators"


def check_z_defect(ctx: SuiteContext) -> str:
    theta = ctx.theta()
    nonzero = 0
    for xi, zeta in ctx.pairs():
        r = defect_identity_residual(xi, zeta, theta)
        _require(r.is_zero(), "bracket defect is not -d(xi_Z ⨼ zeta_Z ⨼ Theta)", r)
        if not bracket_defect_Z(xi, zeta, theta).is_zero():
            nonzero += 1
    if ctx.chart.n >= 2:
        _require(nonzero > 0, "no pair with a nonzero defect")
    return f"{len(ctx.pairs())} pairs, {nonzero} with nonzero defect"


def check_z_intertwining(ctx: SuiteContext) -> str:
    for xi, zeta in ctx.pairs()[:10]:
        r = lift_bracket_projection_residual(xi, zeta)
        _require(r.is_zero(), "projection of [xi_Z, zeta_Z] differs from [xi, zeta]", r)
    return "10 pairs"


def check_z_nondegenerate(ctx: SuiteContext) -> str:
    dtheta = ctx.theta().d()
    _require(dtheta.d().is_zero(), "dTheta is not closed", dtheta.d())
    point = random_z_point(ctx.chart, ctx.rng)
    _require(is_nondegenerate(dtheta, ctx.chart, point), "dTheta is degenerate")
    return "closed and nondegenerate"


def check_lvy_closure(ctx: SuiteContext) -> str:
    for xi, zeta in ctx.pairs():
        r = bracket_defect_LVY(xi, zeta)
        _require(r.is_zero(), "{J(xi), J(zeta)} - J([xi, zeta]) is nonzero", r)
    return f"{len(ctx.pairs())} pairs"


def check_lvy_hamiltonian(ctx: SuiteContext) -> str:
    for xi, _ in ctx.pairs():
        f = T1Observable.from_field(xi)
        r = structure_residual_T1(f)
        _require(r.is_zero(), "df + X_f ⨼ dtheta is nonzero", r)
        diff = momentum_observable_LVY(xi) - momentum_via_contraction(xi)
        _require(diff.is_zero(), "J(xi) differs from xi_LVY ⨼ theta", diff)
    return f"{len(ctx.pairs())} generators"


def check_lift_functoriality(ctx: SuiteContext) -> str:
    for xi, zeta in ctx.pairs()[:10]:
        r = lift_functoriality_residual(xi, zeta)
        _require(r.is_zero(), "lift of the bracket differs from the bracket of lifts", r)
    return "10 pairs"


def check_theta_invariance(ctx: SuiteContext) -> str:
    for _ in range(5):
        g = random_group_element(ctx.chart, ctx.rng)
        r = linear_automorphism_invariance(ctx.chart, g.matrix())
        _require(r.is_zero(), "soldering form is not invariant", r)
    return "5 linear automorphisms"


def check_ga_structure(ctx: SuiteContext) -> str:
    ch, rng = ctx.chart, ctx.rng
    ident = GAElement.identity(ch.n, ch.k)
    for _ in range(ctx.cfg.instances):
        w = random_frame_point(ch, rng)
        g, h = random_group_element(ch, rng), random_group_element(ch, rng)
        _require(ga_act_frame(w, ident) == w, "identity does not act trivially")
        _require(ga_act_frame(ga_act_frame(w, g), h) == ga_act_frame(w, g * h), "not a right action")
        _require(relative_element(w, w).is_identity(), "stabilizer is not trivial")
        if not g.is_identity():
            _require(ga_act_frame(w, g) != w, "action is not free")
        B, lam = random_BL(ch, rng)
        B2, lam2 = random_BL(ch, rng)
        # linearity and left-action law of the (B, lam) action
        s = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        sumB = [[a + s * b for a, b in zip(r1, r2)] for r1, r2 in zip(B, B2)]
        left = act_on_BL(g, sumB, lam + s * lam2)
        p1, p2 = act_on_BL(g, B, lam), act_on_BL(g, B2, lam2)
        _require(left[0] == [[a + s * b for a, b in zip(r1, r2)] for r1, r2 in zip(p1[0], p2[0])] and left[1] == p1[1] + s * p2[1], "(B, lam) action is not linear")
        _require(act_on_BL(g * h, B, lam) == act_on_BL(g, *act_on_BL(h, B, lam)), "(B, lam) action is not a left action")
        ginv = g.inverse()
        _require(rho_hat(ga_act_frame(w, g), *act_on_BL(ginv, B, lam)) == rho_hat(w, B, lam), "rho_hat is not constant on orbits")
        NBK = linalg.matmul(linalg.matmul(g.N, B), linalg.inverse(g.K))
        _require(linalg.rank(NBK) == linalg.rank(B), "rank of B is not invariant")
        if (B, lam) != (B2, lam2):
            _require(rho_hat(w, B, lam) != rho_hat(w, B2, lam2), "rho_hat is not injective")
        xi = random_projectable(ch, rng)
        _require(tensoriality_check(xi, w, g), "J(xi) is not tensorial")
    return f"{ctx.cfg.instances} random instances"


def check_phi_pushforward(ctx: SuiteContext) -> str:
    for _ in range(ctx.cfg.instances):
        xi = random_projectable(ctx.chart, ctx.rng)
        B, lam = random_BL(ctx.chart, ctx.rng)
        for c, r in phi_pushforward_residual(xi, B, lam).items():
            _require(r.is_zero(), f"phi_* xi_LVY differs from xi_Z on {c}", r)
    return f"{ctx.cfg.instances} random generators"


def check_pairing(ctx: SuiteContext) -> str:
    for _ in range(ctx.cfg.instances):
        w = random_frame_point(ctx.chart, ctx.rng)
        B, lam = random_BL(ctx.chart, ctx.rng)
        r = pairing_residual(ctx.chart, B, lam)
        _require(r.is_zero() and not r.evaluate(w.as_point()), "<Lambda^n theta, V> differs from phi*Theta", r)
    return f"{ctx.cfg.instances} random (w, B, lam)"


def check_pullback(ctx: SuiteContext) -> str:
    for _ in range(ctx.cfg.instances):
        w = random_frame_point(ctx.chart, ctx.rng)
        B, lam = random_BL(ctx.chart, ctx.rng)
        xi = random_projectable(ctx.chart, ctx.rng)
        r = pullback_residual(xi, B, lam)
        _require(r.is_zero() and not r.evaluate(w.as_point()), "phi*J_Z differs from the wedge representative", r)
    return f"{ctx.cfg.instances} random (xi, w, B, lam)"


def check_wedge_leibniz(ctx: SuiteContext) -> str:
    top = min(ctx.chart.n, ctx.chart.dim)
    for m in range(1, top + 1):
        r = wedge_leibniz_residual(ctx.chart, m)
        _require(r.is_zero(), f"Leibniz rule fails for m={m}", r)
    return f"m = 1..{top}"


def check_wedge_bracket(ctx: SuiteContext) -> str:
    top = min(2, ctx.chart.dim - 1)
    for xi, zeta in ctx.pairs()[:3]:
        for m in range(0, top + 1):
            r = bracket_wedge_rep_residual(xi, zeta, m)
            _require(r.is_zero(), f"wedge-representative bracket fails for m={m}", r)
    return f"3 pairs, m = 0..{top}"


def _random_st2(ctx: SuiteContext) -> ST2Observable:
    ch, rng = ctx.chart, ctx.rng
    d = ch.dim
    g = [[None] * d for _ in range(d)]
    for a in range(d):
        for b in range(a, d):
            coords = ch.base if (a < ch.n and b < ch.n) else ch.y_coords
            e = random_polynomial(rng, coords, 2, 2)
            g[a][b] = g[b][a] = e
    return ST2Observable(ch, g)


def check_st2_hamiltonian(ctx: SuiteContext) -> str:
    observables = [st2_from_metric(ctx.metric())] + [_random_st2(ctx) for _ in range(3)]
    for obs in observables:
        fam = hamiltonian_family_solve(obs)
        r = fam.residual()
        _require(not r, "symmetrized structure equation fails", next(iter(r.values()), ""))
    return f"{len(observables)} observables"


def check_ambiguity(ctx: SuiteContext) -> str:
    fam = hamiltonian_family_solve(_random_st2(ctx))
    for _ in range(3):
        extra = random_vertical_ambiguity(ctx.chart, ctx.rng)
        _require(is_vertical_ambiguity(ctx.chart, extra), "ambiguity is not vertical")
        r = fam.residual(fam.with_ambiguity(extra))
        _require(not r, "adding a vertical ambiguity broke the structure equation", next(iter(r.values()), ""))
    return "3 random vertical ambiguities"


def check_killing(ctx: SuiteContext) -> str:
    ch = ctx.chart
    eta_cfg, iota_cfg, _ = ctx.cfg.metric_blocks()
    lorentz = linalg.identity(ch.n)
    lorentz[0][0] = -1
    tried = 0
    for eta in (eta_cfg, linalg.identity(ch.n), lorentz):
        G = KKMetric(ch, eta, iota_cfg)
        obs = st2_from_metric(G)
        for xi in block_generators(ch, eta, iota_cfg):
            _require(is_killing(xi, G), "basis generator is not Killing")
            _require(invariance_check(obs, xi), "basis generator does not preserve the metric observable")
            tried += 1
        dil = ch.vector_field({ch.base[0]: Expr.lift(ch.base[0])})
        _require(not is_killing(dil, G) and not invariance_check(obs, dil), "dilation reported as a symmetry")
    return f"{tried} basis generators, dilation rejected"


def check_no_torsion(ctx: SuiteContext) -> str:
    G = ctx.metric()
    try:
        fields = no_torsion_fields(G)
    except NotSolvableError as exc:
        raise _Fail(str(exc)) from exc
    r = no_torsion_residual(fields)
    _require(not r, "no-torsion condition fails", next(iter(r.values()), ""))
    s = structure_residual_ST2(st2_from_metric(G), fields)
    _require(not s, "no-torsion fields do not solve the structure equation", next(iter(s.values()), ""))
    return "no-torsion fields verified"


def check_poisson_t1_st2(ctx: SuiteContext) -> str:
    obs = st2_from_metric(ctx.metric())
    for xi, _ in ctx.pairs()[:5]:
        fg, gf = poisson_T1_ST2(T1Observable.from_field(xi), obs)
        _require(all((a + b).is_zero() for ra, rb in zip(fg, gf) for a, b in zip(ra, rb)), "{f,g} != -{g,f}")
    return "5 generators"


CHECKS: Dict[str, Callable[[SuiteContext], str]] = {
    "normalize": check_normalize,
    "jacobi": check_jacobi,
    "z-hamiltonian": check_z_hamiltonian,
    "z-defect": check_z_defect,
    "z-intertwining": check_z_intertwining,
    "z-nondegenerate": check_z_nondegenerate,
    "lvy-closure": check_lvy_closure,
    "lvy-hamiltonian": check_lvy_hamiltonian,
    "lift-functoriality": check_lift_functoriality,
    "theta-invariance": check_theta_invariance,
    "ga-structure": check_ga_structure,
    "phi-pushforward": check_phi_pushforward,
    "pairing": check_pairing,
    "pullback": check_pullback,
    "wedge-leibniz": check_wedge_leibniz,
    "wedge-bracket": check_wedge_bracket,
    "st2-hamiltonian": check_st2_hamiltonian,
    "ambiguity": check_ambiguity,
    "killing": check_killing,
    "no-torsion": check_no_torsion,
    "poisson-t1-st2": check_poisson_t1_st2,
}


def run_suite(cfg: ScenarioConfig, checks: Optional[List[str]] = None) -> List[CheckResult]:
    names = checks if checks is not None else (cfg.checks or list(CHECKS))
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    seed = cfg.resolved_seed()
    results = []
    for name in names:
        # each check gets its own stream so selecting a subset does not change results
        ctx = SuiteContext(cfg, cfg.chart, random.Random(f"{seed}:{name}"), seed)
        start = time.perf_counter()
        try:
            detail = CHECKS[name](ctx)
            results.append(CheckResult(name, True, detail))
        except _Fail as exc:
            results.append(CheckResult(name, False, exc.detail, exc.residual))
        results[-1].seconds = time.perf_counter() - start
    return results

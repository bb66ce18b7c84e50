import math
import random
from fractions import Fraction

import numpy as np
import pytest

from vertframe.flows import (
    AffineScenario,
    IntegrationBlowUp,
    IntegrationError,
    SingularFrameAlongFlow,
    closed_form_flow,
    geodesic_transport_run,
    integrate_rk4,
    parallel_axis_analysis,
    reparam_momentum_run,
    rk4_convergence_slope,
)
from vertframe.forms import VectorField
from vertframe.geobundle import BundleChart
from vertframe.symexpr import Expr, parse, x, y
from vertframe.symobs import KKMetric, hamiltonian_family_solve, st2_from_metric
from vertframe.vframe import FramePoint, identity_frame_point, random_frame_point

CH = BundleChart(2, 2)
CH11 = BundleChart(1, 1)
I2 = [[1, 0], [0, 1]]

X1 = Expr.lift(x(1))


def float_point(w, chart):
    return {c: float(v) for c, v in w.as_point(chart).items()}


class TestRK4:
    def test_constant_field(self):
        traj = integrate_rk4([Expr()], {x(1): 2.5}, 1.0, 0.1, coords=[x(1)])
        assert np.all(traj.column(x(1)) == 2.5)
        assert len(traj.times) == 11

    def test_exponential(self):
        traj = integrate_rk4([X1], {x(1): 1.0}, 1.0, 1e-3, coords=[x(1)])
        assert abs(traj.endpoint()[x(1)] - math.e) <= 1e-10

    def test_convergence_slope(self):
        slope, errors = rk4_convergence_slope()
        assert abs(slope - 4) <= 0.2
        assert all(a > b for a, b in zip(errors, errors[1:]))

    def test_blow_up(self):
        with pytest.raises(IntegrationBlowUp) as info:
            integrate_rk4([X1 * X1], {x(1): 1.0}, 2.0, 1e-3, coords=[x(1)])
        err = info.value
        # x = 1 / (1 - t) escapes near t = 1, well before t_max = 2
        assert 900 < err.last_valid < 1100
        assert len(err.partial.times) == err.last_valid + 1
        assert np.all(np.isfinite(err.partial.states))
        assert isinstance(err, IntegrationError)

    def test_singular_frame(self):
        # d/dt P^0_0 = -1 drives the base frame block to zero at t = 1/2
        start = float_point(FramePoint([0], [0], [[Fraction(1, 2)]], [[1]], [[0]]), CH11)
        field_ = VectorField({CH11.frame_coord(0, 0): Expr.lift(-1)}, chart=CH11)
        with pytest.raises(SingularFrameAlongFlow) as info:
            integrate_rk4(field_, start, 1.0, 1e-3, coords=list(CH11.lvy_coords), frame_chart=CH11)
        assert info.value.last_valid in (499, 500)
        assert info.value.partial.states[-1][CH11.lvy_coords.index(CH11.frame_coord(0, 0))] > 0

    def test_singular_at_start(self):
        start = float_point(identity_frame_point(CH11), CH11)
        start[CH11.frame_coord(1, 1)] = 0.0
        with pytest.raises(SingularFrameAlongFlow) as info:
            integrate_rk4([Expr()] * len(CH11.lvy_coords), start, 1.0, 0.5, coords=list(CH11.lvy_coords), frame_chart=CH11)
        assert info.value.last_valid == 0

    @pytest.mark.parametrize("t_max,dt", [(1.0, 0.3), (1.0, 0.0), (-1.0, 0.1)])
    def test_bad_grid(self, t_max, dt):
        with pytest.raises(ValueError):
            integrate_rk4([X1], {x(1): 1.0}, t_max, dt, coords=[x(1)])

    def test_unbound_start(self):
        with pytest.raises(ValueError):
            integrate_rk4([X1, X1], {x(1): 1.0}, 1.0, 0.5, coords=[x(1), x(2)])

    def test_deterministic(self):
        v = CH.vector_field([parse("-x2"), parse("x1"), parse("y1*x1"), 0])
        start = {x(1): 0.3, x(2): -0.2, y(1): 1.0, y(2): 0.0}
        a = integrate_rk4(v, start, 1.0, 1e-2)
        b = integrate_rk4(v, start, 1.0, 1e-2)
        assert np.array_equal(a.states, b.states)


class TestClosedForm:
    def setup_method(self):
        self.ginv = [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        self.w0 = random_frame_point(CH, random.Random(11)).as_point(CH)

    def params(self, mu):
        return {"chart": CH, "ginv": self.ginv, "mu": mu, "point": self.w0}

    def test_time_zero_is_identity(self):
        for case, mu in (("constant-metric", 0), ("angular-base", 1), ("angular-fiber", 3)):
            assert closed_form_flow(case, self.params(mu), 0) == self.w0

    def test_fiber_formula(self):
        # F^A_t = (x^k + t eta^kj P^A_j, y^C + t iota^CB P^A_B, P const)
        t = Fraction(3, 7)
        out = closed_form_flow("angular-fiber", self.params(2), t)
        w = self.w0
        assert out[x(1)] == w[x(1)] - t * w[CH.frame_coord(2, 0)]
        assert out[x(2)] == w[x(2)] + t * w[CH.frame_coord(2, 1)]
        assert out[y(1)] == w[y(1)] + t * w[CH.frame_coord(2, 2)]
        assert all(out[c] == w[c] for c in CH.frame_coords)
        assert isinstance(out[y(2)], Fraction)

    def test_matches_rk4(self):
        G = KKMetric(CH, [[-1, 0], [0, 1]], I2)
        fields = hamiltonian_family_solve(st2_from_metric(G)).fields
        start = {c: float(v) for c, v in self.w0.items()}
        for mu in range(4):
            traj = integrate_rk4(fields[mu], start, 10.0, 1e-3, coords=list(CH.lvy_coords), frame_chart=CH)
            exact = closed_form_flow("constant-metric", self.params(mu), Fraction(10))
            assert max(abs(traj.endpoint()[c] - float(exact[c])) for c in CH.lvy_coords) <= 1e-9

    @pytest.mark.parametrize(
        "case,mu",
        [("angular-base", 2), ("angular-fiber", 0), ("affine-time", 0), ("bogus", 0)],
    )
    def test_rejected(self, case, mu):
        with pytest.raises(ValueError):
            closed_form_flow(case, self.params(mu), 1)


def affine(iota, k_mat, v, seed=5):
    k = len(iota)
    return AffineScenario(iota, k_mat, v, random_frame_point(BundleChart(1, k), random.Random(seed)))


ROT3 = [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]


class TestParallelAxis:
    def test_euclidean_k3_rational(self):
        rep = parallel_axis_analysis(affine([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ROT3, [1, 2, -1]), 2)
        assert rep.notes["path"] == "rational"
        assert all(v == 0 for v in rep.drifts["J0"])
        for label in ("J1", "J2", "J3"):
            assert all(d - e == 0 for d, e in zip(rep.drifts[label], rep.expected[label]))
        assert any(e != 0 for e in rep.expected["J1"])

    def test_euclidean_k3_rk4(self):
        rep = parallel_axis_analysis(affine([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ROT3, [1, 2, -1]), 2, dt=1e-3)
        assert max(rep.max_deviation_from_expected().values()) <= 1e-12
        assert rep.max_abs()["J0"] == 0

    def test_lorentz_k4(self):
        iota = [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        boost = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
        scen = affine(iota, boost, [1, 0, 2, -1])
        exact = parallel_axis_analysis(scen, 1)
        for label in exact.drifts:
            assert all(d - e == 0 for d, e in zip(exact.drifts[label], exact.expected[label]))
        numeric = parallel_axis_analysis(scen, 1, dt=1e-3)
        assert max(numeric.max_deviation_from_expected().values()) <= 1e-12

    def test_lorentz_signs_cancel_in_correction(self):
        # y^1 moves at iota^11 P^B_1 = -P^B_1, but the correction pairs x0-dot with
        # iota_1C y-dot^C = P^B_1, so the metric signs cancel
        iota = [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
        scen = affine(iota, [[0] * 4 for _ in range(4)], [1, 0, 0, 0])
        ch = scen.chart
        w0 = scen.start.as_point(ch)
        ginv = [[1, 0, 0, 0, 0]] + [[0] + row for row in iota]
        rep = parallel_axis_analysis(scen, 1)
        for B in range(1, 5):
            moved = closed_form_flow("affine-fiber", {"chart": ch, "ginv": ginv, "mu": B, "point": w0}, 1)
            assert moved[y(1)] - w0[y(1)] == -w0[ch.frame_coord(B, 1)]
            assert rep.drifts[f"J{B}"][-1] == w0[ch.frame_coord(B, 0)] * w0[ch.frame_coord(B, 1)]

    def test_pure_rotation_conserved(self):
        rep = parallel_axis_analysis(affine([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ROT3, [0, 0, 0]), 2)
        assert all(rep.conserved.values())
        assert all(all(v == 0 for v in s) for s in rep.expected.values())

    @pytest.mark.parametrize(
        "k_mat,v",
        [([[1, 0, 0], [0, 0, 0], [0, 0, 0]], [0, 0, 0]), (ROT3, [1, 2])],
    )
    def test_mismatch(self, k_mat, v):
        with pytest.raises(ValueError, match="scenario mismatch"):
            affine([[1, 0, 0], [0, 1, 0], [0, 0, 1]], k_mat, v)


class TestGeodesic:
    def test_flat(self):
        rep = geodesic_transport_run(KKMetric(CH11, [[1]], [[1]]), random_frame_point(CH11, random.Random(2)), 1.0, 1e-3)
        assert rep.geodesic_residual <= 1e-8
        assert rep.transport_residual <= 1e-8
        assert rep.energy_drift <= 1e-8

    def test_gamma_x1(self):
        start = identity_frame_point(CH11)
        rep = geodesic_transport_run(KKMetric(CH11, [[1]], [[1]], [["x1"]]), start, 10.0, 1e-3)
        assert rep.geodesic_residual <= 1e-6
        assert rep.transport_residual <= 1e-6
        assert rep.energy_drift <= 1e-8
        # the frame is really transported
        col = rep.trajectory.column(CH11.frame_coord(1, 0))
        assert np.max(np.abs(col - col[0])) > 1e-3

    def test_needs_n1(self):
        with pytest.raises(ValueError):
            geodesic_transport_run(KKMetric(CH, I2, I2), identity_frame_point(CH), 1.0, 0.1)


class TestReparam:
    G = KKMetric(CH11, [[1]], [[1]])

    def start(self):
        return random_frame_point(CH11, random.Random(4))

    def test_constant_f_conserved(self):
        rep = reparam_momentum_run("1", self.G, self.start(), 10.0, 1e-3)
        assert all(rep.conserved.values())
        assert max(rep.max_abs().values()) <= 1e-9

    def test_linear_f_drifts(self):
        rep = reparam_momentum_run("x1", self.G, self.start(), 1.0, 1e-3)
        assert not rep.conserved["J0"]
        # along X^0, x1 moves at rate P^0_0 and p is constant, so J_Z = p x1 changes linearly
        js = rep.values["JZ"]
        assert np.allclose(np.diff(js, 2), 0, atol=1e-9)
        assert abs(js[-1] - js[0]) > 1e-6 or rep.values["JZ"][0] == 0

    def test_zero_f(self):
        rep = reparam_momentum_run("0", self.G, self.start(), 1.0, 1e-2)
        assert all(np.all(v == 0) for v in rep.values.values())

    def test_rejects(self):
        with pytest.raises(ValueError):
            reparam_momentum_run("y1", self.G, self.start(), 1.0, 1e-2)
        with pytest.raises(ValueError):
            reparam_momentum_run("1", KKMetric(CH, I2, I2), identity_frame_point(CH), 1.0, 1e-2)

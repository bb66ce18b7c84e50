import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from vertframe import linalg
from vertframe.forms import Form, VectorField, VVForm, lie_bracket_fields, sort_with_sign, wedge_all
from vertframe.symexpr import Expr, x, y

from conftest import polynomials, rationals

COORDS = [x(1), x(2), y(1), y(2)]


def square(n):
    return st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n)


class TestLinalg:
    @given(square(3))
    def test_det_and_inverse_against_sympy(self, M):
        S = sympy.Matrix(M)
        assert linalg.det(M) == S.det()
        if S.det() != 0:
            assert sympy.Matrix(linalg.inverse(M)) == S.inv()
            assert linalg.matmul(M, linalg.inverse(M)) == linalg.identity(3)
        assert linalg.rank(M) == S.rank()

    @given(square(3))
    def test_adjugate(self, M):
        assert sympy.Matrix(linalg.adjugate(M)) == sympy.Matrix(M).adjugate()

    def test_singular_inverse(self):
        with pytest.raises(ZeroDivisionError):
            linalg.inverse([[1, 2], [2, 4]])

    def test_block_lower(self):
        M = linalg.block_lower([[1]], [[2, 0], [0, 3]], [[4], [5]])
        assert M == [[1, 0, 0], [4, 2, 0], [5, 0, 3]]

    def test_symmetry_and_trace(self):
        assert linalg.is_symmetric([[1, 2], [2, 5]])
        assert not linalg.is_symmetric([[1, 2], [3, 5]])
        assert linalg.trace([[1, 2], [3, 5]]) == 6


class TestSortWithSign:
    def test_permutation_parity(self):
        assert sort_with_sign((2, 1)) == (-1, (1, 2))
        assert sort_with_sign((3, 1, 2)) == (1, (1, 2, 3))
        assert sort_with_sign((1, 1))[0] == 0


def dx(c):
    return Form.differential(c)


class TestForms:
    def test_single_term_leibniz(self):
        from vertframe.symexpr import pscalar

        f = wedge_all([dx(x(1)), dx(x(2))]).scale(Expr.lift(pscalar()))
        assert f.d() == wedge_all([dx(pscalar()), dx(x(1)), dx(x(2))])

    def test_interior_of_volume(self):
        vol = dx(x(1)).wedge(dx(x(2)))
        assert vol.interior(VectorField({x(1): 1})) == dx(x(2))
        assert vol.interior(VectorField({x(2): 1})) == -dx(x(1))

    def test_interior_of_function_raises(self):
        with pytest.raises(ValueError):
            Form.function(Expr.lift(x(1))).interior(VectorField({x(1): 1}))

    def test_degree_mismatch(self):
        with pytest.raises(ValueError):
            dx(x(1)) + dx(x(1)).wedge(dx(x(2)))

    def test_pullback_of_area_form(self):
        # x1 = 2 y1 + y2, x2 = y1 - y2 has Jacobian determinant -3
        mapping = {x(1): 2 * Expr.lift(y(1)) + Expr.lift(y(2)), x(2): Expr.lift(y(1)) - Expr.lift(y(2))}
        area = dx(x(1)).wedge(dx(x(2)))
        assert area.pullback(mapping, [y(1), y(2)]) == dx(y(1)).wedge(dx(y(2))).scale(-3)


def random_form(rng, degree):
    terms = []
    for _ in range(3):
        idx = rng.sample(COORDS, degree)
        coeff = Expr.lift(rng.choice(COORDS)) * rng.randint(-3, 3) + rng.randint(-2, 2)
        coeff = coeff * Expr.lift(rng.choice(COORDS))
        terms.append((idx, coeff))
    return Form.from_unsorted(degree, terms)


@given(st.integers(0, 10 ** 6), st.integers(0, 2))
def test_d_squared_is_zero(seed, degree):
    f = random_form(random.Random(seed), degree)
    assert f.d().d().is_zero()


@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(1, 2))
def test_graded_commutativity_and_leibniz(seed, p, q):
    rng = random.Random(seed)
    a, b = random_form(rng, p), random_form(rng, q)
    assert a.wedge(b) == b.wedge(a).scale((-1) ** (p * q))
    assert a.wedge(b).d() == a.d().wedge(b) + a.wedge(b.d()).scale((-1) ** p)


@given(st.integers(0, 10 ** 6), polynomials(COORDS), polynomials(COORDS))
def test_interior_antiderivation_and_nilpotent(seed, v1, v2):
    rng = random.Random(seed)
    a, b = random_form(rng, 2), random_form(rng, 1)
    v = VectorField({x(1): v1, y(2): v2, x(2): 1})
    assert a.interior(v).interior(v).is_zero()
    assert a.wedge(b).interior(v) == a.interior(v).wedge(b) + a.wedge(b.interior(v))


@given(polynomials(COORDS), polynomials(COORDS), polynomials(COORDS), polynomials(COORDS))
def test_cartan_bracket_formula(a1, a2, b1, b2):
    """i_[v,w] = L_v i_w - i_w L_v with L_v = d i_v + i_v d."""
    v = VectorField({x(1): a1, y(1): a2})
    w = VectorField({x(2): b1, y(1): b2})
    omega = random_form(random.Random(7), 2)

    def lie(u, f):
        return f.interior(u).d() + f.d().interior(u)

    lhs = omega.interior(lie_bracket_fields(v, w))
    rhs = lie(v, omega.interior(w)) - lie(v, omega).interior(w)
    assert lhs == rhs


class TestVVForm:
    def test_wedge_value_indices_antisymmetric(self):
        a = VVForm(0, 1, 3, {(0,): Form.function(1)})
        b = VVForm(0, 1, 3, {(1,): Form.function(1)})
        assert a.wedge(b).component((0, 1)).scalar() == 1
        assert a.wedge(b).component((1, 0)).scalar() == -1
        assert a.wedge(a).is_zero()

    def test_overflow(self):
        a = VVForm(0, 2, 2, {(0, 1): Form.function(1)})
        with pytest.raises(ValueError):
            a.wedge(VVForm(0, 1, 2, {(0,): Form.function(1)}))

    def test_pair(self):
        a = VVForm(1, 1, 2, {(0,): dx(x(1)), (1,): dx(x(2))})
        assert a.pair({(0,): 2, (1,): Fraction(1, 2)}) == dx(x(1)).scale(2) + dx(x(2)).scale(Fraction(1, 2))

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from vertframe.symexpr import (
    ONE,
    ZERO,
    Expr,
    ParseError,
    SingularEvaluationError,
    UnboundVariableError,
    ZeroDenominatorError,
    compile_exprs,
    coord_from_name,
    differentiate,
    evaluate,
    normalize,
    param,
    parse,
    pi,
    piA,
    piAx,
    pmom,
    pscalar,
    x,
    y,
)

from conftest import polynomials, random_point, sym, sympy_equal, to_sympy

COORDS = [x(1), x(2), y(1), y(2)]
SYMS = {c: sym(str(c)) for c in COORDS}


def X(i):
    return Expr.lift(x(i))


def Y(a):
    return Expr.lift(y(a))


class TestNormalize:
    def test_commutativity_cancels(self):
        assert normalize(X(1) * X(2) - X(2) * X(1)).is_zero()

    def test_self_quotient_of_determinant(self):
        d = Expr.lift(pi(1, 1)) * Expr.lift(pi(2, 2)) - Expr.lift(pi(1, 2)) * Expr.lift(pi(2, 1))
        assert normalize(d / d) == ONE

    def test_exact_division(self):
        q = (X(1) ** 2 - 1) / (X(1) - 1)
        assert q.is_polynomial()
        assert q == X(1) + 1
        assert sympy_equal(q, sym("x1") + 1)

    def test_zero_is_unique(self):
        z = (X(1) + Y(2)) - (Y(2) + X(1))
        assert z == ZERO and str(z) == "0" and normalize(z) is not None

    def test_zero_denominator(self):
        with pytest.raises(ZeroDenominatorError):
            X(1) / (X(1) - X(1))

    def test_idempotent(self):
        e = (X(1) ** 2 * Y(1) - X(1)) / (X(1) * Y(2) + X(1))
        assert normalize(normalize(e)) == normalize(e)
        assert str(normalize(normalize(e))) == str(normalize(e))

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            Expr.lift(0.5)


class TestDifferentiate:
    def test_product_rule(self):
        assert differentiate(X(1) * Y(1), x(1)) == Y(1)

    def test_independent(self):
        assert differentiate(X(1), y(1)).is_zero()

    def test_reciprocal_against_finite_difference(self):
        d = differentiate(ONE / X(1), x(1))
        assert sympy_equal(d, -1 / sym("x1") ** 2)
        h = 1e-6
        fd = (1 / (2 + h) - 1 / (2 - h)) / (2 * h)
        assert abs(float(evaluate(d, {x(1): Fraction(2)})) - fd) < 1e-8

    def test_quotient_rule_against_sympy(self):
        e = (X(1) ** 2 * Y(1) + 3) / (X(2) - Y(1) ** 2)
        for c in COORDS:
            target = sympy.diff(to_sympy(e), SYMS[c])
            assert sympy_equal(e.diff(c), target)


class TestEvaluate:
    def test_simple(self):
        assert evaluate(X(1) + Y(1), {x(1): 1, y(1): 2}) == 3

    def test_identity_determinant(self):
        d = Expr.lift(pi(1, 1)) * Expr.lift(pi(2, 2)) - Expr.lift(pi(1, 2)) * Expr.lift(pi(2, 1))
        assert evaluate(d, {pi(1, 1): 1, pi(2, 2): 1, pi(1, 2): 0, pi(2, 1): 0}) == 1

    def test_normalized_zero_vanishes_everywhere(self):
        a = X(1) * Y(1) + X(2)
        b = X(2) - Y(2) + 5
        z = (a / b) * b - a
        rng = random.Random(3)
        for _ in range(100):
            assert evaluate(z, random_point(COORDS, rng)) == 0

    def test_unbound(self):
        with pytest.raises(UnboundVariableError):
            evaluate(X(1) + Y(1), {x(1): 1})

    def test_singular_exact_and_float(self):
        e = ONE / (X(1) - 1)
        with pytest.raises(SingularEvaluationError):
            evaluate(e, {x(1): 1})
        with pytest.raises(SingularEvaluationError):
            evaluate(e, {x(1): 1.0 + 1e-14})

    def test_exact_result_type(self):
        v = evaluate(X(1) / 3, {x(1): 1})
        assert v == Fraction(1, 3) and not isinstance(v, float)
        assert isinstance(evaluate(X(1) / 3, {x(1): 1.0}), float)

    def test_compile_matches_evaluate(self):
        exprs = [X(1) * Y(2) - 3, (X(2) + 1) / (Y(1) ** 2 + 1)]
        f = compile_exprs(exprs, COORDS)
        pt = {x(1): 0.3, x(2): -1.2, y(1): 0.7, y(2): 2.5}
        got = f(tuple(pt[c] for c in COORDS))
        for g, e in zip(got, exprs):
            assert abs(g - evaluate(e, pt)) < 1e-14


class TestParse:
    def test_coordinate_names(self):
        assert coord_from_name("x1") == x(1)
        assert coord_from_name("pi_1_2") == pi(1, 2)
        assert coord_from_name("piA_1_2") == piA(1, 2)
        assert coord_from_name("piA_1_x2") == piAx(1, 2)
        assert coord_from_name("p_1_A2") == pmom(1, 2)
        assert coord_from_name("p") == pscalar()

    def test_round_trip(self):
        e = (X(1) ** 2 * Y(1) - Fraction(3, 2) * X(2) + 1) / (X(1) + Y(2))
        assert parse(str(e)) == e

    def test_rational_literals_and_powers(self):
        assert parse("3/4*x1^2 - (y1 + 1)^2") == Fraction(3, 4) * X(1) ** 2 - (Y(1) + 1) ** 2

    def test_error_position(self):
        with pytest.raises(ParseError) as info:
            parse("x1 +\n (y1")
        assert info.value.line == 2 and info.value.column == 5
        assert "line 2, column 5" in str(info.value)

    @pytest.mark.parametrize("text", ["x1 +", "x1 ** 2", "2^x1", "(x1", "x1 $ y1", ""])
    def test_bad_inputs(self, text):
        with pytest.raises(ParseError):
            parse(text)

    def test_param_symbols_are_independent(self):
        e = parse("a*x1")
        assert param("a") in e.variables()
        assert e.diff(param("a")) == X(1)


class TestCoordOrdering:
    def test_total_order_kind_major(self):
        names = [pscalar(), y(2), x(1), piA(1, 1), pi(2, 1), x(2), pmom(1, 1)]
        ordered = sorted(names)
        assert ordered.index(x(1)) < ordered.index(x(2)) < ordered.index(y(2))

    def test_check_dims(self):
        y(3).check_dims(1, 3)
        with pytest.raises(ValueError):
            y(3).check_dims(2, 2)


# property tests -----------------------------------------------------------


@given(polynomials(COORDS), polynomials(COORDS))
def test_arithmetic_matches_sympy(a, b):
    assert sympy.expand(to_sympy(a + b) - to_sympy(a) - to_sympy(b)) == 0
    assert sympy.expand(to_sympy(a * b) - to_sympy(a) * to_sympy(b)) == 0


@given(polynomials(COORDS), polynomials(COORDS))
def test_field_of_fractions(a, b):
    if a.is_zero() or b.is_zero():
        return
    assert (a / b) * (b / a) == ONE
    assert ((a * b) / b) == a


@given(polynomials(COORDS), polynomials(COORDS), polynomials(COORDS))
def test_normalize_is_congruence(a, b, c):
    if c.is_zero():
        return
    lhs = normalize((a + b) / c)
    rhs = normalize(normalize(a) / normalize(c) + normalize(b) / normalize(c))
    assert lhs == rhs


@given(polynomials(COORDS), polynomials(COORDS), st.sampled_from(COORDS), st.sampled_from(COORDS))
def test_mixed_partials_commute(a, b, c1, c2):
    if b.is_zero():
        return
    q = a / (b * b + 1)
    assert q.diff(c1).diff(c2) == q.diff(c2).diff(c1)
    assert sympy.simplify(to_sympy(q.diff(c1)) - sympy.diff(to_sympy(q), SYMS[c1])) == 0


@given(polynomials(COORDS), polynomials(COORDS), st.integers(0, 10 ** 6))
def test_evaluate_normalize_agree(a, b, seed):
    rng = random.Random(seed)
    pt = random_point(COORDS, rng)
    den = b * b + 1
    assert evaluate(normalize(a / den), pt) == Fraction(evaluate(a, pt)) / evaluate(den, pt)

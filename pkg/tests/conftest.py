import os
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import HealthCheck, settings, strategies as st

from vertframe.geobundle import BundleChart
from vertframe.symexpr import Expr, const

settings.register_profile(
    "vertframe",
    deadline=None,
    max_examples=30,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "vertframe"))


def to_sympy(e) -> sympy.Expr:
    """Independent oracle: re-read the printed form of an Expr with sympy."""
    return sympy.sympify(str(Expr.lift(e)).replace("^", "**"))


def sym(name: str) -> sympy.Symbol:
    return sympy.Symbol(name)


def sympy_equal(e, target) -> bool:
    return sympy.simplify(to_sympy(e) - target) == 0


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=4)
nonzero_rationals = rationals.filter(lambda q: q != 0)


@st.composite
def polynomials(draw, coords, max_terms: int = 4, max_degree: int = 2):
    """Random sparse polynomial Expr over ``coords``."""
    total = Expr()
    for _ in range(draw(st.integers(0, max_terms))):
        term = const(draw(nonzero_rationals))
        for _ in range(draw(st.integers(0, max_degree))):
            term = term * Expr.lift(draw(st.sampled_from(list(coords))))
        total = total + term
    return total


@st.composite
def projectable_fields(draw, chart: BundleChart, max_terms: int = 3):
    comps = {}
    for c in chart.base:
        comps[c] = draw(polynomials(chart.base, max_terms))
    for c in chart.fiber:
        comps[c] = draw(polynomials(chart.y_coords, max_terms))
    return chart.vector_field(comps)


def random_point(coords, rng: random.Random, exact: bool = True):
    if exact:
        return {c: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for c in coords}
    return {c: rng.uniform(-2, 2) for c in coords}


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def chart22():
    return BundleChart(2, 2)


@pytest.fixture
def chart11():
    return BundleChart(1, 1)


# acceptance reporting ------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion with a one-line report")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    if rep.when == "setup" and rep.passed:
        return
    _ACCEPTANCE[number] = (title, rep.passed, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, secs = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({secs:.2f}s)")

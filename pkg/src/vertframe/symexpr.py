"""Exact multivariate rational-function expressions over named chart coordinates.

An :class:`Expr` is a quotient of two sparse polynomials with rational
coefficients.  Polynomials are dictionaries mapping monomials to
coefficients; a monomial is a tuple of ``(CoordName, exponent)`` pairs sorted
by the fixed coordinate ordering.  Every symbolic identity in the package is
decided by reducing a difference to the zero expression, so equality here is
exact: two expressions are equal iff ``a.num * b.den - b.num * a.den`` is the
zero polynomial.

Coordinate text names follow the config grammar::

    x1  y2  pi_1_2  piA_1_2  piA_1_x2  p_1_A2  p

with any other identifier read as a free parameter.
"""

from __future__ import annotations

import functools
import re
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple, Union

__all__ = [
    "CoordName",
    "Poly",
    "Expr",
    "ZeroDenominatorError",
    "SingularEvaluationError",
    "UnboundVariableError",
    "ParseError",
    "x",
    "y",
    "pi",
    "piA",
    "piAx",
    "pmom",
    "pscalar",
    "param",
    "const",
    "normalize",
    "differentiate",
    "evaluate",
    "parse",
    "ZERO",
    "ONE",
]


class ZeroDenominatorError(ZeroDivisionError):
    """Raised when an expression would be divided by an identically-zero denominator."""


class SingularEvaluationError(ArithmeticError):
    """Raised when a denominator vanishes at the evaluation point."""


class UnboundVariableError(KeyError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {self.line}, column {self.column}")


# ---------------------------------------------------------------------------
# Coordinate names
# ---------------------------------------------------------------------------

_KINDS = ("BaseX", "FiberY", "FrameNN", "FrameKK", "FrameKN", "MomP", "MomScalar", "Param")
_KIND_RANK = {kind: rank for rank, kind in enumerate(_KINDS)}


class CoordName:
    """An interned chart coordinate.

    Instances are interned, so identity comparison and hashing are cheap.
    The total order is kind-major, then indices, and is the variable order
    used for canonical monomial ordering.
    """

    __slots__ = ("kind", "indices", "name", "key", "_hash", "__weakref__")
    _registry: Dict[Tuple, "CoordName"] = {}

    def __new__(cls, kind: str, *indices, name: str | None = None):
        if kind not in _KIND_RANK:
            raise ValueError(f"unknown coordinate kind {kind!r}")
        if kind == "Param":
            if not name:
                raise ValueError("Param coordinates need a name")
            indices = ()
        else:
            for idx in indices:
                if not isinstance(idx, int) or idx < 1:
                    raise ValueError(f"coordinate indices are 1-based integers, got {indices!r}")
            name = None
        reg_key = (kind, tuple(indices), name)
        existing = cls._registry.get(reg_key)
        if existing is not None:
            return existing
        self = object.__new__(cls)
        self.kind = kind
        self.indices = tuple(indices)
        self.name = name
        self.key = (_KIND_RANK[kind], self.indices, name or "")
        self._hash = hash(self.key)
        cls._registry[reg_key] = self
        return self

    def __reduce__(self):
        return (_rebuild_coord, (self.kind, self.indices, self.name))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other: "CoordName"):
        return self.key < other.key

    def __le__(self, other: "CoordName"):
        return self.key <= other.key

    def __gt__(self, other: "CoordName"):
        return self.key > other.key

    def __ge__(self, other: "CoordName"):
        return self.key >= other.key

    def __str__(self):
        kind, idx = self.kind, self.indices
        if kind == "BaseX":
            return f"x{idx[0]}"
        if kind == "FiberY":
            return f"y{idx[0]}"
        if kind == "FrameNN":
            return f"pi_{idx[0]}_{idx[1]}"
        if kind == "FrameKK":
            return f"piA_{idx[0]}_{idx[1]}"
        if kind == "FrameKN":
            return f"piA_{idx[0]}_x{idx[1]}"
        if kind == "MomP":
            return f"p_{idx[0]}_A{idx[1]}"
        if kind == "MomScalar":
            return "p"
        return self.name

    def __repr__(self):
        return f"CoordName({self})"

    def check_dims(self, n: int, k: int) -> None:
        """Raise ValueError if an index exceeds the chart dimensions."""
        bounds = {
            "BaseX": (n,),
            "FiberY": (k,),
            "FrameNN": (n, n),
            "FrameKK": (k, k),
            "FrameKN": (k, n),
            "MomP": (n, k),
        }.get(self.kind, ())
        for idx, bound in zip(self.indices, bounds):
            if idx > bound:
                raise ValueError(f"coordinate {self} out of range for n={n}, k={k}")


def _rebuild_coord(kind, indices, name):
    return CoordName(kind, *indices, name=name)


def x(i: int) -> CoordName:
    return CoordName("BaseX", i)


def y(a: int) -> CoordName:
    return CoordName("FiberY", a)


def pi(i: int, j: int) -> CoordName:
    """pi^i_j = e^i(d/dx^j)."""
    return CoordName("FrameNN", i, j)


def piA(a: int, b: int) -> CoordName:
    """pi^A_B = eps^A(d/dy^B)."""
    return CoordName("FrameKK", a, b)


def piAx(a: int, i: int) -> CoordName:
    """pi^A_i = eps^A(d/dx^i)."""
    return CoordName("FrameKN", a, i)


def pmom(i: int, a: int) -> CoordName:
    """Multimomentum coordinate p^i_A on Z."""
    return CoordName("MomP", i, a)


def pscalar() -> CoordName:
    """The covariant Hamiltonian coordinate p on Z."""
    return CoordName("MomScalar")


def param(name: str) -> CoordName:
    return CoordName("Param", name=name)


# ---------------------------------------------------------------------------
# Monomials and polynomials
# ---------------------------------------------------------------------------

Monomial = Tuple[Tuple[CoordName, int], ...]
_ONE_MONO: Monomial = ()


@functools.lru_cache(maxsize=1 << 16)
def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for var, e in b:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted(exps.items(), key=lambda ve: ve[0].key))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_cmp(a: Monomial, b: Monomial) -> int:
    """Graded lexicographic comparison (earlier coordinates are heavier)."""
    da, db = _mono_degree(a), _mono_degree(b)
    if da != db:
        return -1 if da < db else 1
    ea, eb = dict(a), dict(b)
    for var in sorted(set(ea) | set(eb), key=lambda v: v.key):
        pa, pb = ea.get(var, 0), eb.get(var, 0)
        if pa != pb:
            return -1 if pa < pb else 1
    return 0


_mono_key = functools.cmp_to_key(_mono_cmp)


def _mono_div(a: Monomial, b: Monomial):
    """Return a / b if b divides a, else None."""
    ea = dict(a)
    for var, e in b:
        have = ea.get(var, 0)
        if have < e:
            return None
        if have == e:
            del ea[var]
        else:
            ea[var] = have - e
    return tuple(sorted(ea.items(), key=lambda ve: ve[0].key))


def _mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    eb = dict(b)
    out = [(var, min(e, eb[var])) for var, e in a if var in eb]
    return tuple(out)


def _coerce_coeff(c):
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _coerce_coeff(Fraction(c.numerator, c.denominator))
    if isinstance(c, str):
        return _coerce_coeff(Fraction(c))
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def _clean(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        # callers guarantee nonzero, already-coerced coefficients
        self.terms: Dict[Monomial, object] = dict(terms) if terms else {}

    @classmethod
    def constant(cls, c) -> "Poly":
        c = _coerce_coeff(c)
        return cls({_ONE_MONO: c}) if c != 0 else cls()

    @classmethod
    def var(cls, v: CoordName) -> "Poly":
        return cls({((v, 1),): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ONE_MONO in self.terms)

    def constant_value(self):
        return self.terms.get(_ONE_MONO, 0)

    def variables(self) -> set:
        return {var for mono in self.terms for var, _ in mono}

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self.terms), default=0)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __add__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = _clean(s)
            else:
                out.pop(m, None)
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) - c
            if s:
                out[m] = _clean(s)
            else:
                out.pop(m, None)
        return Poly(out)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly()
        out: Dict[Monomial, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly({m: _clean(c) for m, c in out.items()})

    def scale(self, c) -> "Poly":
        if c == 0:
            return Poly()
        if c == 1:
            return self
        return Poly({m: _clean(v * c) for m, v in self.terms.items()})

    def pow(self, e: int) -> "Poly":
        result = Poly.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def diff(self, v: CoordName) -> "Poly":
        out: Dict[Monomial, object] = {}
        for mono, c in self.terms.items():
            for pos, (var, e) in enumerate(mono):
                if var is v:
                    if e == 1:
                        new = mono[:pos] + mono[pos + 1:]
                    else:
                        new = mono[:pos] + ((var, e - 1),) + mono[pos + 1:]
                    out[new] = _clean(out.get(new, 0) + c * e)
                    break
        return Poly({m: c for m, c in out.items() if c})

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: _mono_key(mc[0]), reverse=True)

    def leading(self):
        return self.sorted_terms()[0]

    def content_gcd_monomial(self) -> Monomial:
        monos = iter(self.terms)
        g = next(monos)
        for m in monos:
            g = _mono_gcd(g, m)
            if not g:
                break
        return g

    def divide_monomial(self, m: Monomial) -> "Poly":
        return Poly({_mono_div(mono, m): c for mono, c in self.terms.items()})

    def exact_div(self, other: "Poly"):
        """Return q with self == q * other, or None if other does not divide self."""
        if other.is_zero():
            raise ZeroDenominatorError("zero denominator")
        lead_m, lead_c = other.leading()
        quotient: Dict[Monomial, object] = {}
        rem = self
        while rem.terms:
            m, c = rem.leading()
            qm = _mono_div(m, lead_m)
            if qm is None:
                return None
            qc = _clean(Fraction(c) / lead_c)
            quotient[qm] = qc
            rem = rem - other * Poly({qm: qc})
        return Poly(quotient)

    def subs(self, values: Mapping[CoordName, "Expr"]) -> "Expr":
        """Substitute expressions for variables (compose)."""
        total = ZERO
        power_cache: Dict[Tuple[CoordName, int], Expr] = {}
        for mono, c in self.terms.items():
            term = Expr(Poly.constant(c))
            for var, e in mono:
                if var in values:
                    key = (var, e)
                    val = power_cache.get(key)
                    if val is None:
                        val = values[var] ** e
                        power_cache[key] = val
                    term = term * val
                else:
                    term = term * Expr(Poly({((var, e),): 1}))
            total = total + term
        return total

    def eval(self, point: Mapping[CoordName, object]):
        total = 0
        for mono, c in self.terms.items():
            term = c
            for var, e in mono:
                try:
                    val = point[var]
                except KeyError:
                    raise UnboundVariableError(f"unbound variable {var}") from None
                term = term * (val if e == 1 else val ** e)
            total = total + term
        return total

    def to_source(self, var_src: Callable[[CoordName], str]) -> str:
        if not self.terms:
            return "0.0"
        parts = []
        for mono, c in self.terms.items():
            factors = [repr(float(c))]
            for var, e in mono:
                src = var_src(var)
                factors.extend([src] * e)
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __str__(self):
        return _poly_str(self)


def _coeff_str(c) -> str:
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    return str(c)


def _poly_str(p: Poly) -> str:
    if not p.terms:
        return "0"
    out = []
    for i, (mono, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        mag = -c if neg else c
        factors = [str(v) if e == 1 else f"{v}^{e}" for v, e in mono]
        if not factors:
            body = _coeff_str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_coeff_str(mag)] + factors)
            if isinstance(mag, Fraction):
                body = f"({_coeff_str(mag)})*" + "*".join(factors)
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

_POLY_ONE = Poly.constant(1)

Number = Union[int, Fraction, float]


class Expr:
    """Immutable normalized rational function ``num / den``.

    Normal form: the numerator is zero with denominator 1, or the denominator
    has leading coefficient 1 under graded-lex order, common monomial factors
    are cancelled, and the quotient is reduced to a polynomial whenever the
    denominator divides the numerator exactly.  Equality is decided by cross
    multiplication, which is exact even where the normal form is not a full
    gcd reduction.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly | None = None, den: Poly | None = None, _normalized: bool = False):
        num = num if num is not None else Poly()
        if den is None or den is _POLY_ONE:
            self.num, self.den = num, _POLY_ONE
        elif _normalized:
            self.num, self.den = num, den
        else:
            self.num, self.den = _normalize_pair(num, den)

    # construction helpers -------------------------------------------------
    @classmethod
    def lift(cls, value) -> "Expr":
        if isinstance(value, Expr):
            return value
        if isinstance(value, CoordName):
            return cls(Poly.var(value))
        if isinstance(value, Poly):
            return cls(value)
        if isinstance(value, float):
            raise TypeError("floats cannot enter exact expressions")
        return cls(Poly.constant(value))

    # predicates ---------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den is _POLY_ONE

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return _clean(Fraction(self.num.constant_value()) / self.den.constant_value())

    def variables(self) -> set:
        return self.num.variables() | self.den.variables()

    def depends_on(self, v: CoordName) -> bool:
        return v in self.num.variables() or v in self.den.variables()

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other) -> "Expr":
        other = _as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den is _POLY_ONE and other.den is _POLY_ONE:
            return Expr(self.num + other.num)
        if self.den == other.den:
            return Expr(self.num + other.num, self.den)
        return Expr(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(-self.num, self.den, _normalized=True)

    def __sub__(self, other) -> "Expr":
        other = _as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den is _POLY_ONE and other.den is _POLY_ONE:
            return Expr(self.num - other.num)
        if self.den == other.den:
            return Expr(self.num - other.num, self.den)
        return Expr(self.num * other.den - other.num * self.den, self.den * other.den)

    def __rsub__(self, other) -> "Expr":
        other = _as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Expr":
        other = _as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den is _POLY_ONE and other.den is _POLY_ONE:
            return Expr(self.num * other.num)
        return Expr(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        other = _as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDenominatorError("zero denominator")
        return Expr(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "Expr":
        other = _as_expr(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, e: int) -> "Expr":
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if self.den is _POLY_ONE:
            return Expr(self.num.pow(e))
        return Expr(self.num.pow(e), self.den.pow(e), _normalized=True)

    def __eq__(self, other):
        other = _as_expr(other)
        if other is NotImplemented:
            return False
        if self.den is _POLY_ONE and other.den is _POLY_ONE:
            return self.num == other.num
        return (self.num * other.den - other.num * self.den).is_zero()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        if self.den is _POLY_ONE:
            return hash(self.num)
        return hash("rational-function")

    # calculus / evaluation -------------------------------------------------------
    def diff(self, v: CoordName) -> "Expr":
        if self.den is _POLY_ONE:
            return Expr(self.num.diff(v))
        dn = self.num.diff(v)
        dd = self.den.diff(v)
        if dd.is_zero():
            return Expr(dn, self.den)
        return Expr(dn * self.den - self.num * dd, self.den * self.den)

    def subs(self, values: Mapping[CoordName, "Expr"]) -> "Expr":
        if not values:
            return self
        num = self.num.subs(values)
        if self.den is _POLY_ONE:
            return num
        return num / self.den.subs(values)

    def evaluate(self, point: Mapping[CoordName, Number]):
        return evaluate(self, point)

    def compile(self, order: Sequence[CoordName]) -> Callable:
        """Return a float function of a state sequence indexed like ``order``."""
        return _compile_many([self], order, scalar=True)

    def __str__(self):
        if self.den is _POLY_ONE:
            return str(self.num)
        num_s, den_s = str(self.num), str(self.den)
        if len(self.num.terms) > 1:
            num_s = f"({num_s})"
        if len(self.den.terms) > 1 or "*" in den_s:
            den_s = f"({den_s})"
        return f"{num_s}/{den_s}"

    def __repr__(self):
        return f"Expr({self})"


def _as_expr(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Expr(Poly.constant(value))
    if isinstance(value, CoordName):
        return Expr(Poly.var(value))
    return NotImplemented


def _normalize_pair(num: Poly, den: Poly):
    if den.is_zero():
        raise ZeroDenominatorError("zero denominator")
    if num.is_zero():
        return Poly(), _POLY_ONE
    if den.is_constant():
        c = den.constant_value()
        return (num if c == 1 else num.scale(Fraction(1, 1) / c)), _POLY_ONE
    common = _mono_gcd(num.content_gcd_monomial(), den.content_gcd_monomial())
    if common:
        num = num.divide_monomial(common)
        den = den.divide_monomial(common)
    q = num.exact_div(den)
    if q is not None:
        return q, _POLY_ONE
    q = den.exact_div(num)
    if q is not None:
        num, den = Poly.constant(1), q
    lead_c = den.leading()[1]
    if lead_c != 1:
        inv = Fraction(1) / Fraction(lead_c)
        num, den = num.scale(inv), den.scale(inv)
    if den.is_constant():
        return num, _POLY_ONE
    return num, den


ZERO = Expr()
ONE = Expr(Poly.constant(1))


def const(c) -> Expr:
    return Expr(Poly.constant(c))


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def normalize(e) -> Expr:
    """Return the normal form of ``e`` (expressions are kept normalized, so this re-normalizes a copy)."""
    e = Expr.lift(e)
    if e.den is _POLY_ONE:
        return e
    return Expr(e.num, e.den)


def differentiate(e, c: CoordName) -> Expr:
    return Expr.lift(e).diff(c)


def evaluate(e, point: Mapping[CoordName, Number]):
    """Evaluate exactly when every binding is rational, otherwise in double precision."""
    e = Expr.lift(e)
    exact = all(not isinstance(point.get(v), float) for v in e.variables() if v in point)
    num = e.num.eval(point)
    if e.den is _POLY_ONE:
        return _clean(num) if exact else float(num)
    den = e.den.eval(point)
    if exact:
        if den == 0:
            raise SingularEvaluationError("singular evaluation")
        return _clean(Fraction(num) / Fraction(den))
    if abs(den) < 1e-12:
        raise SingularEvaluationError("singular evaluation")
    return float(num) / float(den)


def _compile_many(exprs: Sequence[Expr], order: Sequence[CoordName], scalar: bool = False) -> Callable:
    index = {v: i for i, v in enumerate(order)}

    def var_src(v: CoordName) -> str:
        try:
            return f"s[{index[v]}]"
        except KeyError:
            raise UnboundVariableError(f"unbound variable {v}") from None

    bodies = []
    for e in exprs:
        num_src = e.num.to_source(var_src)
        if e.den is _POLY_ONE:
            bodies.append(f"({num_src})")
        else:
            bodies.append(f"_div(({num_src}), ({e.den.to_source(var_src)}))")
    if scalar:
        src = f"lambda s: {bodies[0]}"
    else:
        src = "lambda s: (" + ", ".join(bodies) + ("," if len(bodies) == 1 else "") + ")"
    return eval(src, {"_div": _float_div})  # noqa: S307 - source generated from Poly terms only


def _float_div(a: float, b: float) -> float:
    if abs(b) < 1e-12:
        raise SingularEvaluationError("singular evaluation")
    return a / b


def compile_exprs(exprs: Sequence[Expr], order: Sequence[CoordName]) -> Callable:
    """Compile several expressions into one function ``s -> tuple`` of floats."""
    return _compile_many(list(exprs), order)


# ---------------------------------------------------------------------------
# Text grammar
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)
_NAME_PATTERNS = [
    (re.compile(r"x(\d+)$"), lambda m: x(int(m[1]))),
    (re.compile(r"y(\d+)$"), lambda m: y(int(m[1]))),
    (re.compile(r"pi_(\d+)_(\d+)$"), lambda m: pi(int(m[1]), int(m[2]))),
    (re.compile(r"piA_(\d+)_x(\d+)$"), lambda m: piAx(int(m[1]), int(m[2]))),
    (re.compile(r"piA_(\d+)_(\d+)$"), lambda m: piA(int(m[1]), int(m[2]))),
    (re.compile(r"p_(\d+)_A(\d+)$"), lambda m: pmom(int(m[1]), int(m[2]))),
    (re.compile(r"p$"), lambda m: pscalar()),
]


def coord_from_name(name: str) -> CoordName:
    for pattern, build in _NAME_PATTERNS:
        m = pattern.match(name)
        if m:
            try:
                return build(m)
            except ValueError:
                break
    return param(name)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", text, _skip_ws(text, pos))
            kind = m.lastgroup
            self.tokens.append((kind, m[kind], m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_end(self):
        kind, val, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected token {val!r}", self.text, pos)

    # expr := term (('+'|'-') term)*
    def expr(self) -> Expr:
        result = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                result = result + rhs if val == "+" else result - rhs
            else:
                return result

    # term := unary (('*'|'/') unary)*
    def term(self) -> Expr:
        result = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "*":
                    result = result * rhs
                else:
                    if rhs.is_zero():
                        raise ParseError("zero denominator", self.text, pos)
                    result = result / rhs
            else:
                return result

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            inner = self.unary()
            return -inner if val == "-" else inner
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            ekind, eval_, epos = self.take()
            if ekind != "num" or not eval_.isdigit():
                raise ParseError("exponent must be a nonnegative integer", self.text, epos)
            return base ** int(eval_)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            if "." in val:
                return const(Fraction(val))
            return const(Fraction(val))
        if kind == "name":
            return Expr(Poly.var(coord_from_name(val)))
        if kind == "op" and val == "(":
            inner = self.expr()
            ckind, cval, cpos = self.take()
            if ckind != "op" or cval != ")":
                raise ParseError("expected ')'", self.text, cpos)
            return inner
        if kind is None:
            raise ParseError("unexpected end of input", self.text, pos)
        raise ParseError(f"unexpected token {val!r}", self.text, pos)


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def parse(text: str) -> Expr:
    """Parse the config expression grammar into a normalized :class:`Expr`."""
    parser = _Parser(text)
    if not parser.tokens:
        raise ParseError("empty expression", text, 0)
    result = parser.expr()
    parser.expect_end()
    return result


def parse_many(texts: Iterable[str]) -> list:
    return [parse(t) for t in texts]

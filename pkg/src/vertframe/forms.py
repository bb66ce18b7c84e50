"""Coordinate exterior calculus: vector fields, scalar forms, vector-valued forms.

A :class:`Form` of degree ``p`` is a sparse map from strictly increasing
tuples of coordinates (the differentials ``dc1 ^ ... ^ dcp``) to
:class:`~vertframe.symexpr.Expr` coefficients.  A :class:`VVForm` attaches
such forms to strictly increasing value multi-indices ``(mu1 < ... < mum)``
standing for ``R_mu1 ^ ... ^ R_mum`` in the exterior algebra of R^(n+k).

Interior products contract the first slot: ``v ⨼ (a ^ b) = (v ⨼ a) ^ b +
(-1)^deg(a) a ^ (v ⨼ b)``.  Nested contractions are read right to left,
``interior(u, interior(v, w))`` is ``u ⨼ v ⨼ w``.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from .symexpr import ONE, ZERO, CoordName, Expr, evaluate

Index = Tuple[CoordName, ...]


def sort_with_sign(items: Sequence) -> Tuple[int, tuple]:
    """Sort a sequence of distinct comparables, returning (permutation sign, sorted tuple).

    Returns sign 0 when an item repeats.
    """
    seq = list(items)
    n = len(seq)
    if len(set(seq)) != n:
        return 0, ()
    sign = 1
    # insertion sort counting transpositions; indices here are short
    for i in range(1, n):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(seq)


class VectorField:
    """A vector field as a sparse map coordinate -> component expression."""

    __slots__ = ("components", "chart")

    def __init__(self, components: Mapping[CoordName, object] | None = None, chart=None):
        comps = {}
        for c, v in (components or {}).items():
            e = Expr.lift(v)
            if not e.is_zero():
                comps[c] = e
        self.components: Dict[CoordName, Expr] = comps
        self.chart = chart

    def __getitem__(self, c: CoordName) -> Expr:
        return self.components.get(c, ZERO)

    def __iter__(self) -> Iterator[CoordName]:
        return iter(self.components)

    def items(self):
        return self.components.items()

    def is_zero(self) -> bool:
        return not self.components

    def apply(self, f: Expr) -> Expr:
        """Directional derivative v(f)."""
        total = ZERO
        fvars = f.variables()
        for c, comp in self.components.items():
            if c in fvars:
                total = total + comp * f.diff(c)
        return total

    __call__ = apply

    def __add__(self, other: "VectorField") -> "VectorField":
        comps = dict(self.components)
        for c, v in other.components.items():
            comps[c] = comps.get(c, ZERO) + v
        return VectorField(comps, self.chart or other.chart)

    def __neg__(self) -> "VectorField":
        return VectorField({c: -v for c, v in self.components.items()}, self.chart)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def scale(self, s) -> "VectorField":
        s = Expr.lift(s)
        return VectorField({c: s * v for c, v in self.components.items()}, self.chart)

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return (self - other).is_zero()

    def restrict(self, coords: Iterable[CoordName]) -> "VectorField":
        keep = set(coords)
        return VectorField({c: v for c, v in self.components.items() if c in keep}, self.chart)

    def subs(self, values: Mapping[CoordName, Expr]) -> "VectorField":
        return VectorField({c: v.subs(values) for c, v in self.components.items()}, self.chart)

    def evaluate(self, point: Mapping[CoordName, object]) -> Dict[CoordName, object]:
        return {c: evaluate(v, point) for c, v in self.components.items()}

    def __str__(self):
        if not self.components:
            return "0"
        parts = [f"({v})*d/d{c}" for c, v in sorted(self.components.items(), key=lambda cv: cv[0].key)]
        return " + ".join(parts)

    __repr__ = __str__


def lie_bracket_fields(v: VectorField, w: VectorField) -> VectorField:
    """[v, w]^m = v(w^m) - w(v^m)."""
    coords = set(v.components) | set(w.components)
    comps = {}
    for c in coords:
        comps[c] = v.apply(w[c]) - w.apply(v[c])
    return VectorField(comps, v.chart or w.chart)


class Form:
    """Scalar differential form of fixed degree with Expr coefficients."""

    __slots__ = ("degree", "terms")

    def __init__(self, degree: int, terms: Mapping[Index, object] | None = None):
        self.degree = degree
        clean: Dict[Index, Expr] = {}
        for idx, coeff in (terms or {}).items():
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not match degree {degree}")
            e = Expr.lift(coeff)
            if not e.is_zero():
                clean[idx] = e
        self.terms = clean

    @classmethod
    def zero(cls, degree: int) -> "Form":
        return cls(degree)

    @classmethod
    def function(cls, f) -> "Form":
        return cls(0, {(): f})

    @classmethod
    def from_unsorted(cls, degree: int, items: Iterable[Tuple[Sequence[CoordName], object]]) -> "Form":
        acc: Dict[Index, Expr] = {}
        for idx, coeff in items:
            sign, key = sort_with_sign(idx)
            if sign == 0:
                continue
            e = Expr.lift(coeff)
            acc[key] = acc.get(key, ZERO) + (e if sign > 0 else -e)
        return cls(degree, acc)

    @classmethod
    def differential(cls, c: CoordName) -> "Form":
        return cls(1, {(c,): ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, idx: Sequence[CoordName]) -> Expr:
        sign, key = sort_with_sign(idx)
        if sign == 0:
            return ZERO
        c = self.terms.get(key, ZERO)
        return c if sign > 0 else -c

    def scalar(self) -> Expr:
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return self.terms.get((), ZERO)

    def _check(self, other: "Form"):
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, ZERO) + c
        return Form(self.degree if self.terms or not other.terms else other.degree, terms)

    def __neg__(self) -> "Form":
        return Form(self.degree, {idx: -c for idx, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, s) -> "Form":
        s = Expr.lift(s)
        if s.is_zero():
            return Form(self.degree)
        return Form(self.degree, {idx: s * c for idx, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (self - other).is_zero()

    def wedge(self, other: "Form") -> "Form":
        acc: Dict[Index, Expr] = {}
        for i1, c1 in self.terms.items():
            s1 = set(i1)
            for i2, c2 in other.terms.items():
                if s1.intersection(i2):
                    continue
                sign, key = sort_with_sign(i1 + i2)
                prod = c1 * c2
                acc[key] = acc.get(key, ZERO) + (prod if sign > 0 else -prod)
        return Form(self.degree + other.degree, acc)

    __xor__ = wedge

    def d(self) -> "Form":
        acc: Dict[Index, Expr] = {}
        for idx, c in self.terms.items():
            for v in sorted(c.variables(), key=lambda cv: cv.key):
                if v in idx:
                    continue
                dc = c.diff(v)
                if dc.is_zero():
                    continue
                sign, key = sort_with_sign((v,) + idx)
                acc[key] = acc.get(key, ZERO) + (dc if sign > 0 else -dc)
        return Form(self.degree + 1, acc)

    def interior(self, v: VectorField) -> "Form":
        if self.degree == 0:
            raise ValueError("interior product of a degree-0 form")
        acc: Dict[Index, Expr] = {}
        for idx, c in self.terms.items():
            for r, var in enumerate(idx):
                comp = v.components.get(var)
                if comp is None:
                    continue
                key = idx[:r] + idx[r + 1:]
                term = comp * c
                acc[key] = acc.get(key, ZERO) + (term if r % 2 == 0 else -term)
        return Form(self.degree - 1, acc)

    def subs(self, values: Mapping[CoordName, Expr]) -> "Form":
        return Form(self.degree, {idx: c.subs(values) for idx, c in self.terms.items()})

    def pullback(self, mapping: Mapping[CoordName, Expr], source_coords: Sequence[CoordName]) -> "Form":
        """Pull back through the map whose target coordinates are given as source expressions.

        Target coordinates absent from ``mapping`` are carried over unchanged.
        """
        one_forms: Dict[CoordName, Form] = {}

        def pulled(c: CoordName) -> Form:
            f = one_forms.get(c)
            if f is None:
                if c in mapping:
                    expr = mapping[c]
                    f = Form(1, {(s,): expr.diff(s) for s in source_coords if expr.depends_on(s)})
                else:
                    f = Form.differential(c)
                one_forms[c] = f
            return f

        result = Form(self.degree)
        for idx, c in self.terms.items():
            term = Form.function(c.subs(mapping))
            for var in idx:
                term = term.wedge(pulled(var))
                if term.is_zero():
                    break
            result = result + term
        return result

    def evaluate(self, point: Mapping[CoordName, object]) -> Dict[Index, object]:
        out = {}
        for idx, c in self.terms.items():
            val = evaluate(c, point)
            if val != 0:
                out[idx] = val
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for idx, c in sorted(self.terms.items(), key=lambda ic: [v.key for v in ic[0]]):
            basis = "^".join(f"d{v}" for v in idx)
            parts.append(f"({c})" + (f" {basis}" if basis else ""))
        return " + ".join(parts)

    __repr__ = __str__


def wedge_all(forms: Iterable[Form]) -> Form:
    result = Form.function(ONE)
    for f in forms:
        result = result.wedge(f)
    return result


ValueIndex = Tuple[int, ...]


class VVForm:
    """A form with values in the exterior algebra of R^(n+k).

    ``components`` maps strictly increasing value indices to scalar forms of a
    common degree.  Value slot ``mu`` runs over ``0..n+k-1``: first the base
    directions r_1..r_n, then the fiber directions s_1..s_k.
    """

    __slots__ = ("degree", "value_degree", "dim", "components")

    def __init__(self, degree: int, value_degree: int, dim: int, components: Mapping[ValueIndex, Form] | None = None):
        if value_degree > dim:
            raise ValueError(f"value degree {value_degree} exceeds {dim}")
        self.degree = degree
        self.value_degree = value_degree
        self.dim = dim
        comps = {}
        for vi, f in (components or {}).items():
            if len(vi) != value_degree:
                raise ValueError(f"value index {vi} does not match value degree {value_degree}")
            if f.degree != degree and not f.is_zero():
                raise ValueError("form degree mismatch")
            if not f.is_zero():
                comps[tuple(vi)] = f
        self.components: Dict[ValueIndex, Form] = comps

    @classmethod
    def scalar_one(cls, dim: int) -> "VVForm":
        return cls(0, 0, dim, {(): Form.function(ONE)})

    @classmethod
    def from_vector(cls, dim: int, entries: Sequence[Form]) -> "VVForm":
        degree = next((f.degree for f in entries if not f.is_zero()), 0)
        return cls(degree, 1, dim, {(mu,): f for mu, f in enumerate(entries)})

    def component(self, vi: Sequence[int]) -> Form:
        sign, key = sort_with_sign(vi)
        if sign == 0:
            return Form(self.degree)
        f = self.components.get(key)
        if f is None:
            return Form(self.degree)
        return f if sign > 0 else -f

    def vector_entries(self) -> list:
        if self.value_degree != 1:
            raise ValueError("not vector valued")
        return [self.component((mu,)) for mu in range(self.dim)]

    def is_zero(self) -> bool:
        return not self.components

    def __add__(self, other: "VVForm") -> "VVForm":
        comps = dict(self.components)
        for vi, f in other.components.items():
            comps[vi] = comps[vi] + f if vi in comps else f
        return VVForm(self.degree if self.components else other.degree, self.value_degree, self.dim, comps)

    def __neg__(self) -> "VVForm":
        return VVForm(self.degree, self.value_degree, self.dim, {vi: -f for vi, f in self.components.items()})

    def __sub__(self, other: "VVForm") -> "VVForm":
        return self + (-other)

    def scale(self, s) -> "VVForm":
        return VVForm(self.degree, self.value_degree, self.dim, {vi: f.scale(s) for vi, f in self.components.items()})

    def __eq__(self, other):
        if not isinstance(other, VVForm):
            return NotImplemented
        return (self - other).is_zero()

    def wedge(self, other: "VVForm") -> "VVForm":
        """(alpha^I ^ beta^J) (x) R_IJ with the value multi-index re-sorted."""
        vdeg = self.value_degree + other.value_degree
        if vdeg > self.dim:
            raise ValueError(f"value degree overflow: {vdeg} > {self.dim}")
        acc: Dict[ValueIndex, Form] = {}
        for vi1, f1 in self.components.items():
            for vi2, f2 in other.components.items():
                sign, key = sort_with_sign(vi1 + vi2)
                if sign == 0:
                    continue
                prod = f1.wedge(f2)
                if prod.is_zero():
                    continue
                if sign < 0:
                    prod = -prod
                acc[key] = acc[key] + prod if key in acc else prod
        return VVForm(self.degree + other.degree, vdeg, self.dim, acc)

    def d(self) -> "VVForm":
        return VVForm(self.degree + 1, self.value_degree, self.dim, {vi: f.d() for vi, f in self.components.items()})

    def interior(self, v: VectorField) -> "VVForm":
        return VVForm(self.degree - 1, self.value_degree, self.dim, {vi: f.interior(v) for vi, f in self.components.items()})

    def pair(self, covector: Callable[[ValueIndex], object] | Mapping[ValueIndex, object]) -> Form:
        """Contract with an element of the dual exterior power.

        ``covector`` gives antisymmetric components at sorted value indices;
        the result is ``sum over sorted I of c_I V_I``, which equals the full
        tensor contraction over all ordered index tuples.
        """
        get = covector if callable(covector) else (lambda vi: covector.get(vi, 0))
        result = Form(self.degree)
        for vi, f in self.components.items():
            c = get(vi)
            if c == 0:
                continue
            result = result + f.scale(c)
        return result

    def subs(self, values: Mapping[CoordName, Expr]) -> "VVForm":
        return VVForm(self.degree, self.value_degree, self.dim, {vi: f.subs(values) for vi, f in self.components.items()})

    def __str__(self):
        if not self.components:
            return "0"
        return " + ".join(f"[{f}] R{''.join(str(m + 1) for m in vi)}" for vi, f in sorted(self.components.items()))

    __repr__ = __str__

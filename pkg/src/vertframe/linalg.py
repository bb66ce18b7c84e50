"""Small exact linear algebra over any commutative ring of coefficients.

Works for ``Fraction`` matrices and for :class:`~vertframe.symexpr.Expr`
matrices alike (determinants by cofactor expansion, adjugates, inverses).
Matrices are lists of row lists.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

Matrix = List[List[object]]


def zeros(rows: int, cols: int, zero=0) -> Matrix:
    return [[zero for _ in range(cols)] for _ in range(rows)]


def identity(n: int, one=1, zero=0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    inner = len(b)
    cols = len(b[0]) if inner else 0
    out = []
    for row in a:
        new_row = []
        for j in range(cols):
            acc = row[0] * b[0][j]
            for t in range(1, inner):
                acc = acc + row[t] * b[t][j]
            new_row.append(acc)
        out.append(new_row)
    return out


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((row[j] * v[j] for j in range(1, len(v))), row[0] * v[0]) for row in a]


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)]


def minor(a: Sequence[Sequence], i: int, j: int) -> Matrix:
    return [list(row[:j]) + list(row[j + 1:]) for r, row in enumerate(a) if r != i]


def det(a: Sequence[Sequence]):
    """Determinant by cofactor expansion along the first row (intended for n <= 5)."""
    n = len(a)
    if n == 0:
        return 1
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = None
    for j in range(n):
        term = a[0][j] * det(minor(a, 0, j))
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def adjugate(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    if n == 1:
        return [[a[0][0] * 0 + 1]]
    adj = zeros(n, n)
    for i in range(n):
        for j in range(n):
            c = det(minor(a, i, j))
            adj[j][i] = -c if (i + j) % 2 else c
    return adj


def inverse(a: Sequence[Sequence]) -> Matrix:
    d = det(a)
    if d == 0:
        raise ZeroDivisionError("singular matrix")
    adj = adjugate(a)
    if isinstance(d, int):
        d = Fraction(d)
    return [[entry / d for entry in row] for row in adj]


def trace(a: Sequence[Sequence]):
    total = a[0][0]
    for i in range(1, len(a)):
        total = total + a[i][i]
    return total


def rank(a: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix by fraction-valued Gaussian elimination."""
    m = [[Fraction(v) for v in row] for row in a]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def is_symmetric(a: Sequence[Sequence]) -> bool:
    return all(a[i][j] == a[j][i] for i in range(len(a)) for j in range(i))


def to_fractions(a: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in a]


def block_lower(n_block: Sequence[Sequence], k_block: Sequence[Sequence], a_block: Sequence[Sequence], zero=0) -> Matrix:
    """Assemble [[N, 0], [A, K]] with N n x n, K k x k, A k x n."""
    n, k = len(n_block), len(k_block)
    top = [list(n_block[i]) + [zero] * k for i in range(n)]
    bottom = [list(a_block[a]) + list(k_block[a]) for a in range(k)]
    return top + bottom

"""Dense linear algebra over the rationals.

Matrices are lists of rows of :class:`fractions.Fraction`. Everything here is
exact, so rank decisions never depend on a tolerance.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Matrix = list[list[Fraction]]
Vector = list[Fraction]


class SingularSystem(ArithmeticError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # exact binary value; callers that want decimals pass strings
        return Fraction(x)
    return Fraction(x)


def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[as_fraction(v) for v in row] for row in rows]


def zeros(n_rows: int, n_cols: int) -> Matrix:
    return [[Fraction(0)] * n_cols for _ in range(n_rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def transpose(m: Sequence[Sequence[Fraction]]) -> Matrix:
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def vecmat(v: Sequence[Fraction], a: Sequence[Sequence[Fraction]]) -> Vector:
    return matvec(transpose(a), v)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def add(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(s, a: Sequence[Sequence[Fraction]]) -> Matrix:
    s = as_fraction(s)
    return [[s * x for x in row] for row in a]


def is_zero(a) -> bool:
    if a and isinstance(a[0], (list, tuple)):
        return all(x == 0 for row in a for x in row)
    return all(x == 0 for x in a)


def rref(m: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    r = to_matrix(m)
    n_rows = len(r)
    n_cols = len(r[0]) if n_rows else 0
    pivots: list[int] = []
    piv_r = 0
    for c in range(n_cols):
        if piv_r == n_rows:
            break
        for i in range(piv_r, n_rows):
            if r[i][c] != 0:
                break
        else:
            continue
        r[piv_r], r[i] = r[i], r[piv_r]
        p = r[piv_r][c]
        r[piv_r] = [x / p for x in r[piv_r]]
        for i in range(n_rows):
            if i != piv_r and r[i][c] != 0:
                f = r[i][c]
                r[i] = [x - f * y for x, y in zip(r[i], r[piv_r])]
        pivots.append(c)
        piv_r += 1
    return r, pivots


def rank(m: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence[Fraction]]) -> list[Vector]:
    """Basis of {v : m v = 0}, one vector per free column."""
    r, pivots = rref(m)
    n_cols = len(m[0])
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for row, pc in zip(r, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def left_nullspace(m: Sequence[Sequence[Fraction]]) -> list[Vector]:
    """Basis of {v : v m = 0}."""
    return nullspace(transpose(m))


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Vector:
    """Unique solution of a x = b; raises SingularSystem otherwise."""
    n_cols = len(a[0])
    aug = [list(row) + [as_fraction(bi)] for row, bi in zip(a, b)]
    r, pivots = rref(aug)
    if n_cols in pivots:
        raise SingularSystem("inconsistent system")
    if len(pivots) != n_cols:
        raise SingularSystem("underdetermined system")
    return [r[i][n_cols] for i in range(n_cols)]


def inverse(a: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(to_matrix(a), identity(n))]
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) > n:
        raise SingularSystem("matrix is singular")
    return [row[n:] for row in r[:n]]


def determinant(a: Sequence[Sequence[Fraction]]) -> Fraction:
    m = to_matrix(a)
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


def primitive(v: Sequence[Fraction]) -> list[int]:
    """Integer multiple of v with coprime entries and positive leading entry."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    return [-x for x in ints] if lead < 0 else ints


def same_row_space(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> bool:
    if not a or not b:
        return not a and not b
    ra, _ = rref(a)
    rb, _ = rref(b)
    ra = [row for row in ra if any(row)]
    rb = [row for row in rb if any(row)]
    return ra == rb

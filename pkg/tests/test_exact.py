from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sdrt import exact as ex

small_ints = st.integers(min_value=-6, max_value=6)


def matrices(rows, cols):
    return st.lists(st.lists(small_ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@settings(max_examples=60, deadline=None)
@given(matrices(4, 5))
def test_rref_matches_sympy(m):
    r, pivots = ex.rref(ex.to_matrix(m))
    ref, ref_pivots = sympy.Matrix(m).rref()
    assert list(pivots) == list(ref_pivots)
    assert [[sympy.Rational(x.numerator, x.denominator) for x in row] for row in r] == ref.tolist()


@settings(max_examples=60, deadline=None)
@given(matrices(5, 4))
def test_left_nullspace_annihilates_and_has_right_dimension(m):
    a = ex.to_matrix(m)
    basis = ex.left_nullspace(a)
    assert len(basis) == 5 - sympy.Matrix(m).rank()
    for v in basis:
        assert ex.is_zero(ex.vecmat(v, a))


@settings(max_examples=40, deadline=None)
@given(matrices(3, 3))
def test_determinant_and_inverse(m):
    a = ex.to_matrix(m)
    d = ex.determinant(a)
    assert d == Fraction(int(sympy.Matrix(m).det()))
    if d == 0:
        with pytest.raises(ex.SingularSystem):
            ex.inverse(a)
    else:
        assert ex.matmul(a, ex.inverse(a)) == ex.identity(3)


def test_solve_rejects_inconsistent_and_underdetermined():
    with pytest.raises(ex.SingularSystem):
        ex.solve([[1, 1], [2, 2]], [1, 3])
    with pytest.raises(ex.SingularSystem):
        ex.solve([[1, 1], [2, 2]], [1, 2])
    assert ex.solve([[2, 1], [1, 3]], [3, 4]) == [Fraction(1), Fraction(1)]


def test_primitive_normalizes_sign_and_gcd():
    assert ex.primitive([Fraction(-2, 3), Fraction(4, 3), 0]) == [1, -2, 0]
    assert ex.primitive([0, Fraction(5, 2), Fraction(5, 4)]) == [0, 2, 1]


def test_same_row_space():
    assert ex.same_row_space([[1, 1, 1], [1, 0, 0]], [[0, 1, 1], [2, 1, 1]])
    assert not ex.same_row_space([[1, 1, 1]], [[1, 0, 0]])

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from voalab.linalg import (EchelonBasis, SparseMatrix, dense_inverse, fmt_rational, kernel_basis, parse_rational,
                           rank, rref, solve)

small = st.integers(-4, 4)


@st.composite
def matrices(draw, max_rows=5, max_cols=5):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    return [[Fraction(draw(small), draw(st.integers(1, 3))) for _ in range(c)] for _ in range(r)]


def sym(rows):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows])


@given(matrices())
def test_rank_and_rref_agree_with_sympy(rows):
    m = SparseMatrix.from_dense(rows)
    red, pivots, rk = rref(m)
    ref, ref_piv = sym(rows).rref()
    assert rk == rank(m) == len(ref_piv)
    assert tuple(pivots) == ref_piv
    assert [[sympy.Rational(int(x.numerator), int(x.denominator)) for x in r] for r in red.to_dense()] \
        == ref.tolist()


@given(matrices())
def test_kernel_basis_is_a_basis(rows):
    m = SparseMatrix.from_dense(rows)
    ker = kernel_basis(m)
    assert len(ker) == m.cols - rank(m)
    for v in ker:
        assert all(x == 0 for x in m.matvec(v))
    if ker:
        assert rank(SparseMatrix.from_dense(ker)) == len(ker)


@given(matrices(), st.lists(small, min_size=5, max_size=5))
def test_solve_consistent_systems(rows, xs):
    m = SparseMatrix.from_dense(rows)
    x0 = [Fraction(x) for x in xs[:m.cols]] + [Fraction(0)] * max(0, m.cols - len(xs))
    rhs = m.matvec(x0)
    x = solve(m, rhs)
    assert x is not None and m.matvec(x) == rhs


def test_solve_detects_inconsistency():
    m = SparseMatrix.from_dense([[1, 1], [2, 2]])
    assert solve(m, [1, 3]) is None


@given(matrices(4, 4))
def test_inverse_round_trip(rows):
    if len(rows) != len(rows[0]):
        rows = [r[:len(rows)] + [Fraction(0)] * (len(rows) - len(r)) for r in rows]
    inv = dense_inverse(rows)
    m = SparseMatrix.from_dense(rows)
    if rank(m) < len(rows):
        assert inv is None
    else:
        assert (m @ SparseMatrix.from_dense(inv)) == SparseMatrix.identity(len(rows))


@given(st.lists(st.dictionaries(st.integers(0, 5), small.filter(bool), max_size=4), max_size=6),
       st.dictionaries(st.integers(0, 5), small.filter(bool), max_size=4))
def test_echelon_normal_form_is_canonical(vectors, probe):
    ech = EchelonBasis()
    for v in vectors:
        ech.add({k: Fraction(c) for k, c in v.items()})
    # reducing twice and reducing a shifted probe both land on the same representative
    r = ech.reduce(probe)
    assert ech.reduce(r) == r
    for v in vectors:
        assert ech.contains(v)
        shifted = dict(probe)
        for k, c in v.items():
            shifted[k] = shifted.get(k, 0) + 3 * c
        assert ech.reduce({k: c for k, c in shifted.items() if c}) == r


@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("-2", Fraction(-2)), (" 10/5 ", Fraction(2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["0.5", "1e3", "", "1/0", "x", 0.5])
def test_parse_rational_rejects_inexact(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


@given(st.fractions())
def test_fmt_parse_round_trip(x):
    assert parse_rational(fmt_rational(x)) == x


def test_sparse_matrix_shape_errors():
    with pytest.raises(IndexError):
        SparseMatrix(2, 2, [(2, 0, 1)])
    with pytest.raises(ValueError):
        SparseMatrix.identity(2) @ SparseMatrix.identity(3)

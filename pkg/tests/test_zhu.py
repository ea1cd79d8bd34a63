from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import model
from oracles import distinct_partition_counts, ising_half_character, ising_vacuum_character
from voalab.findim import radical
from voalab.linalg import ONE
from voalab.models import module_from_descriptor
from voalab.models.subspaces import b2_complement, cm_subspace
from voalab.zhu import (PreconditionFailed, TruncationUnstable, b_plus_otilde_check, o_action_check, star_vec,
                        window_reduction, zhu_algebra)

x = sympy.symbols("x")


@pytest.fixture(scope="module")
def ising_a0():
    return zhu_algebra(model("ising", 8), 0)


def omega_charpoly(q):
    m = q.algebra().left_matrix(q.omega_class()).to_dense()
    mat = sympy.Matrix([[sympy.Rational(int(c.numerator), int(c.denominator)) for c in row] for row in m])
    return sympy.factor(mat.charpoly(x).as_expr())


def test_ising_a0_is_three_points(ising_a0):
    q = ising_a0
    assert q.dim == 3 and q.stabilized and q.complete
    assert len(radical(q.algebra())) == 0
    assert q.is_commutative()
    # [omega] acts on A_0 with the lowest weights of the three irreducibles as eigenvalues
    want = x * (x - sympy.Rational(1, 16)) * (x - sympy.Rational(1, 2))
    assert sympy.expand(omega_charpoly(q) - want) == 0


def test_ising_a0_table_and_o_action(ising_a0):
    assert ising_a0.check_table().passed
    V = model("ising", 8)
    for h in ("0", "1/16", "1/2"):
        rep = o_action_check(ising_a0, module_from_descriptor(V, f"h={h}"))
        assert rep.passed and rep.counts()


def test_yang_lee_a0():
    q = zhu_algebra(model("minimal:2,5", 8), 0)
    assert q.dim == 2 and q.stabilized
    want = x * (x + sympy.Rational(1, 5))
    assert sympy.expand(omega_charpoly(q) - want) == 0


def test_circ_family_gives_same_quotient(ising_a0):
    assert zhu_algebra(model("ising", 8), 0, family="circ").dim == ising_a0.dim


@pytest.mark.slow
def test_ising_a1_matches_level_dimensions():
    # for a rational VOA, A_1 = sum over irreducibles of End(M_0) + End(M_1)
    chars = [ising_vacuum_character(1), ising_half_character(1), distinct_partition_counts(1)]
    want = sum(c[0] ** 2 + c[1] ** 2 for c in chars)
    q = zhu_algebra(model("ising", 12), 1)
    assert q.dim == want == 5 and q.stabilized and q.complete
    assert q.check_table().passed
    wr = window_reduction(q, [0, Fraction(1, 16), Fraction(1, 2)], 1)
    # eigenvalues 17/16 and 3/2 survive in [1, 2); the vacuum module has no level 1
    assert wr.s == 1 and wr.algebra.dim == 2


def test_heisenberg_truncation_is_flagged():
    with pytest.warns(TruncationUnstable):
        q = zhu_algebra(model("heisenberg", 6), 0)
    assert not q.stabilized
    with pytest.raises(TruncationUnstable):
        zhu_algebra(model("heisenberg", 6), 0, strict=True)


def test_negative_n_rejected():
    with pytest.raises(ValueError):
        zhu_algebra(model("ising", 4), -1)


@given(st.integers(0, 2), st.integers(0, 2))
def test_unit_and_commutativity_of_star(i, j):
    q = zhu_algebra(model("ising", 8), 0)
    a, b = {i: ONE}, {j: ONE}
    assert q.mul(q.unit(), a) == a == q.mul(a, q.unit())
    assert q.mul(a, b) == q.mul(b, a)
    # star_vec on representatives agrees with the table after reduction
    V = q.voa
    assert q.coords(star_vec(V, q.lift(a), 0, q.lift(b))) == q.mul(a, b)


def test_json_is_deterministic(ising_a0):
    again = zhu_algebra(model("ising", 8), 0)
    assert ising_a0.dumps() == again.dumps()


def test_b_plus_otilde():
    V = model("ising", 8)
    B = [{b: ONE} for b in b2_complement(V)]
    assert b_plus_otilde_check(V, 0, B).passed
    with pytest.raises(PreconditionFailed) as exc:
        b_plus_otilde_check(V, 0, [])
    assert exc.value.level == 0
    rep = b_plus_otilde_check(V, 0, [], require_precondition=False)
    assert not rep.passed and rep.counts()["precondition"]
    M = module_from_descriptor(V, "h=1/16", 6)
    BM = [{k: ONE} for k in cm_subspace(M, 2).complement_basis()]
    assert b_plus_otilde_check(M, 0, BM).passed

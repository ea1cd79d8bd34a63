import json
import random

import pytest
from hypothesis import given, strategies as st

from findim_gen import conjugate, exact_by_rank_nullity, perturbed, random_complex, to_sparse
from oracles import FINDIM_TABLES, REGULAR_FACTOR_MULTIPLICITIES
from voalab import findim as fd
from voalab.linalg import ONE, SparseMatrix

ALGEBRAS = {
    "x2": lambda: fd.truncated_polynomial(2),
    "x3": lambda: fd.truncated_polynomial(3),
    "qxq": lambda: fd.product_algebra(fd.truncated_polynomial(1), fd.truncated_polynomial(1)),
    "ut2": lambda: fd.upper_triangular(2),
}


@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_derived_tables(name):
    A = ALGEBRAS[name]()
    want = FINDIM_TABLES[name]
    got = fd.algebra_summary(A)
    for key in ("dimension", "radical_dimension", "radical_nilpotency", "semisimple", "commutative",
                "projective_dimensions"):
        assert got[key] == want[key], key
    series = fd.composition_series(fd.regular_module(A))
    classes = fd.factor_classes(series.factors)
    assert len(classes) == want["simple_count"]
    assert sorted(m for _, m in classes) == REGULAR_FACTOR_MULTIPLICITIES[name]


@pytest.mark.parametrize("name", sorted(ALGEBRAS))
def test_idempotents_projectives_and_covers(name):
    A = ALGEBRAS[name]()
    idems = fd.primitive_idempotents(A)
    total = {}
    for e in idems:
        assert A.mul(e, e) == e
        for k, c in e.items():
            total[k] = total.get(k, 0) + c
    assert {k: c for k, c in total.items() if c} == A.unit
    for e in idems:
        for f in idems:
            if e is not f:
                assert A.mul(e, f) == {}
    for P in fd.projective_indecomposables(A):
        assert fd.is_projective(P).projective
        S, _ = fd.top(P)
        cover = fd.projective_cover(S)
        assert cover.superfluous and cover.P.dim == P.dim
        assert fd.rank(cover.f) == S.dim
        assert fd.is_module_map(cover.P, S, cover.f)


def test_simple_non_projective():
    A = fd.truncated_polynomial(2)
    S, _ = fd.top(fd.regular_module(A))
    w = fd.is_projective(S)
    assert not w.projective and w.cover.P.dim == 2


def test_ut2_structure():
    A = fd.upper_triangular(2)
    P = sorted(fd.projective_indecomposables(A), key=lambda m: m.dim)
    # the 2-dimensional PIM has its radical isomorphic to the 1-dimensional PIM
    rad, _ = P[1].submodule(P[1].radical_subspace())
    assert fd.is_isomorphic(rad, P[0]) is not None
    assert fd.direct_summand_test(P[0], fd.regular_module(A)) is not None
    # the simple top of the big PIM is not a summand of A
    top, _ = fd.top(P[1])
    assert fd.direct_summand_test(top, fd.regular_module(A)) is None


@pytest.mark.parametrize("name", sorted(ALGEBRAS) + ["m2"])
def test_hom_from_projective_counts_e_m(name):
    A = ALGEBRAS[name]() if name in ALGEBRAS else fd.matrix_units(2)
    M = fd.regular_module(A)
    for e in fd.primitive_idempotents(A):
        P, _ = fd.left_ideal_module(A, e)
        eM = fd._span([M.act(e, {j: ONE}) for j in range(M.dim)], M.dim)[0]
        assert len(fd.hom_space(P, M)) == len(eM)


def test_matrix_algebra_is_semisimple_with_one_simple():
    A = fd.matrix_units(2)
    assert fd.is_semisimple(A)
    series = fd.composition_series(fd.regular_module(A))
    assert [S.dim for S in series.factors] == [2, 2]
    assert fd.factor_classes(series.factors) == [(0, 2)]


POOL = ["x2", "x3", "qxq", "ut2", "ut3", "m2"]
MULTS = dict(REGULAR_FACTOR_MULTIPLICITIES, ut3=[1, 2, 3], m2=[2])


def _pool_algebra(name):
    if name == "ut3":
        return fd.upper_triangular(3)
    if name == "m2":
        return fd.matrix_units(2)
    return ALGEBRAS[name]()


def test_jordan_holder_on_random_flags():
    refs = {}
    for trial in range(100):
        rng = random.Random(trial)
        name = POOL[trial % len(POOL)]
        A = _pool_algebra(name)
        reg = fd.regular_module(A)
        if name not in refs:
            refs[name] = fd.composition_series(reg).factors
        M = conjugate(reg, rng)
        series = fd.composition_series(M, seed=trial)
        dims = [len(f) for f in series.flag]
        assert dims == sorted(set(dims)) and dims[0] == 0 and dims[-1] == M.dim
        for f in series.flag:
            assert len(M.spin(f)[0]) == len(f)
        for S in series.factors:
            assert fd.proper_submodule(S, random.Random(1)) is None
        assert fd.same_factors(series.factors, refs[name]), (trial, name)
        assert sorted(m for _, m in fd.factor_classes(series.factors)) == MULTS[name]


def test_check_exact_agrees_with_rank_nullity():
    exact_seen = inexact_seen = 0
    rng = random.Random(2024)
    while exact_seen < 100 or inexact_seen < 100:
        want_exact = exact_seen < 100 and (inexact_seen >= 100 or rng.random() < 0.5)
        dims, maps = random_complex(rng, exact=want_exact)
        if not want_exact and rng.random() < 0.5:
            alt = perturbed(dims, maps, rng)
            if alt is not None:
                dims, maps = alt
        oracle = exact_by_rank_nullity(dims, maps)
        if oracle != want_exact:
            continue
        rep = fd.check_exact(dims, [to_sparse(m) for m in maps])
        assert rep.passed == oracle, (dims, maps)
        if oracle:
            exact_seen += 1
        else:
            inexact_seen += 1


def test_check_exact_shape_mismatch():
    with pytest.raises(fd.ShapeMismatch):
        fd.check_exact([1, 2], [SparseMatrix.identity(1)])


def test_ses_radical_is_exact():
    for name in ALGEBRAS:
        dims, maps = fd.ses_radical(ALGEBRAS[name]())
        assert fd.check_exact(dims, maps).passed


def test_multi_cover_and_lifts():
    A = fd.truncated_polynomial(2)
    P = fd.regular_module(A)
    S, proj = fd.top(P)
    # the identity of S lifts through P -> S along itself
    part, free = fd.lifts_through(P, P, proj, proj)
    assert (proj @ part) == proj
    n, hs = fd.multi_cover(P, proj, P, proj, {0: ONE})
    assert n == 1 and all((proj @ h) == proj for h in hs)


def test_diagram_round_trip_and_failure():
    doc = {
        "nodes": {"A": 1, "B": 2, "C": 1},
        "arrows": {"f": {"source": "A", "target": "B", "matrix": [["1"], ["0"]]},
                   "g": {"source": "B", "target": "C", "matrix": [["0", "1"]]},
                   "h": {"source": "A", "target": "C", "matrix": [["0"]]}},
        "squares": [[["f", "g"], ["h"]]],
        "exact": [["f", "g"]],
    }
    d = fd.load_diagram(doc)
    assert fd.check_commutative_diagram(d).passed
    assert fd.dump_diagram(fd.load_diagram(json.loads(json.dumps(fd.dump_diagram(d))))) == fd.dump_diagram(d)
    doc["arrows"]["h"]["matrix"] = [["1"]]
    rep = fd.check_commutative_diagram(fd.load_diagram(doc))
    assert [e.check for e in rep.failures] == ["commutes"]


def test_algebra_json_round_trip():
    A = fd.upper_triangular(2)
    B = fd.algebra_from_json_text(json.dumps(A.to_json()))
    assert B.table == A.table and B.unit == A.unit
    assert B.check().passed


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=3))
def test_polynomial_quotients(coeffs):
    # Q[x]/(f) is semisimple exactly when f is squarefree
    import sympy
    x = sympy.Symbol("x")
    f = x ** len(coeffs) + sum(c * x ** i for i, c in enumerate(coeffs))
    A = fd.polynomial_algebra(coeffs)
    assert A.check().passed
    squarefree = sympy.degree(sympy.gcd(f, sympy.diff(f, x)), x) == 0
    assert fd.is_semisimple(A) == squarefree

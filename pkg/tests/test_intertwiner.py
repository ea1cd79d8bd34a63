import itertools

import pytest

from voalab import catalog
from voalab.intertwiner import (FunctionFamily, LogIntertwiner, NotNilpotent, RelationViolated, check_axioms,
                                dominates, dump_intertwiner, fusion_bound, is_surjective, isomorphic, join, lemma3,
                                load_intertwiner, log_component, modes_equal, nilpotency_order, reconstruct,
                                verify_witness)
from voalab.linalg import Rational, vec_add
from voalab.models.constructions import ModuleMap


@pytest.fixture(scope="module")
def jordan():
    return catalog.jordan_example()


@pytest.fixture(scope="module")
def family():
    return catalog.intertwiner_family()


class Perturbed(LogIntertwiner):
    def __init__(self, y, key, delta):
        super().__init__(y.W, y.U, y.T, y.K, "perturbed")
        self.y, self.key, self.delta = y, key, delta

    def _mode(self, w, r, i, u):
        out = dict(self.y.mode(w, r, i, u))
        if (w, r, i, u) == self.key:
            vec_add(out, self.delta)
        return out


def test_jordan_example_passes_exhaustively(jordan):
    assert jordan.K == 1
    rep = check_axioms(jordan, samples=None)
    assert rep.passed
    assert rep.counts()["borcherds"] > 40000


def test_single_mode_perturbation_is_detected(jordan):
    w, u = ((1,), 0), ((), 1)
    bad = Perturbed(jordan, (w, Rational(-3), 0, u), {((1, 1), 1): Rational(1)})
    rep = check_axioms(bad, samples=None)
    assert not rep.passed
    with pytest.raises(RelationViolated):
        log_component(bad, 1)


@pytest.mark.parametrize("name", sorted(catalog.INTERTWINERS))
def test_shipped_examples_round_trip(name):
    y = catalog.INTERTWINERS[name]()
    assert check_axioms(y, samples=80).passed
    rec = reconstruct(log_component(y, 0))
    assert rec.K == y.K
    assert modes_equal(rec, y) is None and modes_equal(y, rec) is None


def test_nilpotency_order_matches_log_degree(jordan):
    assert nilpotency_order(log_component(jordan, 0)) == 2
    assert nilpotency_order(log_component(catalog.semisimple_example(), 0)) == 1


def test_non_nilpotent_family_is_rejected():
    y = catalog.vertex_operator_example()
    # 2^r Y(w)_(r): each -D multiplies by a nonzero factor, so no power vanishes
    f = FunctionFamily(y.W, y.U, y.T, lambda w, r, u: {k: c * Rational(2) ** int(r)
                                                          for k, c in y.mode(w, r, 0, u).items()}, "2^r Y")
    with pytest.raises(NotNilpotent):
        reconstruct(f, bound=3)


def test_lemma3_on_semisimple_triple():
    y = catalog.semisimple_example()
    rep = lemma3(y)
    assert rep.passed and rep.meta["K"] == 0
    assert rep.counts()["derived-Y1"] > 0


def test_lemma3_does_not_apply_to_jordan(jordan):
    rep = lemma3(jordan)
    assert rep.notes and "does not apply" in rep.notes[0]


def test_directed_set_laws(family):
    assert len(family) >= 6
    names = sorted(family)
    dom = {(a, b): dominates(family[a], family[b]) for a in names for b in names}
    for a in names:
        assert dom[(a, a)] is not None and dom[(a, a)].valid
    for a, b, c in itertools.product(names, repeat=3):
        if dom[(a, b)] is not None and dom[(b, c)] is not None:
            assert dom[(a, c)] is not None, (a, b, c)
    j, h1, h2 = join(family["y"], family["pi.y"])
    assert h1.valid and h2.valid
    assert dominates(j, family["y"]) is not None and dominates(j, family["pi.y"]) is not None
    assert isomorphic(family["y"], family["2y"]) and isomorphic(family["y"], family["(1+N)y"])
    assert dom[("y", "pi.y")] is not None and dom[("pi.y", "y")] is None
    assert dom[("y", "zero")] is not None


def test_witness_map_is_checked(family):
    hom = dominates(family["y"], family["pi.y"])
    assert verify_witness(family["y"], family["pi.y"], hom.f).passed
    # id o y = y, not 2y
    ident = ModuleMap.identity(family["y"].T)
    assert not verify_witness(family["y"], family["2y"], ident).passed
    assert verify_witness(family["y"], family["y"], ident).passed


def test_surjectivity(family):
    assert is_surjective(family["y"]) and is_surjective(family["pi.y"])
    assert not is_surjective(family["zero"])


def test_json_round_trip(jordan):
    text = dump_intertwiner(jordan)
    back = load_intertwiner(text, jordan.W, jordan.U, jordan.T)
    assert back.K == 1
    assert modes_equal(back, jordan) is None and modes_equal(jordan, back) is None
    assert dump_intertwiner(back) == text


def test_fusion_bound_is_reported_not_certified(jordan):
    fb = fusion_bound(jordan, 0)
    assert fb["certified"] is False
    assert fb["bound"] == (fb["K"] + 1) * fb["codim_otilde"] * fb["dim_U_N"]

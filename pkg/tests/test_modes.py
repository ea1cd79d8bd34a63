import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import model
from oracles import heisenberg_bracket, virasoro_bracket
from voalab.dual import double_dual_dims_match, pairing_residual, restricted_dual
from voalab.linalg import ONE
from voalab.models import module_from_descriptor
from voalab.models.heisenberg import FockModule
from voalab.modes import (BoundExceeded, Field, OutOfWindow, binom, borcherds_instances, borcherds_residual,
                          check_module_axioms, derived_bracket, field_difference_on, locality_order, normal_product,
                          sgn)

A = ((1,), 0)
RANGE = range(-4, 5)


@given(st.integers(-12, 12), st.integers(0, 8))
def test_binom_matches_generalized_binomial(n, k):
    assert binom(n, k) == sympy.binomial(n, k)
    assert sgn(k) == (-1) ** k


def test_heisenberg_brackets_derived_from_structure_constants():
    H = model("heisenberg", 6)
    for m in RANGE:
        for n in RANGE:
            got = {k: Fraction(v) for k, v in derived_bracket(H, A, A, m, n).items()}
            assert got == heisenberg_bracket(m, n), (m, n)


@pytest.mark.parametrize("selector,c", [("ising", Fraction(1, 2)), ("virasoro:7/3", Fraction(7, 3))])
def test_virasoro_brackets_derived_from_structure_constants(selector, c):
    V = model(selector, 8)
    (w,) = V.omega
    assert V.omega[w] == 1
    for m in RANGE:
        for n in RANGE:
            # L_m is the field mode w_(m+1)
            got = {k: Fraction(v) for k, v in derived_bracket(V, w, w, m + 1, n + 1).items()}
            assert got == virasoro_bracket(m, n, c), (m, n)


@pytest.mark.parametrize("selector,cutoff", [("heisenberg", 4), ("ising", 6), ("virasoro:-22/5", 5)])
def test_axiom_report_passes_on_vacuum_modules(selector, cutoff):
    rep = check_module_axioms(model(selector, cutoff), budget=4, samples=50)
    assert rep.passed, rep.lines()[:5]
    assert set(rep.counts()) == {"vacuum", "derivative", "commutativity", "associativity", "borcherds", "virasoro"}


@pytest.mark.parametrize("desc", ["F(1)", "J(1)", "F(-1/2)", "dual(J(1))"])
def test_axiom_report_passes_on_heisenberg_modules(desc):
    M = module_from_descriptor(model("heisenberg", 4), desc, 3)
    assert check_module_axioms(M, budget=4, samples=40).passed


@pytest.mark.parametrize("desc", ["h=1/16", "h=1/2", "dual(h=1/16)"])
def test_axiom_report_passes_on_ising_modules(desc):
    M = module_from_descriptor(model("ising", 6), desc, 4)
    assert check_module_axioms(M, budget=4, samples=40).passed


class BrokenFock(FockModule):
    """a_1 acts with twice the correct coefficient."""

    def gen_act(self, gen, n, key):
        out = super().gen_act(gen, n, key)
        return {k: 2 * c for k, c in out.items()} if n == 1 else out


def test_corrupted_module_is_reported_with_replayable_descriptor():
    H = model("heisenberg", 4)
    bad = BrokenFock(H, 0, 3)
    rep = check_module_axioms(bad, budget=3, samples=20)
    assert not rep.passed
    counts = {e.check for e in rep.failures}
    assert "commutativity" in counts and "borcherds" in counts
    first = rep.failures[0]
    assert first.descriptor.startswith(first.check + ";")


@given(st.randoms(use_true_random=False))
def test_random_borcherds_instances_vanish(rnd):
    H = model("heisenberg", 4)
    M = module_from_descriptor(H, "J(1)", 3)
    instances = [p for p, _ in borcherds_instances(H, M, 0, 3)]
    for params in rnd.sample(instances, 5):
        assert borcherds_residual(M, *params) == {}


def test_borcherds_out_of_window_raises():
    H = model("heisenberg", 3)
    with pytest.raises(OutOfWindow):
        borcherds_residual(H, A, A, H.vacuum, -6, 0, 0)


def test_normal_product_of_heisenberg_field_is_twice_omega():
    H = model("heisenberg", 5)
    a = Field.of(H, {A: ONE})
    aa = normal_product(a, -1, a)
    two_omega = Field.of(H, {k: 2 * c for k, c in H.omega.items()})
    assert aa.weight == 2
    assert field_difference_on(H, aa, two_omega, range(-3, 4), 4) is None
    # a *_1 a = 1, the vacuum field
    assert field_difference_on(H, normal_product(a, 1, a), Field.of(H, {H.vacuum: ONE}), range(-3, 3), 4) is None


def test_locality_orders():
    H = model("heisenberg", 5)
    a = Field.of(H, {A: ONE})
    assert locality_order(a, a) == 2
    V = model("ising", 8)
    L = Field.of(V, V.omega)
    assert locality_order(L, L, cutoff=6) == 4
    with pytest.raises(BoundExceeded):
        locality_order(L, L, bound=2, cutoff=6)


def test_restricted_dual_pairing_and_dims():
    H = model("heisenberg", 4)
    M = module_from_descriptor(H, "J(1)", 3)
    D = restricted_dual(M)
    assert double_dual_dims_match(M)
    rng = random.Random(3)
    keys = M.basis_upto(Fraction(5, 2))
    for _ in range(40):
        x = rng.choice(keys)
        n = rng.randint(-2, 2)
        # a_(n) f pairs with x when wt f = wt x + n
        target = M.weight_of(x) + n
        fs = D.basis(target) if M.min_weight() <= target <= D.cutoff else []
        for _, f in fs:
            assert pairing_residual(M, {A: ONE}, n, f, x) == 0
            assert pairing_residual(M, M.voa.omega, n + 1, f, x) == 0

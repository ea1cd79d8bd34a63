import pytest

from voalab import catalog
from voalab.extension import (ExtensionInput, ExtensionModule, InvalidDonor, NonCommutingMode, associativity_oracle,
                              build_extension, build_j, build_q_field, dump_instance, load_instance, locality_bound,
                              mutation_sweep, toy_isomorphism, validate_donor, verify_associativity,
                              verify_commutativity, verify_extension, verify_locality_q, verify_submodule,
                              verify_translation)
from voalab.intertwiner import check_axioms
from voalab.linalg import ONE, Rational
from voalab.models.constructions import ModuleMap
from voalab.modes import OutOfWindow, check_module_axioms

A1 = ((1,), 0)


def test_toy_donor_is_valid(toy):
    inp, _, _, _ = toy
    assert validate_donor(inp).passed


def test_toy_extension_levels(toy):
    _, P, _, R = toy
    # R = q(-1)V + V has the graded dimension of J(0)
    assert [R.dim(w) for w in range(5)] == [P.dim(w) for w in range(5)] == [2, 2, 4, 6, 10]


@pytest.mark.parametrize("verifier", [verify_commutativity, verify_translation, verify_associativity,
                                      associativity_oracle, verify_submodule])
def test_toy_verifiers_exhaustive(toy, verifier):
    R = toy[3]
    rep = verifier(R, samples=None)
    assert rep.passed and sum(rep.counts().values()) > 0


def test_toy_is_a_module_and_isomorphic_to_jordan_fock(toy):
    _, P, _, R = toy
    assert check_module_axioms(R, budget=3, samples=60).passed
    phi = ModuleMap(R, P, toy_isomorphism(R, P), "phi")
    assert phi.check().passed
    for w in range(4):
        assert phi.block(w).rows == phi.block(w).cols


def test_q_field_locality_and_j(toy):
    inp, P, tops, R = toy
    V = inp.voa
    qf = build_q_field(R)
    assert qf.certificate.passed
    for a in ({V.vacuum: ONE}, {A1: ONE}, V.omega, {((1, 1, 1), 0): ONE}):
        k, rep = verify_locality_q(qf, a)
        assert rep.passed and k <= locality_bound(R, a)
    J = build_j(qf, P, tops)
    assert J.K == 0 and check_axioms(J, samples=100).passed


@pytest.mark.parametrize("name", ["split-heisenberg", "split-ising"])
def test_split_instances(name):
    inp, P, tops = catalog.EXTENSIONS[name]()
    R = build_extension(inp)
    V = inp.voa
    loc = [V.gen_vector(g) for g in sorted(V.generators)] + [V.omega]
    verdict = verify_extension(R, loc, P, tops, samples=80)
    assert verdict.passed, verdict.failing()


def _mutated_input(inp):
    mut = inp.i_op.mutated((A1, Rational(0), A1), A1)
    return ExtensionInput(inp.voa, inp.t_module, inp.donor, inp.source, mut, inp.q_weight, inp.q_table)


def test_non_commuting_zero_mode_is_reported(toy):
    bad = _mutated_input(toy[0])
    with pytest.raises(NonCommutingMode) as exc:
        build_q_field(ExtensionModule(bad))
    assert not exc.value.report.passed
    with pytest.raises(InvalidDonor):
        build_extension(bad)


def test_tabulated_donor_raises_out_of_window(toy):
    I = toy[0].i_op
    top = I.cutoffs[0] + 1
    w = next(k for k in I.W.basis_upto(top) if I.W.weight_of(k) == top)
    with pytest.raises(OutOfWindow):
        I(w, Rational(0), I.U.basis(0)[0])


def test_instance_json_round_trip(toy):
    inp, _, _, R = toy
    text = dump_instance(inp, {"voa": "heisenberg", "T": "V", "M": "V", "source": "V"})
    back = load_instance(text, lambda d: inp.voa)
    R2 = build_extension(back, validate=False)
    assert verify_commutativity(R2, samples=None).passed
    assert dump_instance(back, {"voa": "heisenberg", "T": "V", "M": "V", "source": "V"}) == text


def test_small_mutation_sweep_detects_everything(toy):
    inp, P, tops, _ = toy
    V = inp.voa
    res = mutation_sweep(inp, count=8, seed=5, locality_with=[{A1: ONE}, V.omega])
    assert len(res) == 8
    assert all(failing for _, failing in res), [d for d, f in res if not f]


def test_mutation_sweep_is_seeded(toy):
    inp = toy[0]
    a = [d for d, _ in mutation_sweep(inp, count=2, seed=11)]
    b = [d for d, _ in mutation_sweep(inp, count=2, seed=11)]
    assert a == b

import json
from fractions import Fraction

import pytest

from conftest import model
from voalab.linalg import ONE
from voalab.models import UnknownModel, build_model, emit_voa, load_voa, module_from_descriptor, parse_voa
from voalab.models.constructions import DirectSumModule, ModuleMap, SubModule, jordan_nilpotent
from voalab.models.subspaces import c2_quotient_dims, c2_spanning_check, cm_quotient_dim, generated_submodule
from voalab.models.table import AxiomViolation, ParseError
from voalab.models.virasoro import kac_weights, minimal_central_charge


def test_minimal_model_data():
    assert minimal_central_charge(3, 4) == Fraction(1, 2)
    assert minimal_central_charge(2, 5) == Fraction(-22, 5)
    assert kac_weights(3, 4) == [0, Fraction(1, 16), Fraction(1, 2)]
    assert kac_weights(2, 5) == [Fraction(-1, 5), 0]


@pytest.mark.parametrize("sel", ["Heisenberg", "ising", "virasoro:1", "minimal:2,5"])
def test_build_model_selectors(sel):
    assert build_model(sel, 3).cutoff == 3


@pytest.mark.parametrize("sel", ["lattice", "minimal:x", "virasoro:0.5"])
def test_build_model_rejects_unknown(sel):
    with pytest.raises(ValueError):
        build_model(sel, 3)


def test_module_descriptor_errors():
    with pytest.raises(UnknownModel):
        module_from_descriptor(model("ising", 4), "F(1)")
    with pytest.raises(UnknownModel):
        module_from_descriptor(model("heisenberg", 4), "h=1/2")
    with pytest.raises(UnknownModel):
        module_from_descriptor(model("heisenberg", 4), "W")


@pytest.mark.parametrize("sel,cutoff", [("heisenberg", 4), ("ising", 5), ("minimal:2,5", 5)])
def test_description_round_trip(sel, cutoff):
    V = model(sel, cutoff)
    text = emit_voa(V)
    T = load_voa(text)
    assert emit_voa(T) == text
    assert [len(T.basis(w)) for w in range(cutoff + 1)] == [len(V.basis(w)) for w in range(cutoff + 1)]
    assert T.central_charge == V.central_charge


def _doc():
    return json.loads(emit_voa(model("heisenberg", 3)))


def test_corrupted_structure_constant_is_rejected():
    doc = _doc()
    entry = next(e for e in doc["structure_constants"] if e["mode"] == 1 and e["left"] == "a(-1)"
                 and e["right"] == "a(-1)")
    entry["result"][0]["coeff"] = "2"
    text = json.dumps(doc)
    parse_voa(text)  # syntactically fine
    with pytest.raises(AxiomViolation) as exc:
        load_voa(text)
    assert ";" in exc.value.descriptor


@pytest.mark.parametrize("mutate,where", [
    (lambda d: d.pop("omega"), "$.omega"),
    (lambda d: d.update(extra=1), "$.extra"),
    (lambda d: d.update(central_charge="0.5"), "$.central_charge"),
    (lambda d: d["generators"].append({"name": "1", "weight": "0"}), "$.generators[7].name"),
    (lambda d: d["structure_constants"][0].update(mode="1"), "$.structure_constants[0].mode"),
])
def test_parse_errors_carry_a_location(mutate, where):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ParseError) as exc:
        parse_voa(json.dumps(doc))
    assert exc.value.location == where


def test_parse_error_on_bad_json():
    with pytest.raises(ParseError):
        parse_voa("{")


def test_not_cft_type():
    doc = _doc()
    doc["generators"].append({"name": "z", "weight": "0"})
    with pytest.raises(AxiomViolation):
        parse_voa(json.dumps(doc))


def test_c2_quotients():
    # Yang-Lee (2,5): R_V = C[x]/(x^2); Heisenberg: polynomials in a(-1) up to the cutoff
    yl = c2_quotient_dims(model("minimal:2,5", 8), [6, 7, 8])
    assert yl.stabilized and yl.value == 2
    h = c2_quotient_dims(model("heisenberg", 8), [6, 7, 8])
    assert [h.dims[L] for L in (6, 7, 8)] == [7, 8, 9] and not h.stabilized


def test_c3_quotient_heisenberg():
    # words a(-2)^j a(-1)^i survive, except a(-2)^2 = 2 w_(-3)1 - 2 a(-3)a(-1) lies in C_3
    dims = [cm_quotient_dim(model("heisenberg", 4), 3, L) for L in range(5)]
    assert dims == [1, 2, 4, 6, 8]


def test_c2_spanning_check():
    V = model("ising", 6)
    assert c2_spanning_check(V, {V.vacuum: ONE}).passed
    M = module_from_descriptor(V, "h=1/16", 4)
    top = M.basis(M.min_weight())[0]
    assert c2_spanning_check(M, {top: ONE}).passed


def test_generated_submodule_of_jordan_module():
    H = model("heisenberg", 4)
    J = module_from_descriptor(H, "J(1)", 3)
    e0 = J.basis(J.min_weight())[0]
    sub = generated_submodule(J, {e0: ONE})
    # e0 generates a copy of F(1): half of each level
    assert all(sub.dim(w) * 2 == J.dim(w) for w in J.weights())


def test_submodule_and_direct_sum_constructions():
    H = model("heisenberg", 4)
    J = module_from_descriptor(H, "J(1)", 3)
    e0 = J.basis(J.min_weight())[0]
    S = SubModule(J, [{e0: ONE}])
    assert S.inclusion().check().passed
    N = jordan_nilpotent(J)
    assert N.check().passed
    assert all(S.contains(N.apply({k: ONE})) for k in J.basis_upto(3))
    F = module_from_descriptor(H, "F(1)", 3)
    D = DirectSumModule(F, J)
    assert D.dim(Fraction(1, 2)) == 3
    assert D.inclusion(1).check().passed and D.projection(0).check().passed
    # a_0 carries the Jordan block, so dropping the e1 components is not a module map
    bad = ModuleMap(J, J, lambda k: {k: ONE} if k[1] == 0 else {}, "p0")
    assert not bad.check().passed
    shift = ModuleMap(F, F, lambda k: {k: Fraction(len(k[0]) + 1)}, "grade")
    assert not shift.check().passed

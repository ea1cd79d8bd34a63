from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import model
from oracles import distinct_partition_counts, ising_half_character, ising_vacuum_character, partition_counts
from voalab.graded import (GradedMap, GradedSpace, NotGeneralizedEigen, dims_by_integer_level, graded_dimension,
                           l0_split, module_l0_structure)
from voalab.linalg import SparseMatrix
from voalab.models import module_from_descriptor


def levels(module, cutoff=None):
    return dims_by_integer_level(module.graded_space(cutoff), module.min_weight())


def test_heisenberg_vacuum_dims_are_partition_numbers():
    assert levels(model("heisenberg", 5)) == partition_counts(5) == [1, 1, 2, 3, 5, 7]


def test_generic_virasoro_vacuum_dims():
    assert levels(model("virasoro:7/3", 6)) == partition_counts(6, min_part=2) == [1, 0, 1, 1, 2, 2, 4]


def test_ising_vacuum_dims_after_singular_quotient():
    dims = levels(model("ising", 8))
    assert dims == ising_vacuum_character(8)
    assert dims[6] == 3


@pytest.mark.parametrize("desc,oracle", [("h=1/16", distinct_partition_counts), ("h=1/2", ising_half_character)])
def test_ising_module_dims(desc, oracle):
    M = module_from_descriptor(model("ising", 8), desc)
    assert levels(M)[:9] == oracle(8)


def test_fock_and_jordan_dims():
    H = model("heisenberg", 6)
    assert levels(module_from_descriptor(H, "F(1/2)")) == partition_counts(6)
    assert levels(module_from_descriptor(H, "J(1)")) == [2 * p for p in partition_counts(6)]


def test_l0_nilpotent_part_of_jordan_module():
    H = model("heisenberg", 6)
    assert module_l0_structure(module_from_descriptor(H, "J(1)"), 3).nilpotency_order() == 2
    assert module_l0_structure(module_from_descriptor(H, "F(1)"), 3).nilpotency_order() == 1
    assert module_l0_structure(model("ising", 8)).nilpotency_order() == 1


@given(st.integers(1, 4), st.integers(-3, 3).filter(bool), st.fractions(max_denominator=5))
def test_l0_split_recovers_weight_and_nilpotent(d, x, w):
    w = abs(w)
    s = GradedSpace({w: d}, w + 1)
    nil = SparseMatrix(d, d, [(i, i + 1, x) for i in range(d - 1)])
    op = {w: SparseMatrix.identity(d).scale(w) + nil}
    weights, st_ = l0_split(op, s)
    assert weights == {w: w}
    assert st_.nilpotent[w] == nil
    assert st_.nilpotency_order() == d


def test_l0_split_rejects_wrong_eigenvalue():
    s = GradedSpace({Fraction(1): 2}, 2)
    op = {Fraction(1): SparseMatrix.from_dense([[1, 0], [0, 2]])}
    with pytest.raises(NotGeneralizedEigen) as exc:
        l0_split(op, s)
    assert exc.value.weight == 1


def test_graded_space_and_maps():
    s = GradedSpace({0: 1, 1: 2, 5: 3}, 2)
    assert graded_dimension(s) == [(0, 1), (1, 2)]
    assert s.total_dim() == 3
    assert dims_by_integer_level(s) == [1, 2, 0]
    t = GradedSpace({1: 1, 2: 2}, 3)
    f = GradedMap(s, t, 1, {0: SparseMatrix.from_dense([[2]]), 1: SparseMatrix.from_dense([[1, 1], [0, 1]])})
    g = GradedMap(t, t, 0, {1: SparseMatrix.from_dense([[3]])})
    h = g.compose(f)
    assert h.degree == 1 and h.block(0) == SparseMatrix.from_dense([[6]])
    assert h.block(1).is_zero()  # g has no weight-2 block
    with pytest.raises(ValueError):
        GradedMap(s, t, 1, {0: SparseMatrix.identity(2)})

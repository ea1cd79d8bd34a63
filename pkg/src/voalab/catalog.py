"""Shipped intertwiners and extension instances used by the CLI and the tests."""

from __future__ import annotations

from typing import Callable, Dict, Tuple

from .extension import ExtensionInput, heisenberg_toy, split_instance
from .intertwiner import (Composed, LogIntertwiner, VertexOperator, ZeroIntertwiner, fock_intertwiner, join)
from .linalg import Rational
from .models.constructions import ModuleMap, jordan_nilpotent, jordan_projection
from .models.heisenberg import FockModule, build_heisenberg, jordan_fock_module
from .models.virasoro import build_ising, virasoro_module
from .modes import Module


def jordan_example(levels: int = 3) -> LogIntertwiner:
    """Y(|1>, z) of type (F(1), J(1) -> J(2)): the K = 1 example with a Jordan block on the top."""
    H = build_heisenberg(4)
    F1 = FockModule(H, 1, Rational(1, 2) + levels)
    J1 = jordan_fock_module(H, 1, Rational(1, 2) + levels)
    J2 = jordan_fock_module(H, 2, 2 + levels)
    return fock_intertwiner(F1, J1, J2, "Y_J")


def intertwiner_family(levels: int = 3) -> Dict[str, LogIntertwiner]:
    """Intertwiners of type (F(1), J(1) -> .) closed under the constructions of the directed set."""
    y = jordan_example(levels)
    H = y.voa
    J2 = y.T
    F2 = FockModule(H, 2, 2 + levels)
    pi = jordan_projection(J2, F2)
    N = jordan_nilpotent(J2)
    one_plus_n = ModuleMap(J2, J2, lambda k: {k: 1, **N.image(k)}, "1+N")
    fam = {
        "y": y,
        "pi.y": Composed(y, pi, K=0, name="pi.y"),
        "2y": Composed(y, ModuleMap.scalar(J2, 2), name="2y"),
        "(1+N)y": Composed(y, one_plus_n, name="(1+N)y"),
        "zero": ZeroIntertwiner(y.W, y.U, F2, "zero"),
    }
    fam["join"] = join(y, fam["pi.y"])[0]
    return fam


def semisimple_example(levels: int = 3) -> LogIntertwiner:
    """Y(|1>, z) of type (F(1), F(1) -> F(2)); L(0) acts semisimply on all three modules."""
    H = build_heisenberg(4)
    F1 = FockModule(H, 1, Rational(1, 2) + levels)
    return fock_intertwiner(F1, FockModule(H, 1, Rational(1, 2) + levels), FockModule(H, 2, 2 + levels), "Y_F")


def vertex_operator_example(levels: int = 3) -> LogIntertwiner:
    H = build_heisenberg(4)
    return VertexOperator(jordan_fock_module(H, 1, Rational(1, 2) + levels))


INTERTWINERS: Dict[str, Callable[[], LogIntertwiner]] = {
    "jordan": jordan_example,
    "fock": semisimple_example,
    "vertex": vertex_operator_example,
}


def _split_heisenberg(cutoff=4):
    H = build_heisenberg(cutoff)
    return split_instance(H, FockModule(H, 1, Rational(1, 2) + cutoff), FockModule(H, 2, 2 + cutoff), "F(1)+F(2)")


def _split_ising(cutoff=6):
    V = build_ising(cutoff)
    T = virasoro_module(V, Rational(1, 2), Rational(1, 2) + cutoff)
    M = virasoro_module(V, Rational(1, 16), Rational(1, 16) + cutoff)
    return split_instance(V, T, M, "L(1/2)+L(1/16)")


EXTENSIONS: Dict[str, Callable[..., Tuple[ExtensionInput, Module, dict]]] = {
    "toy": heisenberg_toy,
    "split-heisenberg": _split_heisenberg,
    "split-ising": _split_ising,
}

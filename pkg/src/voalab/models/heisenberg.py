"""Rank-one Heisenberg VOA and its Fock modules, including Jordan-type ones.

Basis keys are ``(partition, i)``: the monomial alpha_{-k1}...alpha_{-kr} applied
to the i-th top vector.  On the top space alpha_0 acts by a matrix ``mu + N``
with N nilpotent; a nonzero N makes L(0) = alpha_0^2/2 + ... non-semisimple
whenever mu != 0.
"""

from __future__ import annotations

from fractions import Fraction  # noqa: F401
from typing import List, Optional, Sequence

from ..linalg import ONE, Rational, Vec
from ..modes import VOA, Module
from .partitions import insert_part, partitions, remove_part


class FockModule(Module):
    def __init__(self, voa: "HeisenbergVOA", momentum, cutoff, zero_mode: Optional[Sequence[Sequence]] = None,
                 name: str = "", top_labels: Optional[List[str]] = None):
        mu = Rational(momentum)
        if zero_mode is None:
            zero_mode = [[mu]]
        self.momentum = mu
        self.zero_mode = [[Rational(x) for x in row] for row in zero_mode]
        self.top_dim = len(self.zero_mode)
        for i in range(self.top_dim):
            for j in range(self.top_dim):
                if i > j and self.zero_mode[i][j]:
                    raise ValueError("zero mode must be upper triangular with constant diagonal")
            if self.zero_mode[i][i] != mu:
                raise ValueError("zero mode diagonal must equal the momentum")
        self.top_labels = top_labels or [f"e{i}" for i in range(self.top_dim)]
        super().__init__(voa if voa is not None else self, cutoff, name or f"F({mu})")

    def min_weight(self) -> Fraction:
        return self.momentum ** 2 / 2

    def basis(self, weight):
        level = Rational(weight) - self.min_weight()
        if level < 0 or level.denominator != 1:
            return []
        return [(p, i) for p in partitions(int(level)) for i in range(self.top_dim)]

    def weight_of(self, key) -> Fraction:
        return self.min_weight() + sum(key[0])

    def label(self, key) -> str:
        part, i = key
        mono = "".join(f"a({-k})" for k in part)
        return f"{mono}|{self.top_labels[i]}>"

    def gen_act(self, gen, n, key) -> Vec:
        if gen != "a":
            raise KeyError(gen)
        part, i = key
        if n < 0:
            return {(insert_part(part, -n), i): ONE}
        if n > 0:
            mult = part.count(n)
            return {(remove_part(part, n), i): Rational(n * mult)} if mult else {}
        out: Vec = {}
        for j in range(self.top_dim):
            c = self.zero_mode[j][i]
            if c:
                out[(part, j)] = c
        return out

    def decompose_module(self, key):
        """``(gen, p, rest)`` with key = gen_(p) rest, or None on the top space."""
        part, i = key
        if not part:
            return None
        return "a", -part[0], {(part[1:], i): ONE}


class HeisenbergVOA(FockModule, VOA):
    def __init__(self, cutoff):
        self.vacuum = ((), 0)
        self.generators = {"a": Rational(1)}
        self.central_charge = Rational(1)
        self.omega = {((1, 1), 0): Rational(1, 2)}
        super().__init__(None, 0, cutoff, name="Heisenberg")

    def label(self, key) -> str:
        part, _ = key
        if not part:
            return "1"
        return "".join(f"a({-k})" for k in part)

    def decompose(self, key):
        part, _ = key
        return "a", -part[0], {(part[1:], 0): ONE}

    def gen_vector(self, gen) -> Vec:
        return {((1,), 0): ONE}


def build_heisenberg(cutoff) -> HeisenbergVOA:
    if Rational(cutoff) < 0:
        raise ValueError("cutoff must be non-negative")
    return HeisenbergVOA(cutoff)


def fock_module(voa: HeisenbergVOA, momentum, cutoff=None) -> FockModule:
    return FockModule(voa, momentum, voa.cutoff if cutoff is None else cutoff)


def jordan_fock_module(voa: HeisenbergVOA, momentum, cutoff=None) -> FockModule:
    """Fock module with two-dimensional top space where alpha_0 e1 = mu e1 + e0."""
    mu = Rational(momentum)
    return FockModule(voa, mu, voa.cutoff if cutoff is None else cutoff,
                      zero_mode=[[mu, 1], [0, mu]], name=f"J({mu})")

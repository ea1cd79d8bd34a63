"""Virasoro Verma modules, the vacuum VOA and simple quotients.

Keys are partitions ``(k1 >= k2 >= ...)`` standing for L_{-k1} L_{-k2} ... |h>.
In the vacuum module parts are >= 2 since L_{-1}|0> = 0.  A simple quotient
keeps only partitions off the pivot columns of the contravariant-form kernel,
level by level, and rewrites every vector into that normal form.
"""

from __future__ import annotations

from fractions import Fraction  # noqa: F401
from math import gcd
from typing import Dict, List, Optional, Tuple

from ..linalg import ONE, ZERO, EchelonBasis, Rational, SparseMatrix, Vec, kernel_basis, vec_add
from ..modes import VOA, Module
from .partitions import partitions


def minimal_central_charge(p: int, q: int) -> Fraction:
    return 1 - Rational(6 * (p - q) ** 2, p * q)


def kac_weights(p: int, q: int) -> List[Fraction]:
    """Conformal weights h_{r,s} of the simple modules of the (p, q) minimal model."""
    out = set()
    for r in range(1, q):
        for s in range(1, p):
            out.add(Rational((p * r - q * s) ** 2 - (p - q) ** 2, 4 * p * q))
    return sorted(out)


class VirasoroModule(Module):
    def __init__(self, voa: Optional["VirasoroVOA"], c, h, cutoff, vacuum: bool = False,
                 simple: bool = False, name: str = ""):
        self.c = Rational(c)
        self.h = Rational(h)
        self.is_vacuum = vacuum
        self.simple = simple
        self.min_part = 2 if vacuum else 1
        self._L: Dict[Tuple[int, tuple], Vec] = {}
        self._radical: Dict[int, Tuple[EchelonBasis, List[tuple]]] = {}
        super().__init__(voa if voa is not None else self, cutoff,
                         name or f"{'L' if simple else 'M'}({self.c},{self.h})")

    # -- grading ------------------------------------------------------------------
    def min_weight(self) -> Fraction:
        return self.h

    def weight_of(self, key) -> Fraction:
        return self.h + sum(key)

    def verma_basis(self, level: int) -> Tuple[tuple, ...]:
        return partitions(level, self.min_part)

    def basis(self, weight):
        level = Rational(weight) - self.h
        if level < 0 or level.denominator != 1:
            return []
        level = int(level)
        full = self.verma_basis(level)
        if not self.simple:
            return list(full)
        ech, _ = self.radical(level)
        piv = set(ech.pivots())
        return [k for i, k in enumerate(full) if i not in piv]

    def label(self, key) -> str:
        mono = "".join(f"L({-k})" for k in key)
        return f"{mono}|{self.h}>"

    # -- Verma module action ----------------------------------------------------------
    def verma_L(self, n: int, part: tuple) -> Vec:
        ck = (n, part)
        hit = self._L.get(ck)
        if hit is not None:
            return hit
        res = self._compute_L(n, part)
        self._L[ck] = res
        return res

    def _compute_L(self, n: int, part: tuple) -> Vec:
        if not part:
            if n > 0:
                return {}
            if n == 0:
                return {(): self.h} if self.h else {}
            if self.is_vacuum and n == -1:
                return {}
            return {(-n,): ONE}
        k = part[0]
        if n < 0 and -n >= k:
            return {(-n,) + part: ONE}
        rest = part[1:]
        out: Vec = {}
        # L_n L_{-k} = L_{-k} L_n + (n + k) L_{n-k} + c/12 (n^3 - n) delta_{n,k}
        for key, c in self.verma_L(n, rest).items():
            vec_add(out, self.verma_L(-k, key), c)
        if n + k:
            vec_add(out, self.verma_L(n - k, rest), Rational(n + k))
        if n == k:
            vec_add(out, {rest: ONE}, self.c * Rational(n ** 3 - n, 12))
        return out

    def verma_L_vec(self, n: int, vec: Vec) -> Vec:
        out: Vec = {}
        for key, c in vec.items():
            vec_add(out, self.verma_L(n, key), c)
        return out

    def gram_matrix(self, level: int) -> SparseMatrix:
        """Contravariant form on level ``level`` of the Verma (or vacuum Verma) module."""
        basis = self.verma_basis(level)
        entries = []
        for i, mu in enumerate(basis):
            for j, nu in enumerate(basis):
                vec = {nu: ONE}
                for k in mu:
                    vec = self.verma_L_vec(k, vec)
                    if not vec:
                        break
                val = vec.get((), ZERO)
                if val:
                    entries.append((i, j, val))
        return SparseMatrix(len(basis), len(basis), entries)

    def radical(self, level: int) -> Tuple[EchelonBasis, List[tuple]]:
        hit = self._radical.get(level)
        if hit is not None:
            return hit
        basis = self.verma_basis(level)
        ech = EchelonBasis()
        for vec in kernel_basis(self.gram_matrix(level)):
            ech.add({i: x for i, x in enumerate(vec) if x})
        self._radical[level] = (ech, list(basis))
        return self._radical[level]

    def reduce(self, vec: Vec) -> Vec:
        """Normal form in the simple quotient (identity on Verma modules)."""
        if not self.simple or not vec:
            return vec
        by_level: Dict[int, Dict[int, Fraction]] = {}
        for key, c in vec.items():
            level = sum(key)
            _, basis = self.radical(level)
            by_level.setdefault(level, {})[basis.index(key)] = c
        out: Vec = {}
        for level, row in by_level.items():
            ech, basis = self.radical(level)
            for i, c in ech.reduce(row).items():
                out[basis[i]] = c
        return out

    def gen_act(self, gen, n, key) -> Vec:
        if gen != "w":
            raise KeyError(gen)
        return self.reduce(self.verma_L(n - 1, key))

    def decompose_module(self, key):
        """``(gen, p, rest)`` with key = gen_(p) rest, or None for the highest-weight vector."""
        if not key:
            return None
        return "w", 1 - key[0], self.reduce({key[1:]: ONE})


class VirasoroVOA(VirasoroModule, VOA):
    def __init__(self, c, cutoff, simple: bool = False, name: str = ""):
        self.vacuum = ()
        self.generators = {"w": Rational(2)}
        self.central_charge = Rational(c)
        self.omega = {(2,): ONE}
        super().__init__(None, c, 0, cutoff, vacuum=True, simple=simple,
                         name=name or f"Vir({Rational(c)})")
        self.simple_weights: List[Fraction] = []

    def label(self, key) -> str:
        if not key:
            return "1"
        return "".join(f"L({-k})" for k in key)

    def decompose(self, key):
        return "w", 1 - key[0], self.reduce({key[1:]: ONE})

    def gen_vector(self, gen) -> Vec:
        return {(2,): ONE}


def build_virasoro(c, cutoff) -> VirasoroVOA:
    if Rational(cutoff) < 0:
        raise ValueError("cutoff must be non-negative")
    return VirasoroVOA(c, cutoff)


def build_minimal_model(p: int, q: int, cutoff) -> VirasoroVOA:
    if p < 2 or q < 2 or gcd(p, q) != 1:
        raise ValueError("p and q must be coprime integers >= 2")
    if Rational(cutoff) < 0:
        raise ValueError("cutoff must be non-negative")
    voa = VirasoroVOA(minimal_central_charge(p, q), cutoff, simple=True, name=f"M({p},{q})")
    voa.simple_weights = kac_weights(p, q)
    return voa


def build_ising(cutoff) -> VirasoroVOA:
    voa = build_minimal_model(3, 4, cutoff)
    voa.name = "Ising"
    return voa


def virasoro_module(voa: VirasoroVOA, h, cutoff=None, simple: Optional[bool] = None) -> VirasoroModule:
    """Highest-weight module of weight h; simple quotient when the VOA is a minimal model."""
    simple = voa.simple if simple is None else simple
    return VirasoroModule(voa, voa.central_charge, h, voa.cutoff if cutoff is None else cutoff,
                          simple=simple, name=f"{'L' if simple else 'M'}({voa.central_charge},{Rational(h)})")

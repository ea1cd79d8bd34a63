"""Weight-graded spaces, graded maps and the L(0) semisimple/nilpotent split."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from .linalg import Rational, SparseMatrix, fmt_rational


class NotGeneralizedEigen(ValueError):
    """A level block of L(0) has an eigenvalue other than the level weight."""

    def __init__(self, weight, message: str = ""):
        super().__init__(message or f"L(0) on level {fmt_rational(weight)} is not weight + nilpotent")
        self.weight = weight


@dataclass
class GradedSpace:
    levels: Dict[Fraction, int]
    cutoff: Fraction
    labels: Dict[Fraction, List[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.levels = {Rational(w): d for w, d in self.levels.items() if Rational(w) <= self.cutoff and d}
        self.cutoff = Rational(self.cutoff)

    def dim(self, weight) -> int:
        return self.levels.get(Rational(weight), 0)

    def total_dim(self) -> int:
        return sum(self.levels.values())

    @classmethod
    def zero(cls, cutoff=0) -> "GradedSpace":
        return cls({}, Rational(cutoff))


def graded_dimension(s: GradedSpace) -> List[Tuple[Fraction, int]]:
    """``(weight, dim)`` pairs sorted by weight, for the levels up to the cutoff."""
    return sorted(s.levels.items())


def dims_by_integer_level(s: GradedSpace, start=0) -> List[int]:
    """Dimensions at ``start, start+1, ...`` up to the cutoff, zeros included."""
    start = Rational(start)
    out = []
    w = start
    while w <= s.cutoff:
        out.append(s.dim(w))
        w += 1
    return out


@dataclass
class GradedMap:
    source: GradedSpace
    target: GradedSpace
    degree: Fraction
    blocks: Dict[Fraction, SparseMatrix]

    def __post_init__(self):
        for w, m in self.blocks.items():
            if m.cols != self.source.dim(w) or m.rows != self.target.dim(w + self.degree):
                raise ValueError(f"block at weight {fmt_rational(w)} has shape {m.rows}x{m.cols}, "
                                 f"expected {self.target.dim(w + self.degree)}x{self.source.dim(w)}")

    def block(self, weight) -> SparseMatrix:
        w = Rational(weight)
        if w in self.blocks:
            return self.blocks[w]
        return SparseMatrix.zero(self.target.dim(w + self.degree), self.source.dim(w))

    def compose(self, other: "GradedMap") -> "GradedMap":
        """``self . other``."""
        blocks = {}
        for w in other.source.levels:
            blocks[w] = self.block(w + other.degree) @ other.block(w)
        return GradedMap(other.source, self.target, self.degree + other.degree, blocks)

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.blocks.values())


@dataclass
class L0Structure:
    nilpotent: Dict[Fraction, SparseMatrix]

    def nilpotency_order(self) -> int:
        """Smallest k with N^k = 0 on every level (1 when L(0) is semisimple)."""
        k = 1
        for m in self.nilpotent.values():
            p, j = m, 1
            while not p.is_zero():
                p = p @ m
                j += 1
            k = max(k, j)
        return k


def l0_split(op: Mapping, s: GradedSpace) -> Tuple[Dict[Fraction, Fraction], L0Structure]:
    """Split a level-preserving L(0) into ``weight * id + N`` with N nilpotent."""
    weights: Dict[Fraction, Fraction] = {}
    nil: Dict[Fraction, SparseMatrix] = {}
    for w, d in graded_dimension(s):
        m = op[w]
        if m.rows != d or m.cols != d:
            raise ValueError(f"L(0) block at {fmt_rational(w)} is not {d}x{d}")
        n = m - SparseMatrix.identity(d).scale(w)
        p = SparseMatrix.identity(d)
        for _ in range(d):
            p = p @ n
        if not p.is_zero():
            raise NotGeneralizedEigen(w)
        weights[w] = w
        nil[w] = n
    return weights, L0Structure(nil)


def module_l0_structure(module, cutoff=None) -> L0Structure:
    s = module.graded_space(cutoff)
    _, st = l0_split({w: module.l0_matrix(w) for w in s.levels}, s)
    return st

"""Graded subspaces of a module: C_m(W), generated submodules and spanning checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

from ..linalg import ONE, EchelonBasis, Rational, Vec
from ..modes import Module, VOA, homogeneous_parts
from ..report import Report


class Subspace:
    """A graded subspace of ``module`` up to ``cutoff``, stored as per-level echelon bases."""

    def __init__(self, module: Module, cutoff=None):
        self.module = module
        self.cutoff = module.cutoff if cutoff is None else Rational(cutoff)
        self._levels: Dict[Fraction, EchelonBasis] = {}
        self._index: Dict[Fraction, Dict] = {}
        self._keys: Dict[Fraction, List] = {}

    def _level(self, w):
        if w not in self._levels:
            keys = self.module.basis(w)
            self._keys[w] = keys
            self._index[w] = {k: i for i, k in enumerate(keys)}
            self._levels[w] = EchelonBasis()
        return self._levels[w], self._index[w]

    def weights(self) -> List[Fraction]:
        return self.module.weights(self.cutoff)

    def add(self, vec: Vec) -> bool:
        """Add a vector; inhomogeneous input is split by weight.  Parts above the cutoff are dropped."""
        grew = False
        for w, part in homogeneous_parts(self.module, vec).items():
            if w > self.cutoff:
                continue
            ech, idx = self._level(w)
            grew |= ech.add({idx[k]: c for k, c in part.items()})
        return grew

    def contains(self, vec: Vec) -> bool:
        for w, part in homogeneous_parts(self.module, vec).items():
            if w > self.cutoff:
                continue
            ech, idx = self._level(w)
            if not ech.contains({idx[k]: c for k, c in part.items()}):
                return False
        return True

    def reduce(self, vec: Vec) -> Vec:
        """Canonical representative of ``vec`` modulo the subspace."""
        out: Vec = {}
        for w, part in homogeneous_parts(self.module, vec).items():
            if w > self.cutoff:
                out.update(part)
                continue
            ech, idx = self._level(w)
            keys = self._keys[w]
            for i, c in ech.reduce({idx[k]: c for k, c in part.items()}).items():
                out[keys[i]] = c
        return out

    def dim(self, w) -> int:
        w = Rational(w)
        return len(self._levels[w]) if w in self._levels else 0

    def codim(self, w) -> int:
        return self.module.dim(w) - self.dim(w)

    def total_dim(self) -> int:
        return sum(self.dim(w) for w in self.weights())

    def quotient_dim(self) -> int:
        return sum(self.codim(w) for w in self.weights())

    def complement(self, w) -> List:
        """Basis keys off the pivots: a homogeneous complement at level w."""
        w = Rational(w)
        ech, _ = self._level(w)
        piv = set(ech.pivots())
        return [k for i, k in enumerate(self._keys[w]) if i not in piv]

    def complement_basis(self) -> List:
        return [k for w in self.weights() for k in self.complement(w)]

    def level_rows(self, w) -> List[Dict]:
        ech, _ = self._level(Rational(w))
        return ech.reduced_rows()

    def __contains__(self, vec):
        return self.contains(vec)


def cm_subspace(module: Module, m: int, cutoff=None) -> Subspace:
    """C_m(W): span of v_(-m) w with wt(v) > 0, truncated at the cutoff."""
    if m < 1:
        raise ValueError("m must be >= 1")
    voa = module.voa
    sub = Subspace(module, cutoff)
    for x in module.basis_upto(sub.cutoff):
        wx = module.weight_of(x)
        # wt(v_(-m) x) = wt v + wx + m - 1 <= cutoff
        top_v = sub.cutoff - wx - m + 1
        wv = Rational(1)
        while wv <= top_v:
            for v in voa.basis(wv):
                sub.add(module.act(v, -m, x))
            wv += 1
    return sub


def cm_quotient_dim(module: Module, m: int, cutoff=None) -> int:
    return cm_subspace(module, m, cutoff).quotient_dim()


@dataclass
class StabilityResult:
    dims: Dict[Fraction, int]
    stabilized: bool

    @property
    def value(self) -> int:
        return self.dims[max(self.dims)]


def stabilization(dims: Dict[Fraction, int]) -> bool:
    """Constant over the three largest cutoffs."""
    ks = sorted(dims)[-3:]
    return len(ks) == 3 and len({dims[k] for k in ks}) == 1


def c2_quotient_dims(module: Module, cutoffs: Iterable) -> StabilityResult:
    dims = {Rational(L): cm_quotient_dim(module, 2, L) for L in cutoffs}
    return StabilityResult(dims, stabilization(dims))


def generated_submodule(module: Module, generator: Vec, cutoff=None) -> Subspace:
    """Span of all products of VOA modes applied to ``generator``, within the cutoff."""
    voa = module.voa
    sub = Subspace(module, cutoff)
    top = sub.cutoff
    h = module.min_weight()
    frontier = [generator] if generator else []
    sub.add(generator)
    vkeys = [v for v in voa.basis_upto(top - h) if v != voa.vacuum]
    while frontier:
        nxt = []
        for vec in frontier:
            for wx, part in homogeneous_parts(module, vec).items():
                for v in vkeys:
                    a = voa.weight_of(v)
                    # result weight a + wx - n - 1 in [h, top]
                    n_lo = int(-((-(a + wx - 1 - top).numerator) // (a + wx - 1 - top).denominator))
                    n_hi = int((a + wx - 1 - h).numerator // (a + wx - 1 - h).denominator)
                    for n in range(n_lo, n_hi + 1):
                        img = module.act_vec({v: ONE}, n, part)
                        if img and sub.add(img):
                            nxt.append(img)
        frontier = nxt
    return sub


def degree_mode(voa: VOA, v, k: int) -> int:
    """The (n)-index of the mode of v that lowers weight by k."""
    return int(k + voa.weight_of(v) - 1)


def monomial_span(module: Module, generator: Vec, b2: Sequence, cutoff=None) -> Subspace:
    """Span of v1_[n1] ... vk_[nk] w with vi in b2 and n1 < ... < nk (degree-indexed modes).

    ``v_[k]`` lowers weight by k.  The rightmost factor acts first, so the
    enumeration applies modes with strictly decreasing k.
    """
    voa = module.voa
    sub = Subspace(module, cutoff)
    top = sub.cutoff
    h = module.min_weight()
    if not generator:
        return sub
    gens = [v for v in b2 if v != voa.vacuum]
    wg = max(homogeneous_parts(module, generator))
    sub.add(generator)
    # state: (vector, weight, last k); next k must be smaller
    k_start = int((wg - h).numerator // (wg - h).denominator) + 1
    stack = [(generator, wg, k_start)]
    while stack:
        vec, wt, last = stack.pop()
        k = last - 1
        while wt - k <= top:
            if wt - k >= h:
                for v in gens:
                    img = module.act_vec({v: ONE}, degree_mode(voa, v, k), vec)
                    if img:
                        sub.add(img)
                        stack.append((img, wt - k, k))
            k -= 1
    return sub


def b2_complement(voa: VOA, cutoff=None) -> List:
    """Greedy homogeneous complement of C_2(V) in V."""
    return cm_subspace(voa, 2, cutoff).complement_basis()


def c2_spanning_check(module: Module, generator: Vec, b2: Optional[Sequence] = None, cutoff=None) -> Report:
    """Check level by level that B_2-monomials with increasing modes span the submodule generated by ``generator``."""
    top = module.cutoff if cutoff is None else Rational(cutoff)
    if b2 is None:
        b2 = b2_complement(module.voa, top)
    report = Report(f"C2 spanning set: {module.name}")
    report.meta["b2"] = [module.voa.label(v) for v in b2]
    target = generated_submodule(module, generator, top)
    span = monomial_span(module, generator, b2, top)
    for w in module.weights(top):
        missing = [t for t in (target.level_rows(w) if target.dim(w) else [])
                   if not span.contains({target._keys[w][i]: c for i, c in t.items()})]
        report.add_bool("spanning", f"spanning;level={w}", not missing,
                        f"{len(missing)} of {target.dim(w)} directions not spanned")
    return report

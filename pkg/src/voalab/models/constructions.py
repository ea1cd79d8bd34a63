"""Module maps, direct sums and submodules spanned by given vectors."""

from __future__ import annotations

from typing import Callable, Dict, Hashable, List, Sequence

from ..linalg import ONE, EchelonBasis, Rational, SparseMatrix, Vec, fmt_rational, vec_add, vec_sub
from ..modes import Module, OutOfWindow, homogeneous_parts
from ..report import Report


class ModuleMap:
    """A weight-preserving linear map given on basis keys (lazily, with a cache)."""

    def __init__(self, source: Module, target: Module, image: Callable[[Hashable], Vec], name: str = "f"):
        self.source = source
        self.target = target
        self._image = image
        self._cache: Dict[Hashable, Vec] = {}
        self.name = name

    def image(self, key) -> Vec:
        hit = self._cache.get(key)
        if hit is None:
            hit = self._image(key)
            self._cache[key] = hit
        return hit

    def apply(self, vec: Vec) -> Vec:
        out: Vec = {}
        for k, c in vec.items():
            vec_add(out, self.image(k), c)
        return out

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        """``self @ other`` applies ``other`` first."""
        return ModuleMap(other.source, self.target, lambda k: self.apply(other.image(k)),
                         f"{self.name}.{other.name}")

    def block(self, weight) -> SparseMatrix:
        src = self.source.basis(weight)
        tgt = self.target.basis(weight)
        index = {k: i for i, k in enumerate(tgt)}
        return SparseMatrix(len(tgt), len(src),
                            [(index[t], j, c) for j, k in enumerate(src) for t, c in self.image(k).items()])

    @classmethod
    def identity(cls, module: Module) -> "ModuleMap":
        return cls(module, module, lambda k: {k: ONE}, "id")

    @classmethod
    def scalar(cls, module: Module, c) -> "ModuleMap":
        c = Rational(c)
        return cls(module, module, lambda k: {k: c} if c else {}, f"{fmt_rational(c)}")

    @classmethod
    def from_blocks(cls, source: Module, target: Module, blocks: Dict, name: str = "f") -> "ModuleMap":
        """Map given by one matrix per weight (target level x source level); other weights raise."""
        def image(key):
            w = source.weight_of(key)
            if w not in blocks:
                raise OutOfWindow(f"no block at weight {fmt_rational(w)}")
            m = blocks[w]
            j = source.basis(w).index(key)
            tgt = target.basis(w)
            return {tgt[i]: c for i, jj, c in m.entries() if jj == j}
        return cls(source, target, image, name)

    def check(self, cutoff=None) -> Report:
        """f(g_(n) x) = g_(n) f(x) for VOA generators g and all in-window x, n."""
        top = min(self.source.cutoff, self.target.cutoff) if cutoff is None else Rational(cutoff)
        voa = self.source.voa
        rep = Report(f"module map {self.name}")
        h = self.source.min_weight()
        for x in self.source.basis_upto(top):
            wx = self.source.weight_of(x)
            for g, wg in voa.generators.items():
                n_lo = int(-((-(wg + wx - 1 - top).numerator) // (wg + wx - 1 - top).denominator))
                n_hi = int((wg + wx - 1 - h).numerator // (wg + wx - 1 - h).denominator)
                for n in range(n_lo, n_hi + 1):
                    try:
                        lhs = self.apply(self.source.gen_act(g, n, x))
                        rhs = self.target.gen_act_vec(g, n, self.image(x))
                    except OutOfWindow:
                        rep.skipped += 1
                        continue
                    rep.add("module-map", f"map;g={g};n={n};x={self.source.label(x)}", vec_sub(lhs, rhs), self.target)
        return rep


class DirectSumModule(Module):
    def __init__(self, first: Module, second: Module, name: str = ""):
        if first.voa is not second.voa:
            raise ValueError("summands must be modules over the same VOA")
        self.parts = (first, second)
        super().__init__(first.voa, min(first.cutoff, second.cutoff), name or f"{first.name}+{second.name}")

    def min_weight(self):
        return min(p.min_weight() for p in self.parts)

    def level_offsets(self):
        return sorted(set(self.parts[0].level_offsets()) | set(self.parts[1].level_offsets()))

    def basis(self, weight):
        return [(s, k) for s, p in enumerate(self.parts) for k in p.basis(weight)]

    def weight_of(self, key):
        return self.parts[key[0]].weight_of(key[1])

    def label(self, key) -> str:
        return f"({self.parts[key[0]].label(key[1])})_{key[0] + 1}"

    def gen_act(self, gen, n, key) -> Vec:
        s, k = key
        return {(s, x): c for x, c in self.parts[s].gen_act(gen, n, k).items()}

    def inject(self, s: int, vec: Vec) -> Vec:
        return {(s, k): c for k, c in vec.items()}

    def projection(self, s: int) -> ModuleMap:
        return ModuleMap(self, self.parts[s], lambda k: {k[1]: ONE} if k[0] == s else {}, f"p{s + 1}")

    def inclusion(self, s: int) -> ModuleMap:
        return ModuleMap(self.parts[s], self, lambda k: {(s, k): ONE}, f"i{s + 1}")


class SubModule(Module):
    """The submodule of ``ambient`` spanned (up to the cutoff) by vectors closed under generator modes.

    Basis keys are ``(weight, index)`` into an rref basis of each level.
    """

    def __init__(self, ambient: Module, vectors: Sequence[Vec], cutoff=None, close: bool = True, name: str = ""):
        self.ambient = ambient
        top = ambient.cutoff if cutoff is None else Rational(cutoff)
        super().__init__(ambient.voa, top, name or f"sub({ambient.name})")
        self._ech: Dict[Rational, EchelonBasis] = {}
        self._amb_index: Dict[Rational, Dict] = {}
        frontier = []
        for v in vectors:
            for w, part in homogeneous_parts(ambient, v).items():
                if w <= top and self._add(w, part):
                    frontier.append((w, part))
        if close:
            voa = ambient.voa
            h = ambient.min_weight()
            while frontier:
                nxt = []
                for w, vec in frontier:
                    for g, wg in voa.generators.items():
                        n_lo = int(-((-(wg + w - 1 - top).numerator) // (wg + w - 1 - top).denominator))
                        n_hi = int((wg + w - 1 - h).numerator // (wg + w - 1 - h).denominator)
                        for n in range(n_lo, n_hi + 1):
                            img = ambient.gen_act_vec(g, n, vec)
                            tw = wg + w - n - 1
                            if img and self._add(tw, img):
                                nxt.append((tw, img))
                frontier = nxt
        self._rows: Dict[Rational, List[Dict[int, Rational]]] = {}
        self._pivots: Dict[Rational, List[int]] = {}
        for w, ech in self._ech.items():
            rows = ech.reduced_rows()
            self._rows[w] = rows
            self._pivots[w] = [min(r) for r in rows]

    def _add(self, w, vec: Vec) -> bool:
        if w not in self._ech:
            self._ech[w] = EchelonBasis()
            self._amb_index[w] = {k: i for i, k in enumerate(self.ambient.basis(w))}
        idx = self._amb_index[w]
        return self._ech[w].add({idx[k]: c for k, c in vec.items()})

    def min_weight(self):
        ws = [w for w, r in self._ech.items() if len(r)]
        return min(ws) if ws else self.ambient.min_weight()

    def level_offsets(self):
        return self.ambient.level_offsets()

    def basis(self, weight):
        w = Rational(weight)
        if w > self.cutoff:
            raise OutOfWindow(f"submodule is only known up to weight {fmt_rational(self.cutoff)}")
        return [(w, i) for i in range(len(self._rows.get(w, [])))]

    def weights(self, cutoff=None):
        top = self.cutoff if cutoff is None else min(Rational(cutoff), self.cutoff)
        return sorted(w for w, r in self._rows.items() if r and w <= top)

    def weight_of(self, key):
        return key[0]

    def label(self, key) -> str:
        terms = sorted(self.lift(key).items(), key=lambda t: self.ambient.label(t[0]))
        return "[" + " + ".join(f"{fmt_rational(c)}*{self.ambient.label(k)}" for k, c in terms) + "]"

    def lift(self, key) -> Vec:
        w, i = key
        keys = self.ambient.basis(w)
        return {keys[j]: c for j, c in self._rows[w][i].items()}

    def lift_vec(self, vec: Vec) -> Vec:
        out: Vec = {}
        for k, c in vec.items():
            vec_add(out, self.lift(k), c)
        return out

    def coords(self, vec: Vec) -> Vec:
        """Coordinates of an ambient vector; raises ValueError if it is not in the submodule."""
        out: Vec = {}
        for w, part in homogeneous_parts(self.ambient, vec).items():
            if w > self.cutoff:
                raise OutOfWindow(f"weight {fmt_rational(w)} is above the submodule cutoff")
            idx = self._amb_index.get(w) or {k: i for i, k in enumerate(self.ambient.basis(w))}
            rest = {idx[k]: c for k, c in part.items()}
            for i, (row, p) in enumerate(zip(self._rows.get(w, []), self._pivots.get(w, []))):
                c = rest.get(p)
                if c:
                    out[(w, i)] = c
                    vec_add(rest, row, -c)
            if rest:
                raise ValueError(f"vector is not in the submodule at weight {fmt_rational(w)}")
        return out

    def contains(self, vec: Vec) -> bool:
        try:
            self.coords(vec)
        except ValueError:
            return False
        return True

    def gen_act(self, gen, n, key) -> Vec:
        w = key[0]
        tw = w + self.voa.gen_weight(gen) - n - 1
        if tw < self.ambient.min_weight():
            return {}
        if tw > self.cutoff:
            raise OutOfWindow(f"weight {fmt_rational(tw)} is above the submodule cutoff")
        return self.coords(self.ambient.gen_act_vec(gen, n, self.lift(key)))

    def inclusion(self) -> ModuleMap:
        return ModuleMap(self, self.ambient, self.lift, "incl")


def zero_module(like: Module, name: str = "0") -> SubModule:
    return SubModule(like, [], name=name)


# --- Jordan-block module maps ------------------------------------------------------------

def jordan_nilpotent(module: Module) -> ModuleMap:
    """The endomorphism e1 -> e0, e0 -> 0 of a Fock module with a 2-dimensional top (commutes with all modes)."""
    def image(key):
        part, i = key
        return {(part, i - 1): ONE} if i > 0 else {}
    return ModuleMap(module, module, image, "N")


def jordan_projection(module: Module, quotient: Module) -> ModuleMap:
    """J -> J / (e0-submodule), realized on the ordinary Fock module: e1 -> e0, e0 -> 0."""
    def image(key):
        part, i = key
        return {(part, 0): ONE} if i == module.top_dim - 1 else {}
    return ModuleMap(module, quotient, image, "pi")


def jordan_inclusion(sub: Module, module: Module) -> ModuleMap:
    """Ordinary Fock module onto the e0-submodule of a Jordan Fock module."""
    return ModuleMap(sub, module, lambda k: {(k[0], 0): ONE}, "iota")

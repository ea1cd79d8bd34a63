"""Logarithmic intertwining operators at truncation.

An intertwiner of type (W, U -> T) is stored through its modes

    Y(w, z) u = sum_{i=0}^{K} sum_r w_(r,i) u z^{-r-1} log^i z,

with w_(r,i) u in T of weight wt w + wt u - r - 1.  Conventions used
throughout, derived from the L(-1)-derivative property and the L(0)
bracket (N = L(0) - weight is the nilpotent part on each module):

    (L(-1) w)_(s,i) = -s w_(s-1,i) + (i+1) w_(s-1,i+1)
    (i+1) w_(r,i+1) u = N_T w_(r,i) u - (N_W w)_(r,i) u - w_(r,i) N_U u
    D = z d/dz - z L(-1):   (D y)(w)_(r) = (-r-1) y(w)_(r) - y(L(-1) w)_(r+1)
    Y^(i+1) = -D Y^(i) / (i+1)
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterator, List, Optional, Sequence, Tuple

from .linalg import (ONE, ZERO, EchelonBasis, Rational, SparseMatrix, Vec, fmt_rational, parse_rational, solve,
                     vec_add, vec_scale, vec_sub)
from .modes import BoundExceeded, Module, OutOfWindow, _ceil, _floor, binom, sgn
from .models.constructions import DirectSumModule, ModuleMap, SubModule
from .report import Report


class RelationViolated(ValueError):
    def __init__(self, descriptor: str, message: str = ""):
        super().__init__(f"relation fails at {descriptor}" + (f": {message}" if message else ""))
        self.descriptor = descriptor


class NotNilpotent(ValueError):
    pass


def _weights_upto(module: Module, top) -> List[Rational]:
    return module.weights(min(Rational(top), module.cutoff))


class ModeFamily:
    """A log-free family w_(r) u: W x U -> T, graded by wt w + wt u - r - 1."""

    def __init__(self, W: Module, U: Module, T: Module, name: str = ""):
        if not (W.voa is U.voa is T.voa):
            raise ValueError("W, U, T must be modules over the same VOA")
        self.W, self.U, self.T = W, U, T
        self.voa = W.voa
        self.name = name
        self._cache: Dict[tuple, Vec] = {}

    def _compute(self, w, r, u) -> Vec:
        raise NotImplementedError

    def target_weight(self, w, r, u) -> Rational:
        return self.W.weight_of(w) + self.U.weight_of(u) - Rational(r) - 1

    def __call__(self, w, r, u) -> Vec:
        r = Rational(r)
        key = (w, r, u)
        hit = self._cache.get(key)
        if hit is None:
            if self.target_weight(w, r, u) < self.T.min_weight():
                hit = {}
            else:
                hit = self._compute(w, r, u)
            self._cache[key] = hit
        return hit

    def on_vec(self, wvec: Vec, r, u) -> Vec:
        out: Vec = {}
        for w, c in wvec.items():
            vec_add(out, self(w, r, u), c)
        return out

    def minus_D(self) -> "ModeFamily":
        """The family -D f = (z L(-1) - z d/dz) f."""
        return DerivedFamily(self)


class FunctionFamily(ModeFamily):
    def __init__(self, W, U, T, fn: Callable, name: str = ""):
        super().__init__(W, U, T, name)
        self.fn = fn

    def _compute(self, w, r, u) -> Vec:
        return self.fn(w, r, u)


class DerivedFamily(ModeFamily):
    """(-D f)(w)_(r) = (r+1) f(w)_(r) + f(L(-1) w)_(r+1)."""

    def __init__(self, base: ModeFamily):
        super().__init__(base.W, base.U, base.T, f"-D({base.name})")
        self.base = base

    def _compute(self, w, r, u) -> Vec:
        out = vec_scale(self.base(w, r, u), r + 1)
        lw = self.voa.L(-1, {w: ONE}, self.W)
        vec_add(out, self.base.on_vec(lw, r + 1, u))
        return out


class LogIntertwiner:
    """Base class; subclasses implement :meth:`_mode`."""

    def __init__(self, W: Module, U: Module, T: Module, K: int, name: str = ""):
        if not (W.voa is U.voa is T.voa):
            raise ValueError("W, U, T must be modules over the same VOA")
        if K < 0:
            raise ValueError("K must be >= 0")
        self.W, self.U, self.T = W, U, T
        self.voa = W.voa
        self.K = K
        self.name = name
        self._cache: Dict[tuple, Vec] = {}

    def _mode(self, w, r, i, u) -> Vec:
        raise NotImplementedError

    def target_weight(self, w, r, u) -> Rational:
        return self.W.weight_of(w) + self.U.weight_of(u) - Rational(r) - 1

    def mode(self, w, r, i: int, u) -> Vec:
        r = Rational(r)
        key = (w, r, i, u)
        hit = self._cache.get(key)
        if hit is None:
            if i > self.K or i < 0 or self.target_weight(w, r, u) < self.T.min_weight():
                hit = {}
            else:
                hit = self._mode(w, r, i, u)
            self._cache[key] = hit
        return hit

    def mode_vec(self, wvec: Vec, r, i: int, uvec: Vec) -> Vec:
        out: Vec = {}
        for w, a in wvec.items():
            for u, b in uvec.items():
                vec_add(out, self.mode(w, r, i, u), a * b)
        return out

    def component(self, i: int) -> ModeFamily:
        return FunctionFamily(self.W, self.U, self.T, lambda w, r, u: self.mode(w, r, i, u), f"{self.name}^({i})")

    def window(self, cutoffs: Optional[Tuple] = None) -> Iterator[Tuple[Hashable, Rational, Hashable]]:
        """All (w, r, u) with w, u, and w_(r) u inside the respective cutoffs."""
        cw, cu, ct = cutoffs or (self.W.cutoff, self.U.cutoff, self.T.cutoff)
        tws = _weights_upto(self.T, ct)
        for w in self.W.basis_upto(min(cw, self.W.cutoff)):
            a = self.W.weight_of(w)
            for u in self.U.basis_upto(min(cu, self.U.cutoff)):
                b = self.U.weight_of(u)
                for t in tws:
                    yield w, a + b - t - 1, u

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}: {self.W.name} x {self.U.name} -> {self.T.name}, K={self.K}>"


# --- shipped intertwiners -----------------------------------------------------------------

class VertexOperator(LogIntertwiner):
    """Y^M viewed as an intertwiner of type (V, M -> M)."""

    def __init__(self, module: Module, name: str = ""):
        super().__init__(module.voa, module, module, 0, name or f"Y^{module.name}")

    def _mode(self, w, r, i, u) -> Vec:
        if r.denominator != 1:
            return {}
        return self.U.act(w, int(r), u)


class Composed(LogIntertwiner):
    """f o y for a module map f: T -> T'."""

    def __init__(self, y: LogIntertwiner, f: ModuleMap, K: Optional[int] = None, name: str = ""):
        if f.source is not y.T:
            raise ValueError("map source must be the intertwiner target")
        super().__init__(y.W, y.U, f.target, y.K if K is None else K, name or f"{f.name}.{y.name}")
        self.y, self.f = y, f

    def _mode(self, w, r, i, u) -> Vec:
        return self.f.apply(self.y.mode(w, r, i, u))


class Descendant(LogIntertwiner):
    """Intertwiner determined by its modes on the generating vectors of W.

    W must provide ``decompose_module(key)`` returning ``(gen, p, rest)`` or
    None for generating vectors, whose modes come from ``top``.  Other modes
    follow from the Borcherds identity with first index zero:

        (g_(p) x)_(s,i) u = sum_j (-1)^j C(p,j) [g_(p-j) x_(s+j,i) u - (-1)^p x_(p+s-j,i) g_(j) u].
    """

    def __init__(self, W, U, T, K: int, top: Callable, name: str = ""):
        super().__init__(W, U, T, K, name)
        self.top = top

    def _mode(self, w, r, i, u) -> Vec:
        dec = self.W.decompose_module(w)
        if dec is None:
            return self.top(w, r, i, u)
        g, p, rest = dec
        wg = self.voa.gen_weight(g)
        gv = self.voa.gen_vector(g)
        out: Vec = {}
        wx = self.W.weight_of(next(iter(rest))) if rest else ZERO
        b = self.U.weight_of(u)
        # first sum: x_(s+j,i) u vanishes once its weight drops below T
        j_hi1 = _floor(wx + b - r - 1 - self.T.min_weight())
        for j in range(0, j_hi1 + 1):
            c = sgn(j) * binom(p, j)
            if c:
                inner = self.mode_vec(rest, r + j, i, {u: ONE})
                if inner:
                    vec_add(out, self.T.act_vec(gv, p - j, inner), c)
        # second sum: g_(j) u vanishes below U
        j_hi2 = _floor(wg + b - 1 - self.U.min_weight())
        for j in range(0, j_hi2 + 1):
            c = sgn(j) * binom(p, j) * sgn(p)
            if c:
                gu = self.U.act_vec(gv, j, {u: ONE})
                if gu:
                    vec_add(out, self.mode_vec(rest, p + r - j, i, gu), -c)
        return out


def fock_intertwiner(W: Module, U: Module, T: Module, name: str = "") -> Descendant:
    """The lattice-type intertwiner Y(|mu>, z) = z^{mu alpha_0} E^-(z) E^+(z) e^mu of type (F_mu, U -> T).

    U and T are Fock modules with the same top dimension and zero modes
    A_U and A_T = mu + A_U; on a Jordan top z^{mu alpha_0} = z^{mu nu}(1 + mu N log z)
    produces log terms.  Modes of descendants of |mu> follow by recursion.
    """
    mu = W.momentum
    nu = U.momentum
    if T.momentum != mu + nu or T.top_dim != U.top_dim or W.top_dim != 1:
        raise ValueError("need W = F(mu), and U, T Fock modules with momenta nu, mu + nu")
    for a in range(U.top_dim):
        for b in range(U.top_dim):
            diff = T.zero_mode[a][b] - U.zero_mode[a][b]
            if diff != (mu if a == b else 0):
                raise ValueError("zero mode of T must be mu + zero mode of U")
    nil = [[U.zero_mode[a][b] - (nu if a == b else 0) for b in range(U.top_dim)] for a in range(U.top_dim)]

    def N(vec: Vec) -> Vec:
        out: Vec = {}
        for (part, j), c in vec.items():
            for a in range(U.top_dim):
                x = nil[a][j]
                if x:
                    vec_add(out, {(part, a): x * c})
        return out

    K = 0
    probe = {((), j): ONE for j in range(U.top_dim)}
    while mu and N(probe):
        probe = N(probe)
        K += 1

    def x_series(vec: Vec, m_max: int) -> List[Vec]:
        # E^+(z) = sum_m z^{-m} X_m with X_m = -(mu/m) sum_{n=1}^m alpha_n X_{m-n}
        xs = [vec]
        for m in range(1, m_max + 1):
            acc: Vec = {}
            for n in range(1, m + 1):
                vec_add(acc, U.gen_act_vec("a", n, xs[m - n]))
            xs.append(vec_scale(acc, -mu / m))
        return xs

    def y_series(vec: Vec, k_max: int) -> List[Vec]:
        # E^-(z) = sum_k z^k Y_k with Y_k = (mu/k) sum_{n=1}^k alpha_{-n} Y_{k-n}
        ys = [vec]
        for k in range(1, k_max + 1):
            acc: Vec = {}
            for n in range(1, k + 1):
                vec_add(acc, T.gen_act_vec("a", -n, ys[k - n]))
            ys.append(vec_scale(acc, mu / k))
        return ys

    def top(w, r, i, u) -> Vec:
        d = -1 - mu * nu - r
        if d.denominator != 1:
            return {}
        d = int(d)
        level = sum(u[0])
        vec = {u: ONE}
        for _ in range(i):
            vec = N(vec)
        vec = vec_scale(vec, mu ** i / math.factorial(i))
        if not vec:
            return {}
        xs = x_series(vec, level)
        out: Vec = {}
        for m in range(max(0, -d), level + 1):
            k = d + m
            if xs[m]:
                vec_add(out, y_series(xs[m], k)[k])  # e^mu is the identity on keys
        return out

    return Descendant(W, U, T, K, top, name or f"Y[{W.name},{U.name}->{T.name}]")


class TableIntertwiner(LogIntertwiner):
    """Intertwiner given by an explicit table of modes on a finite window."""

    def __init__(self, W, U, T, K: int, table: Dict[tuple, Vec], cutoffs: Tuple, name: str = "table"):
        super().__init__(W, U, T, K, name)
        self.table = table
        self.cutoffs = tuple(Rational(c) for c in cutoffs)

    def _mode(self, w, r, i, u) -> Vec:
        cw, cu, ct = self.cutoffs
        if self.W.weight_of(w) > cw or self.U.weight_of(u) > cu or self.target_weight(w, r, u) > ct:
            raise OutOfWindow("mode outside the tabulated window")
        return self.table.get((w, r, i, u), {})


class Join(LogIntertwiner):
    """y(w,z)u = (y1(w,z)u, y2(w,z)u) into the span of joint images in T1 + T2."""

    def __init__(self, y1: LogIntertwiner, y2: LogIntertwiner, name: str = ""):
        if y1.W is not y2.W or y1.U is not y2.U:
            raise ValueError("join needs intertwiners on the same (W, U)")
        amb = DirectSumModule(y1.T, y2.T)
        self.y1, self.y2 = y1, y2
        self.ambient = amb
        K = max(y1.K, y2.K)
        ct = min(y1.T.cutoff, y2.T.cutoff)
        images = []
        probe = LogIntertwiner(y1.W, y1.U, amb, K)
        for w, r, u in probe.window((y1.W.cutoff, y1.U.cutoff, ct)):
            for i in range(K + 1):
                x = self._joint(w, r, i, u)
                if x:
                    images.append(x)
        T = SubModule(amb, images, cutoff=ct, name=f"join({y1.T.name},{y2.T.name})")
        super().__init__(y1.W, y1.U, T, K, name or f"join({y1.name},{y2.name})")

    def _joint(self, w, r, i, u) -> Vec:
        out = {(0, k): c for k, c in self.y1.mode(w, r, i, u).items()}
        out.update({(1, k): c for k, c in self.y2.mode(w, r, i, u).items()})
        return out

    def _mode(self, w, r, i, u) -> Vec:
        return self.T.coords(self._joint(w, r, i, u))

    def projection(self, s: int) -> ModuleMap:
        p = self.ambient.projection(s)
        return ModuleMap(self.T, p.target, lambda k: p.apply(self.T.lift(k)), f"p{s + 1}")


class Reconstructed(LogIntertwiner):
    """Y^(0) = y0 and Y^(i+1) = -D Y^(i) / (i+1)."""

    def __init__(self, y0: ModeFamily, K: int, name: str = ""):
        super().__init__(y0.W, y0.U, y0.T, K, name or f"rec({y0.name})")
        comps = [y0]
        for i in range(K):
            comps.append(comps[-1].minus_D())
        self.comps = comps

    def _mode(self, w, r, i, u) -> Vec:
        return vec_scale(self.comps[i](w, r, u), ONE / math.factorial(i))


class ZeroIntertwiner(LogIntertwiner):
    def __init__(self, W, U, T, name: str = "0"):
        super().__init__(W, U, T, 0, name)

    def _mode(self, w, r, i, u) -> Vec:
        return {}


def detect_log_degree(y: LogIntertwiner) -> int:
    """Largest i with a nonzero mode w_(r,i) u in the window (0 for the zero intertwiner)."""
    for i in range(y.K, 0, -1):
        if any(y.mode(w, r, i, u) for w, r, u in y.window()):
            return i
    return 0


# --- axioms ----------------------------------------------------------------------------------

def _desc(y: LogIntertwiner, kind: str, **kw) -> str:
    parts = [kind]
    for k, v in kw.items():
        if k == "v":
            parts.append(f"v={y.voa.label(v)}")
        elif k == "w":
            parts.append(f"w={y.W.label(v)}")
        elif k == "u":
            parts.append(f"u={y.U.label(v)}")
        elif isinstance(v, Rational.__class__) or hasattr(v, "denominator"):
            parts.append(f"{k}={fmt_rational(v)}")
        else:
            parts.append(f"{k}={v}")
    return ";".join(parts)


def borcherds_residual(y: LogIntertwiner, v, w, u, p: int, q: int, r, i: int) -> Vec:
    """Jacobi identity coefficient for an intertwiner, in log degree i.

    sum_j C(p,j) (v_(q+j) w)_(p+r-j,i) u
      - sum_j (-1)^j C(q,j) [v_(p+q-j) w_(r+j,i) u - (-1)^q w_(q+r-j,i) v_(p+j) u]
    """
    V, W, U, T = y.voa, y.W, y.U, y.T
    a, b, c = V.weight_of(v), W.weight_of(w), U.weight_of(u)
    r = Rational(r)
    out: Vec = {}
    for j in range(0, max(-1, _floor(a + b - q - 1 - W.min_weight())) + 1):
        k = binom(p, j)
        if k:
            vw = W.act(v, q + j, w)
            if vw:
                vec_add(out, y.mode_vec(vw, p + r - j, i, {u: ONE}), k)
    for j in range(0, max(-1, _floor(b + c - r - 1 - T.min_weight())) + 1):
        k = sgn(j) * binom(q, j)
        if k:
            inner = y.mode(w, r + j, i, u)
            if inner:
                vec_add(out, T.act_vec({v: ONE}, p + q - j, inner), -k)
    for j in range(0, max(-1, _floor(a + c - p - 1 - U.min_weight())) + 1):
        k = sgn(j) * binom(q, j) * sgn(q)
        if k:
            vu = U.act(v, p + j, u)
            if vu:
                vec_add(out, y.mode_vec({w: ONE}, q + r - j, i, vu), k)
    return out


def derivative_residual(y: LogIntertwiner, w, s, i: int, u) -> Vec:
    """(L(-1)w)_(s,i) u + s w_(s-1,i) u - (i+1) w_(s-1,i+1) u."""
    lw = y.voa.L(-1, {w: ONE}, y.W)
    out = y.mode_vec(lw, s, i, {u: ONE})
    vec_add(out, y.mode(w, s - 1, i, u), s)
    vec_add(out, y.mode(w, s - 1, i + 1, u), -(i + 1))
    return out


def _nilpotent_part(module: Module, vec: Vec) -> Vec:
    """(L(0) - weight) applied to a vector."""
    out = module.voa.L(0, vec, module)
    for k, c in vec.items():
        vec_add(out, {k: c}, -module.weight_of(k))
    return out


def relation_residual(y: LogIntertwiner, w, r, i: int, u) -> Vec:
    """(i+1) w_(r,i+1) u - [N_T w_(r,i) u - (N_W w)_(r,i) u - w_(r,i) N_U u]."""
    out = vec_scale(y.mode(w, r, i + 1, u), i + 1)
    vec_add(out, _nilpotent_part(y.T, y.mode(w, r, i, u)), -1)
    vec_add(out, y.mode_vec(_nilpotent_part(y.W, {w: ONE}), r, i, {u: ONE}))
    vec_add(out, y.mode_vec({w: ONE}, r, i, _nilpotent_part(y.U, {u: ONE})))
    return out


def differential_residual(y: LogIntertwiner, w, r, i: int, u) -> Vec:
    """(i+1) w_(r,i+1) u - [(r+1) w_(r,i) u + (L(-1) w)_(r+1,i) u]."""
    out = vec_scale(y.mode(w, r, i + 1, u), i + 1)
    vec_add(out, y.mode(w, r, i, u), -(r + 1))
    vec_add(out, y.mode_vec(y.voa.L(-1, {w: ONE}, y.W), r + 1, i, {u: ONE}), -1)
    return out


def _sampled(items: List, limit: Optional[int], rng: random.Random) -> List:
    if limit is None or len(items) <= limit:
        return items
    keep = sorted(rng.sample(range(len(items)), limit))
    return [items[k] for k in keep]


def borcherds_instances(y: LogIntertwiner, budget=None) -> List[tuple]:
    """In-window (v, w, u, p, q, r) with level(v) + level(w) + level(u) <= budget."""
    V, W, U, T = y.voa, y.W, y.U, y.T
    hw, hu = W.min_weight(), U.min_weight()
    cw, cu, ct = W.cutoff, U.cutoff, T.cutoff
    out = []
    tws = T.weights(ct)
    for v in V.basis_upto(V.cutoff):
        a = V.weight_of(v)
        for w in W.basis_upto(cw):
            b = W.weight_of(w)
            for u in U.basis_upto(cu):
                c = U.weight_of(u)
                if budget is not None and a + (b - hw) + (c - hu) > budget:
                    continue
                for p in range(_ceil(a + c - 1 - cu), _floor(a + c - hu) + 1):
                    for q in range(_ceil(a + b - 1 - cw), _floor(a + b - hw) + 1):
                        for s in tws:
                            r = a + b + c - p - q - 2 - s
                            # every w_(r+j) u used must be in the window
                            if b + c - r - 1 > ct:
                                continue
                            out.append((v, w, u, p, q, r))
    return out


ALL_CHECKS = ("truncation", "degree", "log-degree", "derivative", "relation",
              "commutativity", "associativity", "borcherds")


def check_axioms(y: LogIntertwiner, budget=None, samples: Optional[int] = 300, seed: int = 0,
                 checks: Sequence[str] = ALL_CHECKS) -> Report:
    """Truncation, log degree, L(-1)-derivative, (2.3)-type relations and the Jacobi identity.

    Every family of instances is exhaustive when it has at most ``samples``
    members and otherwise a seeded sample of that size (``samples=None``
    checks everything).
    """
    rng = random.Random(seed)
    rep = Report(f"intertwiner axioms: {y.name}")
    rep.meta["K"] = y.K
    W, U, T = y.W, y.U, y.T

    def run(kind, items, fn):
        if kind not in checks:
            return
        for params in _sampled(items, samples, rng):
            try:
                res, desc = fn(*params)
            except OutOfWindow:
                rep.skipped += 1
                continue
            rep.add(kind, desc, res, T)

    # lower truncation and the degree law
    trunc = []
    for w in W.basis_upto():
        for u in U.basis_upto():
            below = W.weight_of(w) + U.weight_of(u) - T.min_weight()
            for extra in (0, 1):
                for i in range(y.K + 1):
                    trunc.append((w, below + extra, i, u))
    run("truncation", trunc, lambda w, r, i, u: (y.mode(w, r, i, u),
                                                 _desc(y, "truncation", w=w, r=r, i=i, u=u)))
    degree = []
    for w, r, u in y.window():
        for i in range(y.K + 1):
            degree.append((w, r, i, u))

    def degree_fn(w, r, i, u):
        t = y.target_weight(w, r, u)
        bad = {k: c for k, c in y.mode(w, r, i, u).items() if T.weight_of(k) != t}
        return bad, _desc(y, "degree", w=w, r=r, i=i, u=u)
    run("degree", degree, degree_fn)

    top_nonzero = "log-degree" not in checks or any(y.mode(w, r, y.K, u) for w, r, u in y.window())
    if "log-degree" in checks:
        rep.add_bool("log-degree", f"log-degree;K={y.K}", top_nonzero,
                     f"Y^({y.K}) vanishes on the window" if not top_nonzero else "")

    deriv = []
    for w in W.basis_upto(W.cutoff - 1):
        b = W.weight_of(w)
        for u in U.basis_upto():
            c = U.weight_of(u)
            for t in T.weights():
                s = b + 1 + c - t - 1
                for i in range(y.K + 1):
                    deriv.append((w, s, i, u))
    run("derivative", deriv, lambda w, s, i, u: (derivative_residual(y, w, s, i, u),
                                                 _desc(y, "derivative", w=w, s=s, i=i, u=u)))

    rel = [(w, r, i, u) for (w, r, i, u) in degree if i < y.K or y.K == 0]
    run("relation", rel, lambda w, r, i, u: (relation_residual(y, w, r, i, u),
                                             _desc(y, "relation", w=w, r=r, i=i, u=u)))

    inst = borcherds_instances(y, budget)
    comm = [t for t in inst if t[4] == 0]
    assoc = [t for t in inst if t[3] == 0 and t[4] != 0]
    other = [t for t in inst if t[3] != 0 and t[4] != 0]
    for kind, items in (("commutativity", comm), ("associativity", assoc), ("borcherds", other)):
        expanded = [(v, w, u, p, q, r, i) for (v, w, u, p, q, r) in items for i in range(y.K + 1)]
        run(kind, expanded, lambda v, w, u, p, q, r, i: (
            borcherds_residual(y, v, w, u, p, q, r, i),
            _desc(y, kind, v=v, w=w, u=u, p=p, q=q, r=r, i=i)))
    return rep


# --- log components, nilpotency, reconstruction -----------------------------------------------

def log_component(y: LogIntertwiner, m: int) -> ModeFamily:
    """Y^(m) as a log-free family, after checking both relations linking it to Y^(m-1).

    Raises :class:`RelationViolated` with the first failing instance.
    """
    if m < 0 or m > y.K:
        raise ValueError(f"m must lie in 0..{y.K}")
    if m > 0:
        for w, r, u in y.window():
            try:
                res = relation_residual(y, w, r, m - 1, u)
                dres = differential_residual(y, w, r, m - 1, u)
            except OutOfWindow:
                continue
            if res:
                raise RelationViolated(_desc(y, "relation", w=w, r=r, i=m - 1, u=u))
            if dres:
                raise RelationViolated(_desc(y, "differential", w=w, r=r, i=m - 1, u=u))
    return y.component(m)


def _family_window(f: ModeFamily, wcut):
    tws = f.T.weights()
    for w in f.W.basis_upto(wcut):
        a = f.W.weight_of(w)
        for u in f.U.basis_upto():
            b = f.U.weight_of(u)
            for t in tws:
                yield w, a + b - t - 1, u


def _vanishes(f: ModeFamily, wcut) -> bool:
    for w, r, u in _family_window(f, wcut):
        try:
            if f(w, r, u):
                return False
        except OutOfWindow:
            continue
    return True


def nilpotency_order(y0: ModeFamily, bound: int = 6) -> int:
    """Smallest k with D^k y0 = 0 on the window (0 for the zero family).

    D^k y0 involves L(-1)^k w, so it is tested on w of weight <= cutoff - k;
    :class:`BoundExceeded` is raised when k passes ``bound`` or that range is empty.
    """
    f = y0
    for k in range(bound + 1):
        wcut = y0.W.cutoff - k
        if wcut < y0.W.min_weight():
            raise BoundExceeded(k, "window exhausted before the family vanished")
        if _vanishes(f, wcut):
            return k
        f = f.minus_D()
    raise BoundExceeded(bound)


def reconstruct(y0: ModeFamily, bound: int = 6) -> LogIntertwiner:
    try:
        k = nilpotency_order(y0, bound)
    except BoundExceeded as exc:
        raise NotNilpotent(f"(z d/dz - z L(-1))^k y0 is nonzero for k <= {exc.bound}") from exc
    return Reconstructed(y0, max(k - 1, 0))


def modes_equal(y1: LogIntertwiner, y2: LogIntertwiner) -> Optional[str]:
    """None when all in-window modes agree, else a descriptor of the first difference."""
    K = max(y1.K, y2.K)
    for w, r, u in y1.window():
        for i in range(K + 1):
            try:
                if y1.mode(w, r, i, u) != y2.mode(w, r, i, u):
                    return _desc(y1, "mode", w=w, r=r, i=i, u=u)
            except OutOfWindow:
                continue
    return None


def lemma3(y: LogIntertwiner) -> Report:
    """On modules with semisimple L(0), the relation forces Y^(1) = 0, hence K = 0."""
    rep = Report(f"semisimple L(0) forces K = 0: {y.name}")
    semisimple = True
    for mod, tag in ((y.W, "W"), (y.U, "U"), (y.T, "T")):
        for k in mod.basis_upto():
            n = _nilpotent_part(mod, {k: ONE})
            rep.add(f"semisimple-{tag}", f"semisimple;{tag}={mod.label(k)}", n, mod)
            semisimple &= not n
    if not semisimple:
        rep.notes.append("L(0) is not semisimple on every module; the lemma does not apply")
        return rep
    # with N = 0 the relation reads (i+1) w_(r,i+1) u = 0
    for w, r, u in y.window():
        derived: Vec = {}
        vec_add(derived, _nilpotent_part(y.T, y.mode(w, r, 0, u)))
        vec_add(derived, y.mode_vec(_nilpotent_part(y.W, {w: ONE}), r, 0, {u: ONE}), -1)
        vec_add(derived, y.mode_vec({w: ONE}, r, 0, _nilpotent_part(y.U, {u: ONE})), -1)
        rep.add("derived-Y1", _desc(y, "derived-Y1", w=w, r=r, u=u), derived, y.T)
        if y.K >= 1:
            rep.add("declared-Y1", _desc(y, "declared-Y1", w=w, r=r, u=u), y.mode(w, r, 1, u), y.T)
    rep.meta["K"] = 0 if rep.passed else y.K
    return rep


# --- the directed set of surjective intertwiners ----------------------------------------------

@dataclass
class IntertwinerHom:
    """f: T2 -> T1 with f(Y2(w,z)u) = Y1(w,z)u; ``upper`` dominates ``lower``."""
    upper: LogIntertwiner
    lower: LogIntertwiner
    f: ModuleMap
    report: Report = field(default_factory=lambda: Report("witness"))

    @property
    def valid(self) -> bool:
        return self.report.passed


def _level_pairs(upper: LogIntertwiner, lower: LogIntertwiner):
    K = max(upper.K, lower.K)
    pairs: Dict[Rational, List[Tuple[Vec, Vec]]] = {}
    ct = min(upper.T.cutoff, lower.T.cutoff)
    for w, r, u in upper.window((upper.W.cutoff, upper.U.cutoff, ct)):
        t = upper.target_weight(w, r, u)
        for i in range(K + 1):
            try:
                x2 = upper.mode(w, r, i, u)
                x1 = lower.mode(w, r, i, u)
            except OutOfWindow:
                continue
            if x2 or x1:
                pairs.setdefault(t, []).append((x2, x1))
    return pairs, ct


def verify_witness(upper: LogIntertwiner, lower: LogIntertwiner, f: ModuleMap) -> Report:
    rep = Report(f"{upper.name} dominates {lower.name}")
    K = max(upper.K, lower.K)
    ct = min(upper.T.cutoff, lower.T.cutoff)
    for w, r, u in upper.window((upper.W.cutoff, upper.U.cutoff, ct)):
        for i in range(K + 1):
            try:
                res = vec_sub(f.apply(upper.mode(w, r, i, u)), lower.mode(w, r, i, u))
            except OutOfWindow:
                rep.skipped += 1
                continue
            rep.add("intertwines", _desc(upper, "witness", w=w, r=r, i=i, u=u), res, lower.T)
    rep.extend(f.check(ct))
    return rep


def dominates(upper: LogIntertwiner, lower: LogIntertwiner) -> Optional[IntertwinerHom]:
    """Solve level by level for f: T_upper -> T_lower with f o upper = lower; None if impossible."""
    if upper.W is not lower.W or upper.U is not lower.U:
        raise ValueError("intertwiners must share (W, U)")
    pairs, ct = _level_pairs(upper, lower)
    T2, T1 = upper.T, lower.T
    blocks = {}
    for t in T2.weights(ct):
        src = T2.basis(t)
        tgt = T1.basis(t)
        sidx = {k: j for j, k in enumerate(src)}
        plist = pairs.get(t, [])
        rows = [{sidx[k]: c for k, c in x2.items()} for x2, _ in plist]
        m = SparseMatrix.from_row_dicts(rows, len(src)) if rows else SparseMatrix.zero(0, len(src))
        entries = []
        for a, key in enumerate(tgt):
            rhs = [x1.get(key, ZERO) for _, x1 in plist]
            if not rows:
                continue
            sol = solve(m, rhs)
            if sol is None:
                return None
            entries.extend((a, j, c) for j, c in enumerate(sol) if c)
        if not rows and any(x1 for _, x1 in plist):
            return None
        blocks[t] = SparseMatrix(len(tgt), len(src), entries)
    for t in T2.weights(ct):
        blocks.setdefault(t, SparseMatrix.zero(len(T1.basis(t)), len(T2.basis(t))))
    f = ModuleMap.from_blocks(T2, T1, blocks, f"f[{upper.name}->{lower.name}]")
    rep = verify_witness(upper, lower, f)
    if not rep.passed:
        return None
    return IntertwinerHom(upper, lower, f, rep)


def isomorphic(y1: LogIntertwiner, y2: LogIntertwiner) -> bool:
    return dominates(y1, y2) is not None and dominates(y2, y1) is not None


def join(y1: LogIntertwiner, y2: LogIntertwiner) -> Tuple[Join, IntertwinerHom, IntertwinerHom]:
    y = Join(y1, y2)
    homs = []
    for s, yi in enumerate((y1, y2)):
        p = y.projection(s)
        homs.append(IntertwinerHom(y, yi, p, verify_witness(y, yi, p)))
    return y, homs[0], homs[1]


def surjectivity(y: LogIntertwiner) -> Report:
    """Per level of T up to its cutoff: do the mode images span T?"""
    rep = Report(f"surjectivity: {y.name}")
    spans: Dict[Rational, EchelonBasis] = {}
    for w, r, u in y.window():
        t = y.target_weight(w, r, u)
        idx = {k: j for j, k in enumerate(y.T.basis(t))}
        for i in range(y.K + 1):
            x = y.mode(w, r, i, u)
            if x:
                spans.setdefault(t, EchelonBasis()).add({idx[k]: c for k, c in x.items()})
    for t in y.T.weights():
        d = y.T.dim(t)
        got = len(spans.get(t, []))
        rep.add_bool("surjective", f"surjective;level={fmt_rational(t)}", got == d,
                     f"images span {got} of {d}")
    return rep


def is_surjective(y: LogIntertwiner) -> bool:
    return surjectivity(y).passed


def fusion_bound(y: LogIntertwiner, N: int) -> Dict[str, object]:
    """(K+1) dim(W / O~_{N,N}(W)) dim U(N) at truncation, reported as evidence only."""
    from .zhu import o_tilde_span
    span = o_tilde_span(y.W, N)
    u_n = sum(y.U.dim(base + N) for base in y.U.level_offsets())
    q = span.codim()
    return {"K": y.K, "N": N, "codim_otilde": q, "dim_U_N": u_n, "bound": (y.K + 1) * q * u_n,
            "cutoff": fmt_rational(y.W.cutoff), "certified": False}


# --- JSON -----------------------------------------------------------------------------------------

def dump_intertwiner(y: LogIntertwiner) -> str:
    modes = {}
    for w, r, u in y.window():
        for i in range(y.K + 1):
            x = y.mode(w, r, i, u)
            if x:
                modes.setdefault((w, r, i), []).append(
                    {"u": y.U.label(u), "result": [{"basis": y.T.label(k), "coeff": fmt_rational(c)}
                                                  for k, c in sorted(x.items(), key=lambda t: y.T.label(t[0]))]})
    order = {k: j for j, k in enumerate(y.W.basis_upto())}
    doc = {
        "name": y.name,
        "W": y.W.name, "U": y.U.name, "T": y.T.name,
        "K": y.K,
        "cutoffs": [fmt_rational(y.W.cutoff), fmt_rational(y.U.cutoff), fmt_rational(y.T.cutoff)],
        "modes": [{"w": y.W.label(w), "r": fmt_rational(r), "i": i, "matrix": rows}
                  for (w, r, i), rows in sorted(modes.items(), key=lambda t: (order[t[0][0]], t[0][1], t[0][2]))],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def load_intertwiner(text: str, W: Module, U: Module, T: Module) -> TableIntertwiner:
    doc = json.loads(text)
    cw, cu, ct = (parse_rational(c) for c in doc["cutoffs"])
    wl = {W.label(k): k for k in W.basis_upto(cw)}
    ul = {U.label(k): k for k in U.basis_upto(cu)}
    tl = {T.label(k): k for k in T.basis_upto(ct)}
    K = int(doc["K"])
    table: Dict[tuple, Vec] = {}
    for j, m in enumerate(doc["modes"]):
        loc = f"$.modes[{j}]"
        if m["w"] not in wl:
            raise ValueError(f"{loc}.w: unknown vector {m['w']!r}")
        i = int(m["i"])
        if not 0 <= i <= K:
            raise ValueError(f"{loc}.i: log degree {i} outside 0..{K}")
        r = parse_rational(m["r"])
        for row in m["matrix"]:
            if row["u"] not in ul:
                raise ValueError(f"{loc}: unknown vector {row['u']!r}")
            vec = {}
            for term in row["result"]:
                if term["basis"] not in tl:
                    raise ValueError(f"{loc}: unknown vector {term['basis']!r}")
                vec[tl[term["basis"]]] = parse_rational(term["coeff"])
            table[(wl[m["w"]], r, i, ul[row["u"]])] = {k: c for k, c in vec.items() if c}
    return TableIntertwiner(W, U, T, K, table, (cw, cu, ct), doc.get("name", "table"))

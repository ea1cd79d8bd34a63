"""Mode calculus: modules as exact mode actions, fields, and identity checks.

A :class:`Module` knows its graded basis and the modes of the VOA's strong
generators.  Modes of every other VOA basis vector are obtained through the
``q = 0`` specialisation of the Borcherds identity,

    (a_(p) b)_(n) = sum_j (-1)^j C(p, j) (a_(p-j) b_(n+j) - (-1)^p b_(p+n-j) a_(j)),

which terminates on each vector by lower truncation.  Nothing is clipped at a
cutoff: the cutoff of a module only decides which instances are enumerated.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

from .linalg import ONE, ZERO, Rational, SparseMatrix, Vec, fmt_rational, vec_add, vec_sub


class OutOfWindow(Exception):
    """An identity instance needs a weight above the cutoff; it is skipped."""


class BoundExceeded(Exception):
    def __init__(self, bound: int, message: str = ""):
        super().__init__(message or f"no vanishing order found up to bound {bound}")
        self.bound = bound


def sgn(k: int) -> int:
    """(-1)^k as an int, for any integer k."""
    return -1 if k % 2 else 1


def binom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) for any integer n and k >= 0."""
    if k < 0:
        return 0
    if n >= 0:
        return math.comb(n, k) if k <= n else 0
    # C(n, k) = (-1)^k C(k - n - 1, k)
    return sgn(k) * math.comb(k - n - 1, k)


def _ceil(x) -> int:
    return int(-((-x.numerator) // x.denominator))


def _floor(x) -> int:
    return int(x.numerator // x.denominator)


class Module:
    """A graded module over ``self.voa`` with exact mode actions at all weights.

    Subclasses implement :meth:`basis`, :meth:`weight_of`, :meth:`min_weight`,
    :meth:`level_offsets` and :meth:`gen_act`.
    """

    def __init__(self, voa: "VOA", cutoff, name: str = ""):
        self.voa = voa
        self.cutoff = Rational(cutoff)
        self.name = name
        self._act_cache: Dict[tuple, Vec] = {}

    # -- grading -------------------------------------------------------------
    def min_weight(self) -> Fraction:
        raise NotImplementedError

    def level_offsets(self) -> List[Fraction]:
        """Distinct lowest weights of the integer-spaced strands of the module."""
        return [self.min_weight()]

    def basis(self, weight) -> List[Hashable]:
        raise NotImplementedError

    def weight_of(self, key) -> Fraction:
        raise NotImplementedError

    def label(self, key) -> str:
        return str(key)

    def weights(self, cutoff=None) -> List[Fraction]:
        top = self.cutoff if cutoff is None else Rational(cutoff)
        out = set()
        for base in self.level_offsets():
            w = base
            while w <= top:
                if self.basis(w):
                    out.add(w)
                w += 1
        return sorted(out)

    def basis_upto(self, cutoff=None) -> List[Hashable]:
        return [k for w in self.weights(cutoff) for k in self.basis(w)]

    def dim(self, weight) -> int:
        return len(self.basis(weight))

    # -- actions ---------------------------------------------------------------
    def gen_act(self, gen: str, n: int, key) -> Vec:
        raise NotImplementedError

    def gen_act_vec(self, gen: str, n: int, vec: Vec) -> Vec:
        out: Vec = {}
        for k, c in vec.items():
            vec_add(out, self.gen_act(gen, n, k), c)
        return out

    def act(self, v, n: int, key) -> Vec:
        """``v_(n) key`` for a VOA basis vector ``v`` and a module basis vector."""
        ck = (v, n, key)
        hit = self._act_cache.get(ck)
        if hit is not None:
            return hit
        res = self._compute_act(v, n, key)
        self._act_cache[ck] = res
        return res

    def _compute_act(self, v, n: int, key) -> Vec:
        voa = self.voa
        if v == voa.vacuum:
            return {key: ONE} if n == -1 else {}
        gen, p, rest = voa.decompose(v)
        if p == -1 and rest == {voa.vacuum: ONE}:
            return self.gen_act(gen, n, key)
        wg = voa.gen_weight(gen)
        wr = voa.weight_of(v) - wg + p + 1
        wu = self.weight_of(key)
        floor_w = self.min_weight()
        out: Vec = {}
        j = 0
        while not (p >= 0 and j > p):
            if wr + wu - (n + j) - 1 < floor_w:
                break
            c = sgn(j) * binom(p, j)
            inner = self.act_vec(rest, n + j, {key: ONE})
            if inner:
                vec_add(out, self.gen_act_vec(gen, p - j, inner), c)
            j += 1
        sign = -(sgn(p))
        j = 0
        while not (p >= 0 and j > p):
            if wg + wu - j - 1 < floor_w:
                break
            c = sign * sgn(j) * binom(p, j)
            inner = self.gen_act(gen, j, key)
            if inner:
                vec_add(out, self.act_vec(rest, p + n - j, inner), c)
            j += 1
        return out

    def act_vec(self, vvec: Vec, n: int, vec: Vec) -> Vec:
        """Bilinear extension of :meth:`act`."""
        out: Vec = {}
        for v, a in vvec.items():
            for k, b in vec.items():
                vec_add(out, self.act(v, n, k), a * b)
        return out

    # -- derived data --------------------------------------------------------------
    def mode_matrix(self, v: Vec, n: int, weight) -> Tuple[SparseMatrix, List, List]:
        """Matrix of ``v_(n)`` from the level ``weight`` to its target level."""
        src = self.basis(weight)
        tgt_w = Rational(weight) + self.voa.vec_weight(v) - n - 1
        tgt = self.basis(tgt_w) if tgt_w >= self.min_weight() else []
        index = {k: i for i, k in enumerate(tgt)}
        entries = []
        for j, k in enumerate(src):
            for t, c in self.act_vec(v, n, {k: ONE}).items():
                entries.append((index[t], j, c))
        return SparseMatrix(len(tgt), len(src), entries), tgt, src

    def l0_matrix(self, weight) -> SparseMatrix:
        m, _, _ = self.mode_matrix(self.voa.omega, 1, weight)
        return m

    def graded_space(self, cutoff=None):
        from .graded import GradedSpace
        top = self.cutoff if cutoff is None else Rational(cutoff)
        return GradedSpace({w: self.dim(w) for w in self.weights(top)}, top,
                           {w: [self.label(k) for k in self.basis(w)] for w in self.weights(top)})

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} cutoff={fmt_rational(self.cutoff)}>"


class VOA(Module):
    """A vertex operator algebra acting on itself.

    Attributes expected on subclasses: ``vacuum`` (basis key), ``omega`` (Vec),
    ``central_charge`` (Fraction) and ``generators`` (name -> weight).
    """

    vacuum: Hashable
    omega: Vec
    central_charge: Fraction
    generators: Dict[str, Fraction]

    def decompose(self, key) -> Tuple[str, int, Vec]:
        """Write a non-vacuum basis vector as ``gen_(p) rest``."""
        raise NotImplementedError

    def gen_weight(self, gen: str) -> Fraction:
        return self.generators[gen]

    def gen_vector(self, gen: str) -> Vec:
        """The generator itself as a vector of V."""
        raise NotImplementedError

    def vec_weight(self, v: Vec) -> Fraction:
        ws = {self.weight_of(k) for k in v}
        if len(ws) > 1:
            raise ValueError("vector is not homogeneous")
        return ws.pop() if ws else ZERO

    def L(self, n: int, vec: Vec, module: Optional[Module] = None) -> Vec:
        """Virasoro mode ``L(n) = omega_(n+1)`` on ``module`` (default: V)."""
        m = self if module is None else module
        return m.act_vec(self.omega, n + 1, vec)

    def max_generator_weight(self) -> Fraction:
        return max(self.generators.values())


def homogeneous_parts(module: Module, vec: Vec) -> Dict[Fraction, Vec]:
    parts: Dict[Fraction, Vec] = {}
    for k, c in vec.items():
        parts.setdefault(module.weight_of(k), {})[k] = c
    return parts


# --- fields ------------------------------------------------------------------------

@dataclass
class Field:
    """A mode family ``n -> End(M)`` of homogeneous weight on a module."""

    module: Module
    weight: Fraction
    label: str
    mode_fn: Callable[[int, Vec], Vec]

    def mode(self, n: int, vec: Vec) -> Vec:
        return self.mode_fn(n, vec)

    @classmethod
    def of(cls, module: Module, v: Vec, label: str = "") -> "Field":
        wt = module.voa.vec_weight(v) if v else ZERO
        return cls(module, wt, label or _vec_label(module.voa, v),
                   lambda n, x, v=v: module.act_vec(v, n, x))

    def vanishes_below(self, n: int, vec_weight: Fraction) -> bool:
        """True when ``self_(n) x`` is zero for weight reasons."""
        return self.weight + vec_weight - n - 1 < self.module.min_weight()


def _vec_label(voa: VOA, v: Vec) -> str:
    if len(v) == 1:
        (k, c), = v.items()
        return voa.label(k) if c == 1 else f"{fmt_rational(c)}*{voa.label(k)}"
    return "+".join(f"{fmt_rational(c)}*{voa.label(k)}" for k, c in v.items())


def _hom_weight(module: Module, vec: Vec) -> Fraction:
    ws = {module.weight_of(k) for k in vec}
    return max(ws) if ws else module.min_weight()


def normal_product(a: Field, n: int, b: Field) -> Field:
    """The n-th product ``a *_n b`` of two fields on the same module."""
    if a.module is not b.module:
        raise ValueError("fields act on different modules")
    module = a.module

    def mode_fn(m: int, vec: Vec) -> Vec:
        out: Vec = {}
        for key, coeff in vec.items():
            wx = module.weight_of(key)
            x = {key: coeff}
            h = 0
            while not (n >= 0 and h > n):
                if b.vanishes_below(m + h, wx):
                    break
                c = sgn(h) * binom(n, h)
                inner = b.mode(m + h, x)
                if inner:
                    vec_add(out, a.mode(n - h, inner), c)
                h += 1
            sign = -(sgn(n))
            h = 0
            while not (n >= 0 and h > n):
                if a.vanishes_below(h, wx):
                    break
                c = sign * sgn(h) * binom(n, h)
                inner = a.mode(h, x)
                if inner:
                    vec_add(out, b.mode(n + m - h, inner), c)
                h += 1
        return out

    return Field(module, a.weight + b.weight - n - 1, f"({a.label})*_{n}({b.label})", mode_fn)


def field_difference_on(module: Module, f: Field, g: Field, modes: Iterable[int], cutoff) -> Optional[tuple]:
    """First (n, key, residual) where ``f_n`` and ``g_n`` differ on basis vectors up to cutoff."""
    for n in modes:
        for key in module.basis_upto(cutoff):
            tgt = f.weight + module.weight_of(key) - n - 1
            if tgt > Rational(cutoff):
                continue
            r = vec_sub(f.mode(n, {key: ONE}), g.mode(n, {key: ONE}))
            if r:
                return n, key, r
    return None


def locality_order(a: Field, b: Field, bound: int = 8, cutoff=None) -> int:
    """Smallest N with ``(z - x)^N [a(z), b(x)] = 0`` on all in-window coefficients.

    Coefficientwise: sum_j (-1)^j C(N, j) [a_(m+N-j), b_(k+j)] = 0.
    """
    module = a.module
    top = module.cutoff if cutoff is None else Rational(cutoff)
    floor_w = module.min_weight()
    keys = module.basis_upto(top)
    # brackets are cached per (m, k, key) since every N reuses them
    cache: Dict[tuple, Vec] = {}

    def bracket(m, k, key):
        ck = (m, k, key)
        if ck not in cache:
            x = {key: ONE}
            cache[ck] = vec_sub(a.mode(m, b.mode(k, x)), b.mode(k, a.mode(m, x)))
        return cache[ck]

    for N in range(bound + 1):
        ok = True
        for key in keys:
            wx = module.weight_of(key)
            k_lo = _ceil(b.weight + wx - 1 - top)
            k_hi = _floor(b.weight + wx - floor_w) + 1
            m_lo = _ceil(a.weight + wx - 1 - top) - N
            m_hi = _floor(a.weight + wx - floor_w) + 1
            for m in range(m_lo, m_hi + 1):
                for k in range(k_lo, k_hi + 1):
                    out_w = a.weight + b.weight + wx - m - k - N - 2
                    if out_w > top or out_w < floor_w:
                        continue
                    if not _bracket_window(a, b, wx, m, k, N, top):
                        continue
                    acc: Vec = {}
                    for j in range(N + 1):
                        vec_add(acc, bracket(m + N - j, k + j, key), sgn(j) * binom(N, j))
                    if acc:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return N
    raise BoundExceeded(bound)


def _bracket_window(a: Field, b: Field, wx, m, k, N, top) -> bool:
    for j in range(N + 1):
        if b.weight + wx - (k + j) - 1 > top or a.weight + wx - (m + N - j) - 1 > top:
            return False
    return True


# --- identity residuals --------------------------------------------------------------

def _check_window(weights: Iterable[Tuple[Fraction, Fraction]]):
    for w, top in weights:
        if w > top:
            raise OutOfWindow(f"intermediate weight {fmt_rational(w)} exceeds cutoff {fmt_rational(top)}")


def borcherds_residual(module: Module, v, w, u, p: int, q: int, n: int, cutoff=None) -> Vec:
    """LHS - RHS of the Borcherds identity for V-basis v, w and module basis u."""
    voa = module.voa
    top = module.cutoff if cutoff is None else Rational(cutoff)
    vtop = voa.cutoff
    a, b, c = voa.weight_of(v), voa.weight_of(w), module.weight_of(u)
    _check_window([(a + b - p - 1, vtop), (b + c - n - 1, top), (a + c - q - 1, top),
                   (a + b + c - p - q - n - 2, top)])
    x = {u: ONE}
    floor_w = module.min_weight()
    lhs: Vec = {}
    # v_(p+i) w vanishes once its weight drops below 0
    i_max = _floor(a + b - p - 1)
    if q >= 0:
        i_max = min(i_max, q)
    for i in range(i_max + 1):
        co = binom(q, i)
        vw = voa.act(v, p + i, w)
        if vw:
            vec_add(lhs, module.act_vec(vw, q + n - i, x), co)
    rhs: Vec = {}
    sp = sgn(p)
    i_w = _floor(b + c - n - 1 - floor_w)
    i_v = _floor(a + c - q - 1 - floor_w)
    if p >= 0:
        i_w, i_v = min(i_w, p), min(i_v, p)
    vv = {v: ONE}
    ww = {w: ONE}
    for i in range(i_w + 1):
        inner = module.act(w, n + i, u)
        if inner:
            vec_add(rhs, module.act_vec(vv, p + q - i, inner), sgn(i) * binom(p, i))
    for i in range(i_v + 1):
        inner = module.act(v, q + i, u)
        if inner:
            vec_add(rhs, module.act_vec(ww, p + n - i, inner), -sp * sgn(i) * binom(p, i))
    return vec_sub(lhs, rhs)


def commutator_expansion(module: Module, v, w, m: int, n: int, u, cutoff=None) -> Vec:
    """``[v_m, w_n] u - sum_i C(m, i) (v_i w)_(m+n-i) u``."""
    voa = module.voa
    top = module.cutoff if cutoff is None else Rational(cutoff)
    a, b, c = voa.weight_of(v), voa.weight_of(w), module.weight_of(u)
    _check_window([(b + c - n - 1, top), (a + c - m - 1, top), (a + b + c - m - n - 2, top),
                   (a + b - 1, voa.cutoff)])
    x = {u: ONE}
    lhs = vec_sub(module.act_vec({v: ONE}, m, module.act(w, n, u)),
                  module.act_vec({w: ONE}, n, module.act(v, m, u)))
    rhs: Vec = {}
    i = 0
    while a + b - i - 1 >= 0:
        co = binom(m, i)
        if m >= 0 and i > m:
            break
        if co:
            vw = voa.act(v, i, w)
            if vw:
                vec_add(rhs, module.act_vec(vw, m + n - i, x), co)
        i += 1
    return vec_sub(lhs, rhs)


def associativity_residual(module: Module, v, w, n: int, m: int, u, cutoff=None) -> Vec:
    """Condition 4 for n >= 0 in mode form:
    ``(v_n w)_m u - sum_j (-1)^j C(n,j) (v_(n-j) w_(m+j) - (-1)^n w_(n+m-j) v_j) u``."""
    if n < 0:
        raise ValueError("associativity is checked for n >= 0 only")
    voa = module.voa
    top = module.cutoff if cutoff is None else Rational(cutoff)
    a, b, c = voa.weight_of(v), voa.weight_of(w), module.weight_of(u)
    _check_window([(a + b - n - 1, voa.cutoff), (b + c - m - 1, top), (a + b + c - n - m - 2, top),
                   (a + c - 1, top)])
    lhs = module.act_vec(voa.act(v, n, w), m, {u: ONE})
    rhs: Vec = {}
    for j in range(n + 1):
        co = sgn(j) * binom(n, j)
        vec_add(rhs, module.act_vec({v: ONE}, n - j, module.act(w, m + j, u)), co)
        vec_add(rhs, module.act_vec({w: ONE}, n + m - j, module.act(v, j, u)), -co * sgn(n))
    return vec_sub(lhs, rhs)


def derivative_residual(module: Module, v, n: int, u) -> Vec:
    """``(L(-1) v)_n u + n v_(n-1) u``."""
    voa = module.voa
    lv = voa.L(-1, {v: ONE})
    return vec_add(module.act_vec(lv, n, {u: ONE}), module.act(v, n - 1, u), Rational(n))


def virasoro_residual(module: Module, m: int, n: int, u) -> Vec:
    """``[L_m, L_n] u - (m-n) L_(m+n) u - c/12 (m^3-m) delta u``."""
    voa = module.voa
    x = {u: ONE}
    L = lambda k, y: voa.L(k, y, module)
    res = vec_sub(L(m, L(n, x)), L(n, L(m, x)))
    vec_add(res, L(m + n, x), -Rational(m - n))
    if m + n == 0:
        vec_add(res, x, -voa.central_charge * Rational(m ** 3 - m, 12))
    return res


def derived_bracket(voa: VOA, v, w, m: int, n: int) -> Dict[tuple, Fraction]:
    """The formal bracket ``[v_(m), w_(n)] = sum_i C(m,i) (v_i w)_(m+n-i)`` from structure constants.

    Terms whose field is a derivative of the vacuum or of a generator are
    rewritten as generator modes (``("id",)`` or ``(gen, k)``); anything else
    stays as ``(label, k)``.
    """
    out: Dict[tuple, Fraction] = {}
    i = 0
    a, b = voa.weight_of(v), voa.weight_of(w)
    while a + b - i - 1 >= 0 and not (m >= 0 and i > m):
        co = binom(m, i)
        if co:
            for key, c in voa.act(v, i, w).items():
                for term, d in _reduce_mode(voa, key, m + n - i).items():
                    out[term] = out.get(term, ZERO) + co * c * d
        i += 1
    return {t: c for t, c in out.items() if c}


def _reduce_mode(voa: VOA, key, k: int) -> Dict[tuple, Fraction]:
    if key == voa.vacuum:
        return {("id",): ONE} if k == -1 else {}
    gen, p, rest = voa.decompose(key)
    if rest == {voa.vacuum: ONE} and p <= -1:
        # gen_(-j-1) 1 is the j-th divided derivative of gen's field
        j = -p - 1
        co = sgn(j) * binom(k, j)
        return {(gen, k - j): Rational(co)} if co else {}
    return {(voa.label(key), k): ONE}


# --- instance enumeration and the axiom report -----------------------------------------

@dataclass
class CheckResult:
    check: str
    descriptor: str
    residual: Vec
    module: Module = field(repr=False, default=None)

    @property
    def zero(self) -> bool:
        return not self.residual


def _triples(voa: VOA, module: Module, vcut, mcut):
    vkeys = voa.basis_upto(vcut)
    mkeys = module.basis_upto(mcut)
    for v in vkeys:
        for w in vkeys:
            for u in mkeys:
                yield v, w, u


def borcherds_instances(voa: VOA, module: Module, budget, cutoff=None) -> Iterator[Tuple[tuple, bool]]:
    """All in-window Borcherds parameter tuples ``(v, w, u, p, q, n)``.

    The flag says whether the instance lies inside the exhaustive weight budget.
    """
    top = module.cutoff if cutoff is None else Rational(cutoff)
    vtop = voa.cutoff
    h = module.min_weight()
    budget = Rational(budget)
    vkeys = [(v, voa.weight_of(v)) for v in voa.basis_upto(vtop)]
    mkeys = [(u, module.weight_of(u)) for u in module.basis_upto(top)]
    for v, a in vkeys:
        for w, b in vkeys:
            p_lo, p_hi = _ceil(a + b - 1 - vtop), _floor(a + b)
            for u, c in mkeys:
                inside = a + b + c <= budget
                q_lo, q_hi = _ceil(a + c - 1 - top), _floor(a + c - h)
                n_lo, n_hi = _ceil(b + c - 1 - top), _floor(b + c - h)
                # final weight a+b+c-2-p-q-n must lie in [h, top]
                s_lo, s_hi = _ceil(a + b + c - 2 - top), _floor(a + b + c - 2 - h)
                for p in range(p_lo, p_hi + 1):
                    for q in range(q_lo, q_hi + 1):
                        lo = max(n_lo, s_lo - p - q)
                        hi = min(n_hi, s_hi - p - q)
                        for n in range(lo, hi + 1):
                            yield (v, w, u, p, q, n), inside


def _desc(module: Module, kind: str, **kw) -> str:
    voa = module.voa
    parts = [kind]
    for name, val in kw.items():
        if name in ("v", "w"):
            parts.append(f"{name}={voa.label(val)}")
        elif name == "u":
            parts.append(f"u={module.label(val)}")
        else:
            parts.append(f"{name}={val}")
    return ";".join(parts)


def check_module_axioms(module: Module, budget=6, samples: int = 200, seed: int = 0,
                        cutoff=None, checks: Sequence[str] = ("vacuum", "derivative", "commutativity",
                                                              "associativity", "borcherds", "virasoro"),
                        ):
    """Vacuum, L(-1)-derivative, commutativity, associativity, Borcherds and Virasoro checks.

    Every in-window instance whose input weights sum to at most ``budget`` is
    checked; above the budget ``samples`` instances per check are drawn with a
    seeded generator.
    """
    from .report import Report

    voa = module.voa
    top = module.cutoff if cutoff is None else Rational(cutoff)
    rng = random.Random(seed)
    report = Report(f"module axioms: {module.name}")
    budget = Rational(budget)

    # sampling helper keeps instance order deterministic
    def sample(instances):
        # exhaustive inside the budget, reservoir sample of fixed size above it
        inside, reservoir = [], []
        seen = 0
        for params, flag in instances:
            if flag:
                inside.append(params)
                continue
            if seen < samples:
                reservoir.append((seen, params))
            else:
                j = rng.randrange(seen + 1)
                if j < samples:
                    reservoir[j] = (seen, params)
            seen += 1
        return inside + [params for _, params in sorted(reservoir, key=lambda t: t[0])]

    def execute(kind, params_list, fn):
        for params in params_list:
            try:
                res, desc = fn(params)
            except OutOfWindow:
                report.skipped += 1
                continue
            report.add(kind, desc, res, module)

    vkeys = voa.basis_upto(voa.cutoff)
    mkeys = module.basis_upto(top)
    h = module.min_weight()

    if "vacuum" in checks:
        inst = [((u, n), module.weight_of(u) <= budget) for u in mkeys for n in range(-3, 3)]
        execute("vacuum", sample(inst), lambda t: (
            vec_sub(module.act(voa.vacuum, t[1], t[0]), {t[0]: ONE} if t[1] == -1 else {}),
            _desc(module, "vacuum", u=t[0], n=t[1])))

    if "derivative" in checks:
        inst = []
        for v in vkeys:
            a = voa.weight_of(v)
            if a + 1 > voa.cutoff:
                continue
            for u in mkeys:
                c = module.weight_of(u)
                for n in range(_ceil(a + c - top), _floor(a + c + 1 - h) + 1):
                    inst.append(((v, n, u), a + c <= budget))
        execute("derivative", sample(inst), lambda t: (
            derivative_residual(module, t[0], t[1], t[2]), _desc(module, "derivative", v=t[0], n=t[1], u=t[2])))

    if "commutativity" in checks:
        inst = []
        for v in vkeys:
            a = voa.weight_of(v)
            for w in vkeys:
                b = voa.weight_of(w)
                for u in mkeys:
                    c = module.weight_of(u)
                    for m in range(_ceil(a + c - 1 - top), _floor(a + c - h) + 1):
                        for n in range(_ceil(b + c - 1 - top), _floor(b + c - h) + 1):
                            f = a + b + c - m - n - 2
                            if h <= f <= top:
                                inst.append(((v, w, m, n, u), a + b + c <= budget))
        execute("commutativity", sample(inst), lambda t: (
            commutator_expansion(module, *t, cutoff=top),
            _desc(module, "commutativity", v=t[0], w=t[1], m=t[2], n=t[3], u=t[4])))

    if "associativity" in checks:
        inst = []
        for v in vkeys:
            a = voa.weight_of(v)
            for w in vkeys:
                b = voa.weight_of(w)
                for n in range(0, _floor(a + b - 1) + 2):
                    if a + b - n - 1 > voa.cutoff:
                        continue
                    for u in mkeys:
                        c = module.weight_of(u)
                        for m in range(_ceil(a + b + c - n - 2 - top), _floor(a + b + c - n - 2 - h) + 1):
                            inst.append(((v, w, n, m, u), a + b + c <= budget))
        execute("associativity", sample(inst), lambda t: (
            associativity_residual(module, *t, cutoff=top),
            _desc(module, "associativity", v=t[0], w=t[1], n=t[2], m=t[3], u=t[4])))

    if "borcherds" in checks:
        execute("borcherds", sample(borcherds_instances(voa, module, budget, top)), lambda t: (
            borcherds_residual(module, *t, cutoff=top),
            _desc(module, "borcherds", v=t[0], w=t[1], u=t[2], p=t[3], q=t[4], n=t[5])))

    if "virasoro" in checks and voa.omega:
        inst = []
        for u in mkeys:
            c = module.weight_of(u)
            for m in range(-3, 4):
                for n in range(-3, 4):
                    if c - m - n <= top and c - n <= top and c - m <= top:
                        inst.append(((m, n, u), c <= budget))
        execute("virasoro", sample(inst), lambda t: (
            virasoro_residual(module, *t), _desc(module, "virasoro", m=t[0], n=t[1], u=t[2])))
    return report

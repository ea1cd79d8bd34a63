"""Explicit module extensions R = q_(-1)T + M built from donor data.

Donor data: modules T and M, a source module S (elements of the form v_i q,
i >= 0, live there), the table (v, i) -> v_i q in S, and a log-free family I
of type (S, T -> M).  The action on R is

    v^R_n (q_(-1) t) = q_(-1)(v_n t) + sum_{i>=0} C(n, i) (v_i q)^I_(n-1-i) t,
    v^R_n m          = v_n m            (m in M),

and the verifiers below check, instance by instance, the identities that
make R a module and produce the field q(z) and the intertwiner J.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .intertwiner import (Descendant, LogIntertwiner, ModeFamily, NotNilpotent, check_axioms, nilpotency_order,
                          reconstruct)
from .findim import check_exact
from .linalg import ONE, ZERO, Rational, SparseMatrix, Vec, fmt_rational, parse_rational, vec_add, vec_scale, vec_sub
from .modes import (BoundExceeded, Field, Module, OutOfWindow, _ceil, _floor, binom, borcherds_residual,
                    normal_product, sgn)
from .report import Entry, Report


class InvalidDonor(ValueError):
    def __init__(self, report: Report):
        bad = report.failures
        first = bad[0].descriptor if bad else "?"
        super().__init__(f"donor intertwiner fails its axioms ({len(bad)} instances, first {first})")
        self.report = report


class NonCommutingMode(ValueError):
    def __init__(self, descriptor: str, report: Report):
        super().__init__(f"(L(-1)q)^I_0 does not commute with the V-action at {descriptor}")
        self.descriptor = descriptor
        self.report = report


class TableFamily(ModeFamily):
    """A log-free family stored as a finite table; reads outside the window raise OutOfWindow.

    While ``recording`` is set, every read is appended to ``log``; the
    verifiers drop the reads of instances they skip, so the log lists the
    entries that completed instances depend on (the mutation candidates).
    """

    def __init__(self, W, U, T, table: Dict[tuple, Vec], cutoffs: Tuple, name: str = "I"):
        super().__init__(W, U, T, name)
        self.table = table
        self.cutoffs = tuple(Rational(c) for c in cutoffs)
        self.recording = False
        self.log: List[tuple] = []

    def _compute(self, w, r, u) -> Vec:
        cw, cu, ct = self.cutoffs
        if self.W.weight_of(w) > cw or self.U.weight_of(u) > cu or self.target_weight(w, r, u) > ct:
            raise OutOfWindow("donor mode outside the tabulated window")
        return self.table.get((w, r, u), {})

    def __call__(self, w, r, u) -> Vec:
        hit = super().__call__(w, r, u)
        if self.recording and self.target_weight(w, r, u) >= self.T.min_weight():
            self.log.append((w, Rational(r), u))
        return hit

    @classmethod
    def tabulate(cls, family: ModeFamily, cutoffs: Tuple, name: str = "I") -> "TableFamily":
        cw, cu, ct = (Rational(c) for c in cutoffs)
        table: Dict[tuple, Vec] = {}
        tws = family.T.weights(ct)
        for w in family.W.basis_upto(cw):
            a = family.W.weight_of(w)
            for u in family.U.basis_upto(cu):
                b = family.U.weight_of(u)
                for t in tws:
                    r = a + b - t - 1
                    img = family(w, r, u)
                    if img:
                        table[(w, r, u)] = dict(img)
        return cls(family.W, family.U, family.T, table, (cw, cu, ct), name)

    def mutated(self, key: tuple, target, delta=1) -> "TableFamily":
        table = {k: dict(v) for k, v in self.table.items()}
        entry = table.setdefault(key, {})
        entry[target] = entry.get(target, ZERO) + Rational(delta)
        if not entry[target]:
            del entry[target]
        return TableFamily(self.W, self.U, self.T, table, self.cutoffs, f"{self.name}'")


class ZeroFamily(ModeFamily):
    def _compute(self, w, r, u) -> Vec:
        return {}


@dataclass
class ExtensionInput:
    voa: Module
    t_module: Module
    donor: Module
    source: Module
    i_op: ModeFamily
    q_weight: Rational
    q_table: Callable[[Hashable, int], Vec]
    name: str = "R"

    def q_support(self, v) -> int:
        """Largest i for which v_i q can be nonzero (weight bound)."""
        return _floor(self.voa.weight_of(v) + self.q_weight - 1 - self.source.min_weight())

    def vq(self, vvec: Vec, i: int) -> Vec:
        out: Vec = {}
        for k, c in vvec.items():
            vec_add(out, self.q_table(k, i), c)
        return out

    def l_minus_one_q(self) -> Vec:
        return self.vq(self.voa.omega, 0)


def validate_donor(inp: ExtensionInput, samples: int = 200, seed: int = 0) -> Report:
    """Jacobi identity for I (it need not satisfy the L(-1)-derivative) plus nilpotency."""
    y = _AsIntertwiner(inp.i_op)
    rep = check_axioms(y, samples=samples, seed=seed,
                       checks=("truncation", "degree", "commutativity", "associativity", "borcherds"))
    rep.title = f"donor {inp.i_op.name}"
    try:
        k = nilpotency_order(inp.i_op)
        rep.add_bool("nilpotent", f"nilpotent;order={k}", True)
    except BoundExceeded as exc:
        rep.add_bool("nilpotent", "nilpotent", False, f"not nilpotent up to {exc.bound}")
    return rep


class _AsIntertwiner(LogIntertwiner):
    def __init__(self, fam: ModeFamily):
        super().__init__(fam.W, fam.U, fam.T, 0, fam.name)
        self.fam = fam

    def _mode(self, w, r, i, u) -> Vec:
        return self.fam(w, r, u) if i == 0 else {}


class ExtensionModule(Module):
    """R with basis keys ('q', t) for q_(-1)t and ('m', m) for m in M."""

    def __init__(self, inp: ExtensionInput, cutoff=None):
        self.inp = inp
        T, M = inp.t_module, inp.donor
        top = min(T.cutoff + inp.q_weight, M.cutoff) if cutoff is None else Rational(cutoff)
        super().__init__(inp.voa, top, inp.name)

    def min_weight(self):
        return min(self.inp.t_module.min_weight() + self.inp.q_weight, self.inp.donor.min_weight())

    def level_offsets(self):
        wq = self.inp.q_weight
        offs = {o + wq for o in self.inp.t_module.level_offsets()} | set(self.inp.donor.level_offsets())
        return sorted(offs)

    def basis(self, weight):
        w = Rational(weight)
        T, M = self.inp.t_module, self.inp.donor
        tw = w - self.inp.q_weight
        qs = [("q", t) for t in T.basis(tw)] if tw >= T.min_weight() else []
        ms = [("m", m) for m in M.basis(w)] if w >= M.min_weight() else []
        return qs + ms

    def weight_of(self, key):
        if key[0] == "q":
            return self.inp.t_module.weight_of(key[1]) + self.inp.q_weight
        return self.inp.donor.weight_of(key[1])

    def label(self, key) -> str:
        if key[0] == "q":
            return f"q(-1){self.inp.t_module.label(key[1])}"
        return self.inp.donor.label(key[1])

    # -- embeddings -----------------------------------------------------------------
    @staticmethod
    def embed_q(tvec: Vec) -> Vec:
        return {("q", k): c for k, c in tvec.items()}

    @staticmethod
    def embed_m(mvec: Vec) -> Vec:
        return {("m", k): c for k, c in mvec.items()}

    @staticmethod
    def q_part(vec: Vec) -> Vec:
        return {k[1]: c for k, c in vec.items() if k[0] == "q"}

    @staticmethod
    def m_part(vec: Vec) -> Vec:
        return {k[1]: c for k, c in vec.items() if k[0] == "m"}

    # -- action -----------------------------------------------------------------------
    def gen_act(self, gen, n, key) -> Vec:
        return self.act_vec(self.voa.gen_vector(gen), n, {key: ONE})

    def _compute_act(self, v, n: int, key) -> Vec:
        inp = self.inp
        kind, x = key
        if kind == "m":
            return self.embed_m(inp.donor.act(v, n, x))
        out = self.embed_q(inp.t_module.act(v, n, x))
        for i in range(0, inp.q_support(v) + 1):
            c = binom(n, i)
            if not c:
                continue
            vq = inp.q_table(v, i)
            if vq:
                vec_add(out, self.embed_m(inp.i_op.on_vec(vq, n - 1 - i, x)), c)
        return out

    def q_keys(self, cutoff=None) -> List[tuple]:
        top = self.cutoff if cutoff is None else Rational(cutoff)
        return [("q", t) for t in self.inp.t_module.basis_upto(top - self.inp.q_weight)]


def build_extension(inp: ExtensionInput, cutoff=None, validate: bool = True, samples: int = 200) -> ExtensionModule:
    """R for the donor data; with ``validate`` the donor family is checked first (InvalidDonor)."""
    if validate:
        rep = validate_donor(inp, samples=samples)
        if not rep.passed:
            raise InvalidDonor(rep)
    return ExtensionModule(inp, cutoff)


# --- instance enumeration -------------------------------------------------------------------

def _sample(items: List, limit: Optional[int], rng: random.Random) -> List:
    if limit is None or len(items) <= limit:
        return items
    idx = sorted(rng.sample(range(len(items)), limit))
    return [items[i] for i in idx]


def _mode_range(wv, wx, h, top) -> range:
    """n with wv + wx - n - 1 in [h, top]."""
    return range(_ceil(wv + wx - 1 - top), _floor(wv + wx - 1 - h) + 1)


def _desc(R: ExtensionModule, kind: str, **kw) -> str:
    voa = R.voa
    parts = [kind]
    for name, val in kw.items():
        if name in ("u", "v", "a"):
            parts.append(f"{name}={voa.label(val)}")
        elif name == "t":
            parts.append(f"t={R.label(val)}")
        else:
            parts.append(f"{name}={fmt_rational(Rational(val))}")
    return ";".join(parts)


def _attempt(R: ExtensionModule, fn, *args):
    """fn(*args), or None on OutOfWindow (forgetting the donor reads it made)."""
    log = getattr(R.inp.i_op, "log", None)
    mark = len(log) if log is not None else 0
    try:
        return fn(*args)
    except OutOfWindow:
        if log is not None:
            del log[mark:]
        return None


def _run(rep: Report, R: ExtensionModule, kind: str, items, fn):
    for params in items:
        got = _attempt(R, fn, *params)
        if got is None:
            rep.skipped += 1
            continue
        res, desc = got
        rep.add(kind, desc, res, R)


def verify_commutativity(R: ExtensionModule, samples: Optional[int] = 400, seed: int = 0) -> Report:
    """[u^R_m, v^R_n](q_(-1)t) = sum_j C(m, j) (u_j v)^R_(m+n-j) (q_(-1)t)."""
    voa, top, h = R.voa, R.cutoff, R.min_weight()
    rng = random.Random(seed)
    vkeys = voa.basis_upto()
    items = []
    for t in R.q_keys():
        c = R.weight_of(t)
        for u in vkeys:
            a = voa.weight_of(u)
            for v in vkeys:
                b = voa.weight_of(v)
                for m in _mode_range(a, c, h, top):
                    for n in _mode_range(b, c, h, top):
                        if h <= a + b + c - m - n - 2 <= top:
                            items.append((u, v, m, n, t))

    def one(u, v, m, n, t):
        x = {t: ONE}
        lhs = vec_sub(R.act_vec({u: ONE}, m, R.act(v, n, t)), R.act_vec({v: ONE}, n, R.act(u, m, t)))
        rhs: Vec = {}
        j = 0
        while voa.weight_of(u) + voa.weight_of(v) - j - 1 >= voa.min_weight():
            if m >= 0 and j > m:
                break
            uv = voa.act(u, j, v)
            if uv:
                vec_add(rhs, R.act_vec(uv, m + n - j, x), binom(m, j))
            j += 1
        return vec_sub(lhs, rhs), _desc(R, "commutativity", u=u, v=v, m=m, n=n, t=t)

    rep = Report(f"commutativity on {R.name}")
    _run(rep, R, "commutativity", _sample(items, samples, rng), one)
    return rep


def verify_translation(R: ExtensionModule, samples: Optional[int] = 400, seed: int = 0) -> Report:
    """(omega_0 v)^R_n (q_(-1)t) = -n v^R_(n-1) (q_(-1)t)."""
    voa, top, h = R.voa, R.cutoff, R.min_weight()
    rng = random.Random(seed)
    items = []
    for t in R.q_keys():
        c = R.weight_of(t)
        for v in voa.basis_upto():
            b = voa.weight_of(v)
            for n in _mode_range(b + 1, c, h, top):
                items.append((v, n, t))

    def one(v, n, t):
        lv = voa.act_vec(voa.omega, 0, {v: ONE})
        res = R.act_vec(lv, n, {t: ONE})
        vec_add(res, R.act(v, n - 1, t), n)
        return res, _desc(R, "translation", v=v, n=n, t=t)

    rep = Report(f"translation on {R.name}")
    _run(rep, R, "translation", _sample(items, samples, rng), one)
    return rep


def _assoc_items(R: ExtensionModule):
    voa, top, h = R.voa, R.cutoff, R.min_weight()
    vkeys = voa.basis_upto()
    for t in R.q_keys():
        c = R.weight_of(t)
        for v in vkeys:
            a = voa.weight_of(v)
            for u in vkeys:
                b = voa.weight_of(u)
                for n in range(_ceil(a + b - 1 - voa.cutoff), _floor(a + b - 1 - voa.min_weight()) + 1):
                    for m in _mode_range(a + b - n - 1, c, h, top):
                        if m >= 0:
                            yield v, u, n, m, t


def associativity_residual(R: ExtensionModule, v, u, n: int, m: int, t) -> Vec:
    """(v *_n u)^R_m (q_(-1)t) - (v_n u)^R_m (q_(-1)t) with *_n the normal product of fields."""
    fv, fu = Field.of(R, {v: ONE}), Field.of(R, {u: ONE})
    x = {t: ONE}
    lhs = normal_product(fv, n, fu).mode(m, x)
    rhs = R.act_vec(R.voa.act(v, n, u), m, x)
    return vec_sub(lhs, rhs)


def verify_associativity(R: ExtensionModule, samples: Optional[int] = 400, seed: int = 0) -> Report:
    rng = random.Random(seed)
    items = list(_assoc_items(R))

    def one(v, u, n, m, t):
        return associativity_residual(R, v, u, n, m, t), _desc(R, "associativity", v=v, u=u, n=n, m=m, t=t)

    rep = Report(f"associativity on {R.name}")
    _run(rep, R, "associativity", _sample(items, samples, rng), one)
    return rep


def associativity_oracle(R: ExtensionModule, samples: Optional[int] = 200, seed: int = 0) -> Report:
    """For n >= 0 the associativity residual vanishes iff the Jacobi residual with q = 0 does."""
    rng = random.Random(seed)
    items = [p for p in _assoc_items(R) if p[2] >= 0]
    rep = Report(f"associativity vs Jacobi on {R.name}")

    def one(v, u, n, m, t):
        a = associativity_residual(R, v, u, n, m, t)
        b = borcherds_residual(R, v, u, t, n, 0, m)
        ok = (not a) == (not b)
        return ({} if ok else {"disagree": ONE}), _desc(R, "oracle", v=v, u=u, n=n, m=m, t=t)

    for params in _sample(items, samples, rng):
        got = _attempt(R, one, *params)
        if got is None:
            rep.skipped += 1
            continue
        res, desc = got
        rep.add_bool("oracle", desc, not res, "associativity and Jacobi residuals disagree")
    return rep


def verify_submodule(R: ExtensionModule, samples: Optional[int] = 400, seed: int = 0) -> Report:
    """M is stable, R -> T intertwines, and dim R_w = dim T_(w - wt q) + dim M_w."""
    inp = R.inp
    voa, top, h = R.voa, R.cutoff, R.min_weight()
    rng = random.Random(seed)
    rep = Report(f"exactness skeleton of {R.name}")
    for w in R.weights():
        rb = R.basis(w)
        mb = inp.donor.basis(w) if w >= inp.donor.min_weight() else []
        tw = w - inp.q_weight
        tb = inp.t_module.basis(tw) if tw >= inp.t_module.min_weight() else []
        ri = {k: i for i, k in enumerate(rb)}
        ti = {k: i for i, k in enumerate(tb)}
        inc = SparseMatrix(len(rb), len(mb), [(ri[("m", k)], j, ONE) for j, k in enumerate(mb)])
        proj = SparseMatrix(len(tb), len(rb), [(ti[k[1]], j, ONE) for j, k in enumerate(rb) if k[0] == "q"])
        ex = check_exact([len(mb), len(rb), len(tb)], [inc, proj], f"0 -> M -> R -> T -> 0 at {fmt_rational(w)}")
        rep.entries.extend(Entry(e.check, f"{e.descriptor};w={fmt_rational(w)}", e.residual) for e in ex.entries)
    items = []
    for key in R.basis_upto():
        c = R.weight_of(key)
        for v in voa.basis_upto():
            for n in _mode_range(voa.weight_of(v), c, h, top):
                items.append((v, n, key))

    def one(v, n, key):
        img = R.act(v, n, key)
        if key[0] == "m":
            return R.q_part(img), "m-stable"
        return vec_sub(R.q_part(img), inp.t_module.act(v, n, key[1])), "quotient"

    for v, n, key in _sample(items, samples, rng):
        got = _attempt(R, one, v, n, key)
        if got is None:
            rep.skipped += 1
            continue
        res, kind = got
        rep.add(kind, _desc(R, kind, v=v, n=n, t=key), res, inp.t_module)
    return rep


# --- the field q(z) ----------------------------------------------------------------------

@dataclass
class QField:
    """q(x) t = sum_m Q_m t x^(-m): Q_0 t = q_(-1)t and Q_m = -(1/m) (L(-1)q)^I_m for m != 0."""

    R: ExtensionModule
    lq: Vec
    certificate: Report

    def Q(self, m, t) -> Vec:
        m = Rational(m)
        if m == 0:
            return {("q", t): ONE}
        inp = self.R.inp
        return vec_scale(self.R.embed_m(inp.i_op.on_vec(self.lq, m, t)), -ONE / m)

    def Q_vec(self, m, tvec: Vec) -> Vec:
        out: Vec = {}
        for t, c in tvec.items():
            vec_add(out, self.Q(m, t), c)
        return out

    def mode(self, k, t) -> Vec:
        """Coefficient of x^(-k-1)."""
        return self.Q(Rational(k) + 1, t)


def build_q_field(R: ExtensionModule, samples: Optional[int] = 400, seed: int = 0) -> QField:
    """Assemble q(z) and certify that (L(-1)q)^I_0 commutes with every in-window v_n.

    Raises :class:`NonCommutingMode` with the first failing instance.
    """
    inp = R.inp
    T, M, I = inp.t_module, inp.donor, inp.i_op
    voa = R.voa
    lq = inp.l_minus_one_q()
    rng = random.Random(seed)
    rep = Report(f"commutant certificate on {R.name}")
    items = []
    for t in T.basis_upto(R.cutoff - inp.q_weight):
        c = T.weight_of(t)
        for v in voa.basis_upto():
            for n in _mode_range(voa.weight_of(v), c + inp.q_weight, R.min_weight(), R.cutoff):
                items.append((v, n, t))
    def one(v, n, t):
        lhs = M.act_vec({v: ONE}, n, I.on_vec(lq, ZERO, t))
        rhs: Vec = {}
        for x, a in T.act(v, n, t).items():
            vec_add(rhs, I.on_vec(lq, ZERO, x), a)
        return vec_sub(lhs, rhs)

    for v, n, t in _sample(items, samples, rng):
        res = _attempt(R, one, v, n, t)
        if res is None:
            rep.skipped += 1
            continue
        rep.add("commutant", _desc(R, "commutant", v=v, n=n, t=("q", t)), res, M)
    if not rep.passed:
        raise NonCommutingMode(rep.failures[0].descriptor, rep)
    return QField(R, lq, rep)


def locality_bound(R: ExtensionModule, a: Vec) -> int:
    """N + 1 where N is the largest i with a_i q != 0 (0 when a_i q = 0 for all i >= 0)."""
    inp = R.inp
    N = -1
    for k in a:
        for i in range(inp.q_support(k), -1, -1):
            if inp.vq({k: a[k]}, i):
                N = max(N, i)
                break
    return N + 1


def verify_locality_q(qf: QField, a: Vec, bound: int = 8) -> Tuple[int, Report]:
    """Smallest k with (x - z)^k [a(z), q(x)] = 0 on all in-window coefficients.

    The coefficient of x^(-m) z^(-n-1) in (x - z)^k [a(z), q(x)] is
    sum_j (-1)^j C(k, j) [a_(n+j), Q_(m+k-j)].
    """
    R = qf.R
    inp = R.inp
    T = inp.t_module
    voa = R.voa
    wa = voa.vec_weight(a) if a else ZERO
    h, top = R.min_weight(), R.cutoff
    cache: Dict[tuple, Vec] = {}

    def bracket(n, m, t):
        key = (n, m, t)
        if key not in cache:
            x = {t: ONE}
            lhs = R.act_vec(a, n, qf.Q(m, t))
            rhs = qf.Q_vec(m, T.act_vec(a, n, x))
            cache[key] = vec_sub(lhs, rhs)
        return cache[key]

    def coefficient(n, m, k, t):
        acc: Vec = {}
        for j in range(k + 1):
            vec_add(acc, bracket(n + j, m + k - j, t), sgn(j) * binom(k, j))
        return acc

    tkeys = T.basis_upto(top - inp.q_weight)
    rep = Report(f"locality of q with {voa.label(next(iter(a))) if len(a) == 1 else 'a'} on {R.name}")
    for k in range(bound + 1):
        rep = Report(rep.title)
        for t in tkeys:
            c = T.weight_of(t) + inp.q_weight
            # final weight wa + c - n - m - k - 1 must be in [h, top]
            for m in range(_ceil(c - top) - k, _floor(c - h) + 1):
                for n in range(_ceil(wa - 1 + c - top) - k, _floor(wa - 1 + c - h) + 1):
                    f = wa + c - n - m - k - 1
                    if not (h <= f <= top):
                        continue
                    acc = _attempt(R, coefficient, n, m, k, t)
                    if acc is None:
                        rep.skipped += 1
                        continue
                    rep.add("locality", _desc(R, "locality", k=k, m=m, n=n, t=("q", t)), acc, R)
        if rep.passed:
            rep.meta["order"] = k
            rep.meta["bound"] = locality_bound(R, a)
            return k, rep
    raise BoundExceeded(bound)


# --- the intertwiner J -------------------------------------------------------------------------

def extend_j0(qf: QField, v: Vec, n: int) -> Callable[[Rational, Hashable], Vec]:
    """The family r, t -> J^(0)(v_n q)_(r) t as a function.

    J^(0)(v_n q)_(r) = sum_j (-1)^j C(n, j) [v^R_(n-j) q_(r+j) - (-1)^n q_(n+r-j) v_j].
    """
    R = qf.R
    inp = R.inp
    T = inp.t_module
    voa = R.voa
    wv = voa.vec_weight(v) if v else ZERO
    h_R, h_T = R.min_weight(), T.min_weight()

    def fn(r, t) -> Vec:
        r = Rational(r)
        c = T.weight_of(t)
        out: Vec = {}
        j = 0
        # q_(r+j) t has weight wq + c - r - j - 1
        while not (n >= 0 and j > n):
            if inp.q_weight + c - r - j - 1 < h_R:
                break
            co = sgn(j) * binom(n, j)
            inner = qf.mode(r + j, t)
            if co and inner:
                vec_add(out, R.act_vec(v, n - j, inner), co)
            j += 1
        j = 0
        while not (n >= 0 and j > n):
            if wv + c - j - 1 < h_T:
                break
            co = -sgn(n) * sgn(j) * binom(n, j)
            vt = T.act_vec(v, j, {t: ONE})
            if co and vt:
                vec_add(out, qf.Q_vec(n + r - j + 1, vt), co)
            j += 1
        return out

    return fn


def j0_intertwiner(qf: QField, P: Module, tops: Dict[Hashable, Sequence[Tuple]], name: str = "J0") -> Descendant:
    """J^(0) of type (P, T -> R).

    ``tops`` maps each generating vector of P (``P.decompose_module`` returns
    None) to a list of (coefficient, v, n) with the vector equal to
    sum coefficient * v_n q.
    """
    fams = {w: [(Rational(c), extend_j0(qf, v, n)) for c, v, n in terms] for w, terms in tops.items()}

    def top(w, r, i, u):
        if i:
            return {}
        if w not in fams:
            raise KeyError(f"no expression for generating vector {P.label(w)}")
        out: Vec = {}
        for c, fn in fams[w]:
            vec_add(out, fn(r, u), c)
        return out

    return Descendant(P, qf.R.inp.t_module, qf.R, 0, top, name)


def build_j(qf: QField, P: Module, tops, bound: int = 6) -> LogIntertwiner:
    """J = sum_i (1/i!) (z L(-1) - z d/dz)^i J^(0) log^i z; NotNilpotent propagates."""
    j0 = j0_intertwiner(qf, P, tops)
    return reconstruct(j0.component(0), bound)


# --- full verification ----------------------------------------------------------------------------

@dataclass
class ExtensionVerdict:
    reports: Dict[str, Report] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and all(r.passed for r in self.reports.values())

    def failing(self) -> List[str]:
        return sorted(set(self.errors) | {k for k, r in self.reports.items() if not r.passed})

    def lines(self) -> List[str]:
        out = []
        for k in sorted(self.reports):
            out.append(self.reports[k].summary())
        for k in sorted(self.errors):
            out.append(f"FAIL {k}: {self.errors[k]}")
        return out


def verify_extension(R: ExtensionModule, locality_with: Sequence[Vec] = (), P: Optional[Module] = None,
                     tops=None, samples: Optional[int] = 300, seed: int = 0, j_samples: Optional[int] = 300,
                     stop_early: bool = False) -> ExtensionVerdict:
    """Run every verifier; errors raised by q-field, locality or J construction are recorded, not raised.

    With ``stop_early`` the run ends at the first failing verifier.
    """
    out = ExtensionVerdict()
    for name, fn in (("translation", verify_translation), ("commutativity", verify_commutativity),
                     ("associativity", verify_associativity)):
        out.reports[name] = fn(R, samples, seed)
        if stop_early and not out.passed:
            return out
    try:
        qf = build_q_field(R, samples, seed)
        out.reports["commutant"] = qf.certificate
    except NonCommutingMode as exc:
        out.errors["commutant"] = str(exc)
        return out
    for a in locality_with:
        name = f"locality[{R.voa.label(next(iter(a)))}]"
        try:
            k, rep = verify_locality_q(qf, a)
            if k > locality_bound(R, a):
                rep.add_bool("locality-bound", f"locality-bound;order={k}", False,
                             f"order {k} exceeds N+1 = {locality_bound(R, a)}")
            out.reports[name] = rep
        except BoundExceeded as exc:
            out.errors[name] = f"no vanishing order up to {exc.bound}"
        if stop_early and not out.passed:
            return out
    if P is not None:
        recording = getattr(R.inp.i_op, "recording", False)
        if recording:
            R.inp.i_op.recording = False
        try:
            J = build_j(qf, P, tops)
            rep = check_axioms(J, samples=j_samples, seed=seed)
            rep.title = f"J on {R.name}"
            rep.meta["K"] = J.K
            out.reports["J"] = rep
        except NotNilpotent as exc:
            out.errors["J"] = str(exc)
        finally:
            if recording:
                R.inp.i_op.recording = True
    return out


def mutation_sweep(inp: ExtensionInput, count: int = 50, seed: int = 0, samples: Optional[int] = None,
                   **kw) -> List[Tuple[str, List[str]]]:
    """Perturb single donor entries by 1 and record which verifiers fail.

    Candidate entries are the (w, r, t) read by completed verifier
    instances on the unperturbed data (J's checks excluded); the perturbed coordinate is a random basis vector of M
    at the target weight.
    """
    I = inp.i_op
    if not isinstance(I, TableFamily):
        raise TypeError("mutation needs a tabulated donor family")
    I.log.clear()
    I.recording = True
    try:
        base = verify_extension(ExtensionModule(inp), samples=samples, **kw)
    finally:
        I.recording = False
    if not base.passed:
        raise ValueError("unperturbed instance does not verify: " + ", ".join(base.failing()))
    candidates = sorted(set(I.log), key=repr)
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        w, r, t = candidates[rng.randrange(len(candidates))]
        tgt = inp.donor.basis(I.target_weight(w, r, t))
        if not tgt:
            continue
        target = tgt[rng.randrange(len(tgt))]
        mut = I.mutated((w, r, t), target)
        new = ExtensionInput(inp.voa, inp.t_module, inp.donor, inp.source, mut, inp.q_weight, inp.q_table,
                             inp.name + "'")
        verdict = verify_extension(ExtensionModule(new), samples=samples, stop_early=True, **kw)
        desc = (f"I({inp.source.label(w)})_({fmt_rational(r)}) {inp.t_module.label(t)} "
                f"+= {inp.donor.label(target)}")
        out.append((desc, verdict.failing()))
    return out


# --- shipped instances -----------------------------------------------------------------------------

def _vertex_family(module: Module, name: str = "Y") -> ModeFamily:
    from .intertwiner import FunctionFamily
    return FunctionFamily(module.voa, module, module,
                          lambda w, r, u: module.act(w, int(r), u) if Rational(r).denominator == 1 else {}, name)


def split_instance(voa: Module, T: Module, M: Module, name: str = "T+M") -> Tuple[ExtensionInput, Module, dict]:
    """I = 0 with q = vacuum of P = V, so R = T + M as modules."""
    inp = ExtensionInput(voa, T, M, voa, ZeroFamily(voa, T, M, "0"), ZERO,
                         lambda v, i: voa.act(v, i, voa.vacuum), name)
    return inp, voa, {voa.vacuum: [(1, {voa.vacuum: ONE}, -1)]}


def heisenberg_toy(cutoff=4, tabulate: bool = True) -> Tuple[ExtensionInput, Module, dict]:
    """Self-extension of the Heisenberg vacuum module V with q = e1 in the Jordan module J(0).

    T = M = source = V, I = Y_V, and v_i q = v_(i) e1 read inside J(0)
    (it lies in the e0-submodule, identified with V).  R is isomorphic to J(0).
    """
    from .models.heisenberg import build_heisenberg, jordan_fock_module
    V = build_heisenberg(cutoff)
    P = jordan_fock_module(V, 0, cutoff)
    q = ((), 1)

    def q_table(v, i):
        out: Vec = {}
        for (part, j), c in P.act(v, i, q).items():
            if j != 0:
                raise ValueError("v_i q left the e0-submodule")
            out[(part, 0)] = c
        return out

    fam = _vertex_family(V, "Y_V")
    # v_i q for v of weight <= cutoff has weight <= cutoff - 1: only those I-modes are donor data
    I = TableFamily.tabulate(fam, (Rational(cutoff) - 1, cutoff, cutoff), "I") if tabulate else fam
    inp = ExtensionInput(V, V, V, V, I, ZERO, q_table, "R")
    a = {((1,), 0): ONE}
    tops = {((), 1): [(1, {V.vacuum: ONE}, -1)], ((), 0): [(1, a, 0)]}
    return inp, P, tops


def toy_isomorphism(R: ExtensionModule, P: Module) -> Callable[[Hashable], Vec]:
    """R -> J(0): q_(-1)t -> (part, 1), m -> (part, 0)."""
    return lambda key: {(key[1][0], 1 if key[0] == "q" else 0): ONE}


# --- JSON --------------------------------------------------------------------------------------------

def dump_instance(inp: ExtensionInput, descriptors: Dict[str, str]) -> str:
    """Extension-instance JSON; module references are the given descriptor strings."""
    voa, S, T = inp.voa, inp.source, inp.t_module
    # composite vectors u_j v reach weight 2L - 1 inside the verifiers
    q_range = 2 * voa.cutoff
    qtab = []
    for v in voa.basis_upto(q_range):
        for i in range(0, inp.q_support(v) + 1):
            if voa.weight_of(v) + inp.q_weight - i - 1 > inp.i_op.cutoffs[0]:
                continue
            vq = inp.q_table(v, i)
            if vq:
                qtab.append({"v": voa.label(v), "i": i, "result": _terms(S, vq)})
    if not isinstance(inp.i_op, TableFamily):
        raise TypeError("only tabulated donor families can be serialized")
    modes = []
    for (w, r, t), img in sorted(inp.i_op.table.items(), key=lambda kv: repr(kv[0])):
        modes.append({"w": S.label(w), "r": fmt_rational(r), "t": T.label(t),
                      "result": _terms(inp.donor, img)})
    doc = {"voa": descriptors["voa"], "T": descriptors["T"], "M": descriptors["M"],
           "source": descriptors["source"], "q_weight": fmt_rational(inp.q_weight),
           "cutoffs": [fmt_rational(c) for c in inp.i_op.cutoffs], "q_range": fmt_rational(q_range),
           "q_table": qtab, "I": modes}
    return json.dumps(doc, indent=1, sort_keys=True)


def _terms(module: Module, vec: Vec) -> List[dict]:
    return [{"basis": module.label(k), "coeff": fmt_rational(c)}
            for k, c in sorted(vec.items(), key=lambda kv: module.label(kv[0]))]


def load_instance(text: str, resolve: Callable[[str], Module]) -> ExtensionInput:
    """Inverse of :func:`dump_instance`; ``resolve`` maps descriptor strings to modules."""
    doc = json.loads(text)
    voa = resolve(doc["voa"])
    T, M, S = resolve(doc["T"]), resolve(doc["M"]), resolve(doc["source"])
    cut = [parse_rational(c) for c in doc["cutoffs"]]

    def index(module, top):
        return {module.label(k): k for k in module.basis_upto(top)}

    si, ti, mi = index(S, cut[0]), index(T, cut[1]), index(M, cut[2])
    vi = index(voa, parse_rational(doc["q_range"]))

    def vec(terms, idx):
        return {idx[x["basis"]]: parse_rational(x["coeff"]) for x in terms}

    qtab: Dict[tuple, Vec] = {}
    for e in doc["q_table"]:
        qtab[(vi[e["v"]], int(e["i"]))] = vec(e["result"], si)
    table = {(si[e["w"]], parse_rational(e["r"]), ti[e["t"]]): vec(e["result"], mi) for e in doc["I"]}
    I = TableFamily(S, T, M, table, cut)
    wq, q_range = parse_rational(doc["q_weight"]), parse_rational(doc["q_range"])

    def q_table(v, i):
        wv = voa.weight_of(v)
        if wv > q_range or wv + wq - i - 1 > cut[0]:
            raise OutOfWindow("v_i q outside the stored table")
        return qtab.get((v, i), {})

    return ExtensionInput(voa, T, M, S, I, wq, q_table, "R")

"""Zhu algebras A_n(V) = V / O_n(V) and the module subspaces O~_{N,N}(W), at truncation.

O_n(V) is spanned by

    a o_n b = sum_i C(wt a + n, i) a_(i-2n-2) b        and       (L(-1) + L(0)) a,

and the product on the quotient is

    a *_n b = sum_{m=0}^{n} (-1)^m C(m+n, n) sum_i C(wt a + n, i) a_(i-n-m-1) b

(the Dong-Li-Mason formulas).  An element is used only when all of its
homogeneous components have weight <= L; the computed span is then a
subspace of the true O_n(V), so quotient dimensions are upper bounds.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .findim import FinDimAlgebra, radical
from .linalg import (ONE, ZERO, EchelonBasis, Rational, SparseMatrix, Vec, fmt_rational, solve, vec_add,
                     vec_scale, vec_sub)
from .modes import VOA, Module, binom, homogeneous_parts, sgn
from .models.subspaces import cm_subspace, stabilization
from .report import Report


class TruncationUnstable(UserWarning):
    """The truncated quotient dimension has not settled over three consecutive cutoffs."""


class PreconditionFailed(ValueError):
    def __init__(self, level, message: str = ""):
        super().__init__(f"precondition fails at level {fmt_rational(level)}" + (f": {message}" if message else ""))
        self.level = level


class FilteredSpan:
    """Span of possibly inhomogeneous vectors of ``module`` with weights <= cutoff.

    Columns are ordered by decreasing weight, so every stored row has its
    pivot at its top-weight component and representatives of the quotient
    are the lowest-weight basis vectors that are not pivots.
    """

    def __init__(self, module: Module, cutoff):
        self.module = module
        self.cutoff = Rational(cutoff)
        ws = module.weights(self.cutoff)
        self.keys = [k for w in reversed(ws) for k in module.basis(w)]
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.ech = EchelonBasis()

    def _encode(self, vec: Vec) -> Dict[int, Rational]:
        try:
            return {self.index[k]: c for k, c in vec.items()}
        except KeyError as exc:
            raise ValueError(f"vector has a component above the cutoff: {exc.args[0]!r}") from None

    def _decode(self, row: Dict[int, Rational]) -> Vec:
        return {self.keys[i]: c for i, c in row.items()}

    def fits(self, vec: Vec) -> bool:
        return all(k in self.index for k in vec)

    def add(self, vec: Vec) -> bool:
        return self.ech.add(self._encode(vec))

    def contains(self, vec: Vec) -> bool:
        return self.ech.contains(self._encode(vec))

    def reduce(self, vec: Vec) -> Vec:
        return self._decode(self.ech.reduce(self._encode(vec)))

    def __len__(self) -> int:
        return len(self.ech)

    @property
    def total(self) -> int:
        return len(self.keys)

    def codim(self) -> int:
        return self.total - len(self)

    def representatives(self) -> List[Hashable]:
        piv = set(self.ech.rows)
        reps = [k for i, k in enumerate(self.keys) if i not in piv]
        return list(reversed(reps))

    def level_dims(self) -> Dict[Rational, int]:
        """Number of pivots at each weight (the span's dimension in the associated graded)."""
        out: Dict[Rational, int] = {}
        for p in self.ech.rows:
            w = self.module.weight_of(self.keys[p])
            out[w] = out.get(w, 0) + 1
        return out


def circ_element(voa: VOA, module: Module, a, n: int, b, shift: int = 2) -> Vec:
    """sum_i C(wt a + n, i) a_(i - n*shift - 2) b for homogeneous basis vectors a, b.

    With ``shift = 2`` this is a o_n b; on a module it is the O~_{N,N} element.
    """
    wa = voa.weight_of(a)
    top = int(wa) + n
    out: Vec = {}
    for i in range(top + 1):
        c = binom(top, i)
        if c:
            vec_add(out, module.act(a, i - shift * n - 2, b), c)
    return out


def star_product(voa: VOA, a, n: int, b) -> Vec:
    wa = int(voa.weight_of(a))
    out: Vec = {}
    for m in range(n + 1):
        outer = sgn(m) * binom(m + n, n)
        for i in range(wa + n + 1):
            c = outer * binom(wa + n, i)
            if c:
                vec_add(out, voa.act(a, i - n - m - 1, b), c)
    return out


def star_vec(voa: VOA, x: Vec, n: int, y: Vec) -> Vec:
    out: Vec = {}
    for a, ca in x.items():
        for b, cb in y.items():
            vec_add(out, star_product(voa, a, n, b), ca * cb)
    return out


def on_instances(voa: VOA, n: int, cutoff, family: str = "dlm"):
    """Yield (top weight, descriptor, element) for spanning elements of O_n(V) up to ``cutoff``.

    ``family="dlm"`` gives the full spanning set, including vacuum instances
    and the (L(-1) + L(0)) a elements.  ``family="circ"`` gives only the
    a o_n b family with wt a > 0.
    """
    if family not in ("dlm", "circ"):
        raise ValueError(f"unknown family {family!r}")
    top = Rational(cutoff)
    keys = voa.basis_upto(top)
    for a in keys:
        wa = voa.weight_of(a)
        if family == "circ" and wa == 0:
            continue
        for b in keys:
            t = wa + voa.weight_of(b) + 2 * n + 1
            if t <= top:
                yield t, f"circ;n={n};a={voa.label(a)};b={voa.label(b)}", circ_element(voa, voa, a, n, b)
    if family == "dlm":
        for a in keys:
            wa = voa.weight_of(a)
            if wa + 1 <= top:
                x = voa.L(-1, {a: ONE})
                if wa:
                    vec_add(x, {a: wa})
                yield wa + 1, f"l0l-1;a={voa.label(a)}", x


def o_n_span(voa: VOA, n: int, cutoff=None, family: str = "dlm") -> FilteredSpan:
    if n < 0:
        raise ValueError("n must be >= 0")
    top = voa.cutoff if cutoff is None else Rational(cutoff)
    span = FilteredSpan(voa, top)
    for _, _, x in on_instances(voa, n, top, family):
        if x:
            span.add(x)
    return span


@dataclass
class ZhuQuotient:
    voa: VOA
    n: int
    cutoff: Rational
    span: FilteredSpan
    representatives: List[Hashable]
    table: Dict[Tuple[int, int], Dict[int, Rational]]
    missing: List[Tuple[int, int]]
    dims: Dict[Rational, int]
    stabilized: bool
    family: str = "dlm"
    notes: List[str] = field(default_factory=list)
    derived: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def labels(self) -> List[str]:
        return [self.voa.label(k) for k in self.representatives]

    def coords(self, vec: Vec) -> Dict[int, Rational]:
        """Coordinates of the class of ``vec`` on the representatives."""
        red = self.span.reduce(vec)
        pos = {k: i for i, k in enumerate(self.representatives)}
        return {pos[k]: c for k, c in red.items()}

    def lift(self, coords: Dict[int, Rational]) -> Vec:
        return {self.representatives[i]: c for i, c in coords.items() if c}

    def unit(self) -> Dict[int, Rational]:
        return self.coords({self.voa.vacuum: ONE})

    def omega_class(self) -> Dict[int, Rational]:
        return self.coords(self.voa.omega)

    @property
    def complete(self) -> bool:
        return not self.missing

    def mul(self, x: Dict[int, Rational], y: Dict[int, Rational]) -> Dict[int, Rational]:
        out: Dict[int, Rational] = {}
        for i, a in x.items():
            for j, b in y.items():
                if (i, j) in self.missing:
                    raise ValueError(f"product {i}*{j} is outside the window")
                vec_add(out, self.table.get((i, j), {}), a * b)
        return out

    def algebra(self) -> FinDimAlgebra:
        if self.missing:
            raise ValueError(f"{len(self.missing)} products fall outside the window; raise the cutoff")
        return FinDimAlgebra(self.dim, self.table, self.unit(), self.labels())

    def check_table(self) -> Report:
        """Associativity on all basis triples whose products are in the window, plus unit laws."""
        rep = Report(f"Zhu A_{self.n}({self.voa.name}) table")
        d = self.dim
        defined = lambda i, j: (i, j) not in self.missing
        for i in range(d):
            for j in range(d):
                if not defined(i, j):
                    continue
                ij = self.table.get((i, j), {})
                for k in range(d):
                    if not defined(j, k):
                        continue
                    jk = self.table.get((j, k), {})
                    if any(not defined(x, k) for x in ij) or any(not defined(i, x) for x in jk):
                        rep.skipped += 1
                        continue
                    lhs = self.mul(ij, {k: ONE})
                    rhs = self.mul({i: ONE}, jk)
                    rep.add("associativity", f"assoc;{i};{j};{k}", vec_sub(lhs, rhs))
        u = self.unit()
        for i in range(d):
            if all(defined(x, i) and defined(i, x) for x in u):
                rep.add("unit", f"unit-left;{i}", vec_sub(self.mul(u, {i: ONE}), {i: ONE}))
                rep.add("unit", f"unit-right;{i}", vec_sub(self.mul({i: ONE}, u), {i: ONE}))
        return rep

    def is_commutative(self) -> bool:
        return all(self.table.get((i, j), {}) == self.table.get((j, i), {})
                   for i in range(self.dim) for j in range(i + 1, self.dim)
                   if (i, j) not in self.missing and (j, i) not in self.missing)

    def to_json(self) -> dict:
        labels = self.labels()
        doc = {
            "voa": self.voa.name,
            "n": self.n,
            "cutoff": fmt_rational(self.cutoff),
            "family": self.family,
            "dimensions": {fmt_rational(L): d for L, d in sorted(self.dims.items())},
            "stabilized": self.stabilized,
            "bound": f"dim A_{self.n}(V) <= {self.dim} at cutoff {fmt_rational(self.cutoff)}",
            "representatives": labels,
            "table": [{"left": labels[i], "right": labels[j],
                       "result": {labels[k]: fmt_rational(c) for k, c in sorted(v.items())}}
                      for (i, j), v in sorted(self.table.items())],
            "missing_products": [[labels[i], labels[j]] for i, j in self.missing],
            "derived_products": [[labels[i], labels[j]] for i, j in self.derived],
            "unit": {labels[k]: fmt_rational(c) for k, c in sorted(self.unit().items())},
        }
        if self.complete:
            doc["radical_dimension"] = len(radical(self.algebra()))
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def zhu_algebra(voa: VOA, n: int = 0, cutoff=None, family: str = "dlm", strict: bool = False,
                complete: bool = True) -> ZhuQuotient:
    """The truncated quotient V_{<=L} / O_n(V) with its *-product table.

    Products whose defining vector leaves the window are filled in by
    :func:`complete_by_generator` when ``complete`` and a single generator
    exists; otherwise they are listed in ``missing``.

    Dimensions are recorded at L-2, L-1 and L; if they differ the result is
    flagged unstable and a :class:`TruncationUnstable` warning is issued
    (raised instead when ``strict``).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    top = voa.cutoff if cutoff is None else Rational(cutoff)
    instances = sorted(on_instances(voa, n, top, family), key=lambda t: (t[0], t[1]))
    checkpoints = [top - 2, top - 1, top]
    dims: Dict[Rational, int] = {}
    span = None
    for L in checkpoints:
        if L < 0:
            continue
        span = FilteredSpan(voa, L)
        for t, _, x in instances:
            if t <= L and x:
                span.add(x)
        dims[L] = span.codim()
    stable = stabilization(dims)
    reps = span.representatives()
    pos = {k: i for i, k in enumerate(reps)}
    table: Dict[Tuple[int, int], Dict[int, Rational]] = {}
    missing = []
    for i, a in enumerate(reps):
        for j, b in enumerate(reps):
            prod = star_product(voa, a, n, b)
            if not span.fits(prod):
                missing.append((i, j))
                continue
            red = span.reduce(prod)
            if red:
                table[(i, j)] = {pos[k]: c for k, c in red.items()}
    q = ZhuQuotient(voa, n, top, span, reps, table, missing, dims, stable, family)
    if missing and complete:
        complete_by_generator(q)
    if not stable:
        msg = (f"A_{n}({voa.name}) quotient dimensions {[dims[L] for L in sorted(dims)]} "
               f"at cutoffs {[fmt_rational(L) for L in sorted(dims)]} have not stabilized")
        q.notes.append(msg)
        if strict:
            raise TruncationUnstable(msg)
        warnings.warn(msg, TruncationUnstable, stacklevel=2)
    return q


def complete_by_generator(q: ZhuQuotient) -> bool:
    """Fill out-of-window products using one generator g whose products g * r_j are all known.

    If 1, g, g*g, ... span the quotient then r_i = p_i(g) and
    r_i * r_j = p_i(L_g) r_j by associativity.  Returns False (leaving the
    table untouched) when no basis element qualifies.
    """
    d = q.dim
    unit = q.unit()
    for gi in range(d):
        if any((gi, j) in q.missing for j in range(d)):
            continue
        left = lambda x: q.mul({gi: ONE}, x)
        powers = [unit]
        ech = EchelonBasis()
        ech.add(unit)
        while len(powers) < d:
            nxt = left(powers[-1])
            if not ech.add(nxt):
                break
            powers.append(nxt)
        if len(powers) < d:
            continue
        # coordinates of each r_i in the power basis
        m = SparseMatrix(d, d, [(r, c, x) for c, p in enumerate(powers) for r, x in p.items()])
        poly = []
        for i in range(d):
            rhs = [ONE if r == i else ZERO for r in range(d)]
            poly.append(solve(m, rhs))
        filled = []
        for i, j in q.missing:
            acc: Dict[int, Rational] = {}
            cur = {j: ONE}
            for k in range(d):
                if poly[i][k]:
                    vec_add(acc, cur, poly[i][k])
                cur = left(cur)
            if acc:
                q.table[(i, j)] = acc
            filled.append((i, j))
        q.derived = filled
        q.missing = []
        q.notes.append(f"{len(filled)} products derived from powers of {q.labels()[gi]} by associativity")
        return True
    return False


# --- action on modules ---------------------------------------------------------------

def zero_mode(module: Module, x: Vec, vec: Vec) -> Vec:
    """o(x) = sum of x_(wt - 1) over the homogeneous components of x."""
    voa = module.voa
    out: Vec = {}
    for w, part in homogeneous_parts(voa, x).items():
        vec_add(out, module.act_vec(part, int(w) - 1, vec))
    return out


def _levels(module: Module, n: int):
    h = module.min_weight()
    out = []
    for base in module.level_offsets():
        for j in range(n + 1):
            if base + j - h <= n:
                out.extend(module.basis(base + j))
    return out


def o_action_check(q: ZhuQuotient, module: Module, instances: Optional[int] = None) -> Report:
    """On levels 0..n of ``module``: spanning elements of O_n act as zero and o(a)o(b) = o(a*b)."""
    rep = Report(f"A_{q.n}({q.voa.name}) on {module.name}")
    keys = _levels(module, q.n)
    voa = q.voa
    count = 0
    for t, desc, x in sorted(on_instances(voa, q.n, q.cutoff, q.family), key=lambda t: (t[0], t[1])):
        if instances is not None and count >= instances:
            break
        count += 1
        for k in keys:
            rep.add("o-vanishes", f"{desc};on={module.label(k)}", zero_mode(module, x, {k: ONE}), module)
    labels = q.labels()
    for i, a in enumerate(q.representatives):
        for j, b in enumerate(q.representatives):
            if (i, j) in q.missing:
                rep.skipped += 1
                continue
            ab = q.lift(q.table.get((i, j), {}))
            for k in keys:
                lhs = zero_mode(module, {a: ONE}, zero_mode(module, {b: ONE}, {k: ONE}))
                rhs = zero_mode(module, ab, {k: ONE})
                rep.add("o-product", f"o;a={labels[i]};b={labels[j]};on={module.label(k)}", vec_sub(lhs, rhs), module)
    return rep


# --- O~_{N,N}(W) and the spanning argument ------------------------------------------------

def o_tilde_span(module: Module, N: int, cutoff=None) -> FilteredSpan:
    """Span of sum_i C(wt v + N, i) v_(-2N-2+i) w for v in V, w in W, all components <= cutoff."""
    if N < 0:
        raise ValueError("N must be >= 0")
    top = module.cutoff if cutoff is None else Rational(cutoff)
    voa = module.voa
    span = FilteredSpan(module, top)
    for w in module.basis_upto(top):
        ww = module.weight_of(w)
        for v in voa.basis_upto(top - ww - 2 * N - 1):
            x = circ_element(voa, module, v, N, w)
            if x:
                span.add(x)
    return span


def reduced_cutoff(module: Module, N: int, cutoff=None) -> Rational:
    top = module.cutoff if cutoff is None else Rational(cutoff)
    return top - (2 * N + 2) * module.voa.max_generator_weight()


def b_plus_otilde_check(module: Module, N: int, B: Sequence[Vec], cutoff=None,
                        require_precondition: bool = True) -> Report:
    """Level-by-level check that B + O~_{N,N}(W) contains W up to the reduced cutoff.

    The precondition B + C_{2N+2}(W) = W is verified first at every level up to
    the cutoff; a failure raises :class:`PreconditionFailed` carrying the level
    (or is recorded in the report when ``require_precondition`` is false).
    """
    top = module.cutoff if cutoff is None else Rational(cutoff)
    Lp = reduced_cutoff(module, N, top)
    rep = Report(f"B + O~_{N},{N}({module.name})")
    rep.meta["reduced_cutoff"] = fmt_rational(Lp)
    cm = cm_subspace(module, 2 * N + 2, top)
    for b in B:
        cm.add(b)
    for w in module.weights(top):
        short = cm.codim(w)
        if short:
            if require_precondition:
                raise PreconditionFailed(w, f"B + C_{2 * N + 2}(W) misses {short} directions")
            rep.add_bool("precondition", f"precondition;level={fmt_rational(w)}", False,
                         f"B + C_{2 * N + 2}(W) misses {short} directions")
    span = o_tilde_span(module, N, top)
    for b in B:
        for w, part in homogeneous_parts(module, b).items():
            if w <= top:
                span.add(part)
    for w in module.weights(Lp):
        missing = sum(1 for k in module.basis(w) if not span.contains({k: ONE}))
        rep.add_bool("spanning", f"spanning;level={fmt_rational(w)}", not missing,
                     f"{missing} of {module.dim(w)} basis vectors outside B + O~")
    return rep


# --- restriction to generalized eigenvalues near a window ------------------------------------

@dataclass
class WindowReduction:
    k: int
    shifts: List[Tuple[Rational, int]]        # (lambda_i, j_i)
    dims: Dict[int, int]                       # s -> quotient dimension
    s: Optional[int]                           # smallest s after which dims are constant
    algebra: Optional[FinDimAlgebra]


def window_shifts(weights: Sequence, k: int) -> List[Tuple[Rational, int]]:
    """For each lowest weight lambda, the integer j with k <= lambda + j < k + 1."""
    out = []
    for lam in weights:
        lam = Rational(lam)
        j = k - (lam.numerator // lam.denominator)
        if lam + j >= k + 1:
            j -= 1
        out.append((lam, int(j)))
    return out


def window_reduction(q: ZhuQuotient, weights: Sequence, k: int, s_max: Optional[int] = None) -> WindowReduction:
    """Quotient of A_n(V) by the ideal generated by prod_i (omega - lambda_i - j_i)^s.

    The quotient keeps the generalized eigenspaces of o(omega) with
    eigenvalues in [k, k+1).  s runs from 1 to ``s_max`` (default dim + 1); the
    reported s is the smallest one from which the dimension no longer changes.
    """
    A = q.algebra()
    om = q.omega_class()
    shifts = window_shifts(weights, k)
    targets = sorted({lam + j for lam, j in shifts})
    s_max = s_max or A.dim + 1
    dims: Dict[int, int] = {}
    algebras: Dict[int, FinDimAlgebra] = {}
    for s in range(1, s_max + 1):
        g = dict(A.unit)
        for t in targets:
            factor = vec_sub(om, vec_scale(A.unit, t))
            for _ in range(s):
                g = A.mul(g, factor)
        ideal = A.ideal_generated([g])
        B, _, _, _ = A.quotient(ideal)
        dims[s] = B.dim
        algebras[s] = B
    s_found = None
    for s in sorted(dims):
        if all(dims[t] == dims[s] for t in dims if t >= s):
            s_found = s
            break
    return WindowReduction(k, shifts, dims, s_found, algebras.get(s_found))

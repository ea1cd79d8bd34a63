"""Finite-dimensional associative algebras over Q and their modules.

Algebra elements and module vectors are sparse dicts ``{index: Rational}``.
The radical is the kernel of the trace form Tr(L_{xy}) (characteristic 0).
Simple submodules are found with a Norton-style spin test using factors of
characteristic polynomials of random algebra elements; all randomness is
seeded so results are reproducible.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from .linalg import (ONE, ZERO, EchelonBasis, Rational, SparseMatrix, fmt_rational, kernel_basis,
                     parse_rational, rank, row_space, solve, vec_add, vec_scale, vec_sub)
from .report import Report

DVec = Dict[int, Rational]


class ShapeMismatch(ValueError):
    pass


class AlgebraError(ValueError):
    pass


# --- small helpers -------------------------------------------------------------------

def _dense_to_vec(xs) -> DVec:
    return {i: Rational(x) for i, x in enumerate(xs) if x}


def _span(vectors: Sequence[DVec], n: int) -> Tuple[List[DVec], List[int]]:
    return row_space([dict(v) for v in vectors if v], n)


def _echelon(vectors: Sequence[DVec]) -> EchelonBasis:
    e = EchelonBasis()
    for v in vectors:
        e.add(v)
    return e


def _apply(m: SparseMatrix, v: DVec) -> DVec:
    out: DVec = {}
    for i in range(m.rows):
        row = m.row(i)
        s = ZERO
        for j, c in row.items():
            x = v.get(j)
            if x:
                s += c * x
        if s:
            out[i] = s
    return out


def _matrix_from_columns(cols: Sequence[DVec], rows: int) -> SparseMatrix:
    entries = [(i, j, c) for j, col in enumerate(cols) for i, c in col.items()]
    return SparseMatrix(rows, len(cols), entries)


def _coords(vec: DVec, rows: List[DVec], pivots: List[int]) -> Optional[List[Rational]]:
    """Coordinates of vec in an rref basis, or None when vec is outside the span."""
    out = []
    rest = dict(vec)
    for r, p in zip(rows, pivots):
        c = rest.get(p, ZERO)
        out.append(c)
        if c:
            vec_add(rest, r, -c)
    return None if rest else out


# --- algebras --------------------------------------------------------------------------

class FinDimAlgebra:
    def __init__(self, dim: int, table: Dict[Tuple[int, int], DVec], unit: DVec, names: Optional[List[str]] = None):
        self.dim = dim
        self.table = {k: {i: Rational(c) for i, c in v.items() if c} for k, v in table.items()}
        self.unit = {i: Rational(c) for i, c in unit.items() if c}
        self.names = names or [f"e{i}" for i in range(dim)]
        self._left: Dict[int, SparseMatrix] = {}

    def basis_product(self, i: int, j: int) -> DVec:
        return self.table.get((i, j), {})

    def mul(self, x: DVec, y: DVec) -> DVec:
        out: DVec = {}
        for i, a in x.items():
            for j, b in y.items():
                vec_add(out, self.basis_product(i, j), a * b)
        return out

    def power(self, x: DVec, k: int) -> DVec:
        out = dict(self.unit)
        for _ in range(k):
            out = self.mul(out, x)
        return out

    def left_matrix(self, x: DVec) -> SparseMatrix:
        cols = [self.mul(x, {j: ONE}) for j in range(self.dim)]
        return _matrix_from_columns(cols, self.dim)

    def right_matrix(self, x: DVec) -> SparseMatrix:
        cols = [self.mul({j: ONE}, x) for j in range(self.dim)]
        return _matrix_from_columns(cols, self.dim)

    def basis_left(self, i: int) -> SparseMatrix:
        if i not in self._left:
            self._left[i] = self.left_matrix({i: ONE})
        return self._left[i]

    def check(self) -> Report:
        rep = Report("algebra axioms")
        n = self.dim
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lhs = self.mul(self.basis_product(i, j), {k: ONE})
                    rhs = self.mul({i: ONE}, self.basis_product(j, k))
                    rep.add("associativity", f"assoc;{i};{j};{k}", vec_sub(lhs, rhs))
            rep.add("unit", f"unit-left;{i}", vec_sub(self.mul(self.unit, {i: ONE}), {i: ONE}))
            rep.add("unit", f"unit-right;{i}", vec_sub(self.mul({i: ONE}, self.unit), {i: ONE}))
        return rep

    def is_commutative(self) -> bool:
        return all(self.basis_product(i, j) == self.basis_product(j, i)
                   for i in range(self.dim) for j in range(i + 1, self.dim))

    def trace(self, x: DVec) -> Rational:
        m = self.left_matrix(x)
        return sum((m.get(i, i) for i in range(self.dim)), ZERO)

    def quotient(self, ideal: Sequence[DVec]) -> Tuple["FinDimAlgebra", List[int], List[DVec], List[int]]:
        """A / I for a two-sided ideal I; returns (algebra, representative indices, rref rows, pivots).

        The quotient basis is the set of non-pivot basis vectors of A.
        """
        rows, piv = _span(ideal, self.dim)
        reps = [i for i in range(self.dim) if i not in set(piv)]
        index = {i: k for k, i in enumerate(reps)}

        def red(v: DVec) -> DVec:
            out = dict(v)
            for r, p in zip(rows, piv):
                c = out.get(p)
                if c:
                    vec_add(out, r, -c)
            return {index[i]: c for i, c in out.items()}

        table = {}
        for a, i in enumerate(reps):
            for b, j in enumerate(reps):
                r = red(self.basis_product(i, j))
                if r:
                    table[(a, b)] = r
        alg = FinDimAlgebra(len(reps), table, red(self.unit), [self.names[i] for i in reps])
        alg._reduce = red
        alg._lift = lambda v: {reps[a]: c for a, c in v.items()}
        return alg, reps, rows, piv

    def ideal_generated(self, gens: Sequence[DVec]) -> List[DVec]:
        """Basis of the two-sided ideal generated by ``gens``."""
        vecs = []
        for g in gens:
            for i in range(self.dim):
                left = self.mul({i: ONE}, g)
                for j in range(self.dim):
                    vecs.append(self.mul(left, {j: ONE}))
        rows, _ = _span(vecs, self.dim)
        return rows

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "names": self.names,
            "unit": [fmt_rational(self.unit.get(i, ZERO)) for i in range(self.dim)],
            "products": [{"left": i, "right": j, "result": {str(k): fmt_rational(c) for k, c in v.items()}}
                         for (i, j), v in sorted(self.table.items())],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FinDimAlgebra":
        n = int(doc["dimension"])
        unit = _dense_to_vec(parse_rational(x) for x in doc["unit"])
        table = {}
        for p in doc["products"]:
            table[(int(p["left"]), int(p["right"]))] = {int(k): parse_rational(c) for k, c in p["result"].items()}
        return cls(n, table, unit, doc.get("names"))


def polynomial_algebra(coeffs: Sequence) -> FinDimAlgebra:
    """Q[x]/(f) for monic f = x^d + c_{d-1} x^{d-1} + ... + c_0 given as [c_0, ..., c_{d-1}]."""
    d = len(coeffs)
    red = {d: {i: -Rational(c) for i, c in enumerate(coeffs) if c}}

    def monomial(k: int) -> DVec:
        if k < d:
            return {k: ONE}
        # x^k = x^{k-d} * x^d
        out: DVec = {}
        for i, c in red[d].items():
            vec_add(out, monomial(k - d + i), c)
        return out

    table = {(i, j): monomial(i + j) for i in range(d) for j in range(d)}
    return FinDimAlgebra(d, table, {0: ONE}, ["1"] + [f"x^{k}" for k in range(1, d)])


def truncated_polynomial(d: int) -> FinDimAlgebra:
    """Q[x]/(x^d)."""
    return polynomial_algebra([0] * d)


def product_algebra(*algs: FinDimAlgebra) -> FinDimAlgebra:
    offs, n = [], 0
    for a in algs:
        offs.append(n)
        n += a.dim
    table, unit, names = {}, {}, []
    for a, o in zip(algs, offs):
        for (i, j), v in a.table.items():
            table[(i + o, j + o)] = {k + o: c for k, c in v.items()}
        unit.update({k + o: c for k, c in a.unit.items()})
        names.extend(f"{nm}_{o}" for nm in a.names)
    return FinDimAlgebra(n, table, unit, names)


def matrix_units(n: int, upper_only: bool = False) -> FinDimAlgebra:
    """Full matrix algebra M_n(Q), or its upper-triangular subalgebra."""
    pairs = [(i, j) for i in range(n) for j in range(n) if not upper_only or i <= j]
    index = {p: k for k, p in enumerate(pairs)}
    table = {}
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            if j == k:
                table[(a, b)] = {index[(i, l)]: ONE}
    unit = {index[(i, i)]: ONE for i in range(n)}
    return FinDimAlgebra(len(pairs), table, unit, [f"E{i}{j}" for i, j in pairs])


def upper_triangular(n: int = 2) -> FinDimAlgebra:
    return matrix_units(n, upper_only=True)


# --- modules ------------------------------------------------------------------------------

class FDModule:
    def __init__(self, algebra: FinDimAlgebra, dim: int, action: Sequence[SparseMatrix], name: str = ""):
        if len(action) != algebra.dim:
            raise ShapeMismatch("one action matrix per algebra basis element is required")
        for m in action:
            if (m.rows, m.cols) != (dim, dim):
                raise ShapeMismatch(f"action matrix is {m.rows}x{m.cols}, expected {dim}x{dim}")
        self.algebra = algebra
        self.dim = dim
        self.action = list(action)
        self.name = name

    def rho(self, x: DVec) -> SparseMatrix:
        out = SparseMatrix.zero(self.dim, self.dim)
        for i, c in x.items():
            out = out + self.action[i].scale(c)
        return out

    def act(self, x: DVec, v: DVec) -> DVec:
        out: DVec = {}
        for i, c in x.items():
            vec_add(out, _apply(self.action[i], v), c)
        return out

    def check(self) -> Report:
        rep = Report(f"module axioms {self.name}")
        A = self.algebra
        for i in range(A.dim):
            for j in range(A.dim):
                lhs = self.action[i] @ self.action[j]
                rhs = self.rho(A.basis_product(i, j))
                d = lhs - rhs
                rep.add("module", f"module;{i};{j}", {f"({r},{c})": x for r, c, x in d.entries()})
        u = self.rho(A.unit) - SparseMatrix.identity(self.dim)
        rep.add("unit", "unit", {f"({r},{c})": x for r, c, x in u.entries()})
        return rep

    def spin(self, vectors: Sequence[DVec]) -> Tuple[List[DVec], List[int]]:
        """rref basis of the submodule generated by ``vectors``."""
        ech = EchelonBasis()
        queue = [v for v in vectors if v]
        for v in queue:
            ech.add(v)
        queue = list(ech.rows.values())
        while queue:
            nxt = []
            for v in queue:
                for i in range(self.algebra.dim):
                    w = _apply(self.action[i], v)
                    if w and ech.add(w):
                        nxt.append(w)
            queue = nxt
        return _span(list(ech.rows.values()), self.dim)

    def submodule(self, basis: Sequence[DVec], name: str = "") -> Tuple["FDModule", SparseMatrix]:
        """Submodule on a basis of an invariant subspace; also returns the inclusion matrix."""
        rows, piv = _span(basis, self.dim)
        acts = []
        for m in self.action:
            cols = []
            for r in rows:
                c = _coords(_apply(m, r), rows, piv)
                if c is None:
                    raise AlgebraError("subspace is not invariant")
                cols.append(_dense_to_vec(c))
            acts.append(_matrix_from_columns(cols, len(rows)))
        inc = _matrix_from_columns(rows, self.dim)
        return FDModule(self.algebra, len(rows), acts, name), inc

    def quotient(self, basis: Sequence[DVec], name: str = "") -> Tuple["FDModule", SparseMatrix]:
        """Quotient by an invariant subspace; returns the module and the projection matrix."""
        rows, piv = _span(basis, self.dim)
        pset = set(piv)
        reps = [i for i in range(self.dim) if i not in pset]
        index = {i: k for k, i in enumerate(reps)}

        def red(v: DVec) -> DVec:
            out = dict(v)
            for r, p in zip(rows, piv):
                c = out.get(p)
                if c:
                    vec_add(out, r, -c)
            return {index[i]: c for i, c in out.items()}

        acts = [_matrix_from_columns([red(_apply(m, {i: ONE})) for i in reps], len(reps)) for m in self.action]
        proj = _matrix_from_columns([red({i: ONE}) for i in range(self.dim)], len(reps))
        return FDModule(self.algebra, len(reps), acts, name), proj

    def direct_sum(self, other: "FDModule") -> "FDModule":
        acts = []
        for a, b in zip(self.action, other.action):
            ent = a.entries() + [(i + self.dim, j + self.dim, c) for i, j, c in b.entries()]
            acts.append(SparseMatrix(self.dim + other.dim, self.dim + other.dim, ent))
        return FDModule(self.algebra, self.dim + other.dim, acts, f"{self.name}+{other.name}")

    def radical_subspace(self) -> List[DVec]:
        vecs = []
        for r in radical(self.algebra):
            m = self.rho(r)
            for j in range(self.dim):
                col = _apply(m, {j: ONE})
                if col:
                    vecs.append(col)
        return _span(vecs, self.dim)[0]

    def to_json(self) -> dict:
        return {"dimension": self.dim,
                "action": [[[fmt_rational(x) for x in row] for row in m.to_dense()] for m in self.action]}


def regular_module(A: FinDimAlgebra) -> FDModule:
    return FDModule(A, A.dim, [A.basis_left(i) for i in range(A.dim)], "A")


def is_module_map(M: FDModule, N: FDModule, f: SparseMatrix) -> bool:
    if (f.rows, f.cols) != (N.dim, M.dim):
        raise ShapeMismatch("map shape does not match modules")
    return all((f @ a - b @ f).is_zero() for a, b in zip(M.action, N.action))


def hom_space(M: FDModule, N: FDModule) -> List[SparseMatrix]:
    """Basis of Hom_A(M, N) as N.dim x M.dim matrices."""
    dm, dn = M.dim, N.dim
    nvar = dm * dn
    if nvar == 0:
        return []
    eqs: List[Dict[int, Rational]] = []
    for a, b in zip(M.action, N.action):
        for r in range(dn):
            for c in range(dm):
                eq: Dict[int, Rational] = {}
                # (X a)_{r,c} - (b X)_{r,c}
                for k in range(dm):
                    x = a.get(k, c)
                    if x:
                        eq[r * dm + k] = eq.get(r * dm + k, ZERO) + x
                for k in range(dn):
                    x = b.get(r, k)
                    if x:
                        eq[k * dm + c] = eq.get(k * dm + c, ZERO) - x
                eq = {i: x for i, x in eq.items() if x}
                if eq:
                    eqs.append(eq)
    rows, _ = row_space(eqs, nvar)
    sys = SparseMatrix.from_row_dicts(rows, nvar) if rows else SparseMatrix.zero(0, nvar)
    out = []
    for v in kernel_basis(sys):
        out.append(SparseMatrix(dn, dm, [(i // dm, i % dm, x) for i, x in enumerate(v) if x]))
    return out


def _random_combo(mats: Sequence[SparseMatrix], rng: random.Random, rows: int, cols: int) -> SparseMatrix:
    out = SparseMatrix.zero(rows, cols)
    for m in mats:
        out = out + m.scale(rng.randint(-50, 50))
    return out


def _invertible(m: SparseMatrix) -> bool:
    return m.rows == m.cols and rank(m) == m.rows


def is_isomorphic(M: FDModule, N: FDModule, seed: int = 0, tries: int = 8) -> Optional[SparseMatrix]:
    """An isomorphism M -> N found by random combination of Hom basis, or None."""
    if M.dim != N.dim:
        return None
    if M.dim == 0:
        return SparseMatrix.zero(0, 0)
    homs = hom_space(M, N)
    if not homs:
        return None
    rng = random.Random(seed)
    for _ in range(tries):
        f = _random_combo(homs, rng, N.dim, M.dim)
        if _invertible(f):
            return f
    return None


# --- radical ------------------------------------------------------------------------------

def radical(A: FinDimAlgebra) -> List[DVec]:
    """Basis (rref) of the Jacobson radical: kernel of the trace form Tr(L_{xy})."""
    n = A.dim
    traces = [A.trace({k: ONE}) for k in range(n)]
    gram = []
    for i in range(n):
        row = {}
        for j in range(n):
            t = sum((c * traces[k] for k, c in A.basis_product(i, j).items()), ZERO)
            if t:
                row[j] = t
        gram.append(row)
    m = SparseMatrix.from_row_dicts(gram, n)
    vecs = [_dense_to_vec(v) for v in kernel_basis(m)]
    return _span(vecs, n)[0]


def nilpotency_index(A: FinDimAlgebra, ideal: Sequence[DVec]) -> int:
    """Smallest k with I^k = 0 (I^0 = A)."""
    if not ideal:
        return 1
    cur = list(ideal)
    k = 1
    while cur:
        prods = [A.mul(x, y) for x in cur for y in ideal]
        cur = _span(prods, A.dim)[0]
        k += 1
        if k > A.dim + 2:
            raise AlgebraError("ideal is not nilpotent")
    return k


def is_semisimple(A: FinDimAlgebra) -> bool:
    return not radical(A)


# --- simple submodules and composition series ---------------------------------------------

def _char_factors(m: SparseMatrix) -> List[sympy.Poly]:
    x = sympy.Symbol("x")
    mat = sympy.Matrix(m.rows, m.cols, lambda i, j: sympy.Rational(int(m.get(i, j).numerator), int(m.get(i, j).denominator)))
    poly = mat.charpoly(x)
    return [sympy.Poly(f, x) for f, _ in sympy.factor_list(poly.as_expr(), x)[1]]


def _poly_eval(m: SparseMatrix, p: sympy.Poly) -> SparseMatrix:
    n = m.rows
    out = SparseMatrix.zero(n, n)
    for c in p.all_coeffs():
        q = sympy.Rational(c)
        out = out @ m + SparseMatrix.identity(n).scale(Rational(int(q.p), int(q.q)))
    return out


def _spans_all(M: FDModule, vec: DVec, transpose: bool = False) -> Tuple[bool, List[DVec]]:
    if transpose:
        Mt = FDModule(M.algebra, M.dim, [a.transpose() for a in M.action])
        rows, _ = Mt.spin([vec])
    else:
        rows, _ = M.spin([vec])
    return len(rows) == M.dim, rows


def proper_submodule(M: FDModule, rng: random.Random, tries: int = 24) -> Optional[List[DVec]]:
    """A proper nonzero submodule of M (rref basis), or None when M looks simple.

    Norton's test: for a random a in A and an irreducible factor p of its
    characteristic polynomial with nullity(p(a)) = deg p, M is simple iff one
    nonzero kernel vector spins to M and one kernel vector of p(a)^T spins to M*.
    """
    if M.dim <= 1:
        return None
    A = M.algebra
    for _ in range(tries):
        x = {i: Rational(rng.randint(-9, 9)) for i in range(A.dim)}
        a = M.rho(x)
        for p in sorted(_char_factors(a), key=lambda f: f.degree()):
            theta = _poly_eval(a, p)
            ker = [_dense_to_vec(v) for v in kernel_basis(theta)]
            if not ker:
                continue
            for v in ker:
                full, rows = _spans_all(M, v)
                if not full:
                    return rows
            kert = [_dense_to_vec(v) for v in kernel_basis(theta.transpose())]
            for w in kert:
                full, rows = _spans_all(M, w, transpose=True)
                if not full:
                    # annihilator of a proper A^T-submodule of M* is a proper submodule of M
                    ann = SparseMatrix.from_row_dicts(rows, M.dim)
                    return _span([_dense_to_vec(v) for v in kernel_basis(ann)], M.dim)[0]
            if len(ker) == p.degree():
                return None
    return None


def simple_submodule(M: FDModule, rng: random.Random) -> List[DVec]:
    """rref basis of some simple submodule of M (M itself when simple)."""
    basis = [{i: ONE} for i in range(M.dim)]
    cur, inc_rows = M, basis
    while True:
        sub = proper_submodule(cur, rng)
        if sub is None:
            return _span(inc_rows, M.dim)[0]
        # express in ambient coordinates
        new_rows = []
        for v in sub:
            amb: DVec = {}
            for k, c in v.items():
                vec_add(amb, inc_rows[k], c)
            new_rows.append(amb)
        cur, _ = M.submodule(new_rows)
        inc_rows = _span(new_rows, M.dim)[0]


@dataclass
class CompositionSeries:
    flag: List[List[DVec]]           # increasing submodules 0 = M_0 < ... < M_l = M
    factors: List[FDModule]

    @property
    def length(self) -> int:
        return len(self.factors)


def composition_series(M: FDModule, seed: int = 0) -> CompositionSeries:
    rng = random.Random(seed)
    flag: List[List[DVec]] = [[]]
    factors: List[FDModule] = []
    current: List[DVec] = []
    while len(current) < M.dim:
        Q, proj = M.quotient(current)
        s_rows = simple_submodule(Q, rng)
        S, _ = Q.submodule(s_rows)
        factors.append(S)
        # lift: preimage of S under the projection
        lift = []
        qreps = [i for i in range(M.dim) if i not in set(_span(current, M.dim)[1])] if current else list(range(M.dim))
        for r in s_rows:
            lift.append({qreps[k]: c for k, c in r.items()})
        current = _span(list(current) + lift, M.dim)[0]
        flag.append(current)
    return CompositionSeries(flag, factors)


def factor_classes(factors: Sequence[FDModule], seed: int = 0) -> List[Tuple[int, int]]:
    """Group simple factors into isomorphism classes: [(representative index, multiplicity)]."""
    reps: List[Tuple[int, int]] = []
    for k, S in enumerate(factors):
        for idx, (r, mult) in enumerate(reps):
            if simple_isomorphic(factors[r], S):
                reps[idx] = (r, mult + 1)
                break
        else:
            reps.append((k, 1))
    return reps


def simple_isomorphic(S: FDModule, T: FDModule) -> bool:
    """Simple modules are isomorphic iff they have equal dimension and Hom(S, T) != 0."""
    return S.dim == T.dim and bool(hom_space(S, T))


def same_factors(a: Sequence[FDModule], b: Sequence[FDModule]) -> bool:
    """Jordan-Holder comparison of two lists of simple factors as multisets."""
    if len(a) != len(b):
        return False
    used = [False] * len(b)
    for S in a:
        for j, T in enumerate(b):
            if not used[j] and simple_isomorphic(S, T):
                used[j] = True
                break
        else:
            return False
    return True


# --- idempotents and projectives -------------------------------------------------------------

def _lift_idempotent(A: FinDimAlgebra, x: DVec, f: DVec, limit: int = 64) -> DVec:
    """Idempotent in fAf congruent to x modulo the radical, via e -> 3e^2 - 2e^3."""
    e = A.mul(A.mul(f, x), f)
    for _ in range(limit):
        e2 = A.mul(e, e)
        if e2 == e:
            return e
        e3 = A.mul(e2, e)
        e = vec_add(vec_scale(e2, 3), e3, -2)
    raise AlgebraError("idempotent lifting did not converge")


def primitive_idempotents(A: FinDimAlgebra, seed: int = 0) -> List[DVec]:
    """A complete set of orthogonal primitive idempotents of A, summing to 1."""
    rng = random.Random(seed)
    rad = radical(A)
    B, reps, rows, piv = A.quotient(rad)
    # decompose 1 in the semisimple quotient
    bar: List[DVec] = []
    f = dict(B.unit)
    reg = regular_module(B)
    while f:
        left_ideal = [B.mul({i: ONE}, f) for i in range(B.dim)]
        li_rows, _ = _span(left_ideal, B.dim)
        sub, inc = reg.submodule(li_rows)
        s_rows = simple_submodule(sub, rng)
        S = []
        for v in s_rows:
            amb: DVec = {}
            for k, c in v.items():
                vec_add(amb, li_rows[k], c)
            S.append(amb)
        S = _span(S, B.dim)[0]
        # e in S with s e = s for all s in S
        eqs, rhs = [], []
        for s in S:
            prods = [B.mul(s, t) for t in S]
            for comp in range(B.dim):
                eqs.append({j: p.get(comp, ZERO) for j, p in enumerate(prods) if p.get(comp)})
                rhs.append(s.get(comp, ZERO))
        sol = solve(SparseMatrix.from_row_dicts(eqs, len(S)), rhs)
        if sol is None:
            raise AlgebraError("no right identity in a minimal left ideal")
        e: DVec = {}
        for c, t in zip(sol, S):
            if c:
                vec_add(e, t, c)
        e = B.mul(f, e)
        bar.append(e)
        f = vec_sub(f, e)
    # lift to A inside the complement of the already lifted idempotents
    lifted: List[DVec] = []
    f_A = dict(A.unit)
    for k, eb in enumerate(bar):
        if k == len(bar) - 1:
            lifted.append(f_A)
            break
        x = {reps[i]: c for i, c in eb.items()}
        e = _lift_idempotent(A, x, f_A)
        lifted.append(e)
        f_A = vec_sub(f_A, e)
    return lifted


def left_ideal_module(A: FinDimAlgebra, e: DVec, name: str = "") -> Tuple[FDModule, List[DVec]]:
    reg = regular_module(A)
    rows = _span([A.mul({i: ONE}, e) for i in range(A.dim)], A.dim)[0]
    P, _ = reg.submodule(rows, name)
    return P, rows


def projective_indecomposables(A: FinDimAlgebra, seed: int = 0) -> List[FDModule]:
    return [left_ideal_module(A, e, f"P{k}")[0] for k, e in enumerate(primitive_idempotents(A, seed))]


def top(M: FDModule) -> Tuple[FDModule, SparseMatrix]:
    return M.quotient(M.radical_subspace(), f"top({M.name})")


@dataclass
class ProjectiveCover:
    P: FDModule
    f: SparseMatrix                  # M.dim x P.dim
    summands: List[int]              # indices into the primitive idempotent list
    kernel: List[DVec]
    superfluous: bool


def projective_cover(M: FDModule, seed: int = 0) -> ProjectiveCover:
    A = M.algebra
    idems = primitive_idempotents(A, seed)
    radM = M.radical_subspace()
    chosen: List[Tuple[int, DVec]] = []
    gen_rows: List[DVec] = []
    covered = _echelon(radM)
    for k, e in enumerate(idems):
        eM = _span([_apply(M.rho(e), {j: ONE}) for j in range(M.dim)], M.dim)[0]
        for m in eM:
            if covered.contains(m):
                continue
            chosen.append((k, m))
            gen_rows.append(m)
            sub, _ = M.spin(gen_rows)
            covered = _echelon(list(sub) + list(radM))
        if len(covered) == M.dim:
            pass
    # assemble P = sum of A e_k and the map a e_k -> a e_k m
    blocks = []
    cols: List[DVec] = []
    P = None
    for k, m in chosen:
        Pk, rows = left_ideal_module(A, idems[k], f"P{k}")
        blocks.append(Pk)
        for r in rows:
            cols.append(M.act(r, m))
        P = Pk if P is None else P.direct_sum(Pk)
    if P is None:
        P = FDModule(A, 0, [SparseMatrix.zero(0, 0) for _ in range(A.dim)], "0")
    f = _matrix_from_columns(cols, M.dim) if cols else SparseMatrix.zero(M.dim, 0)
    ker = [_dense_to_vec(v) for v in kernel_basis(f)] if P.dim else []
    radP = _echelon(P.radical_subspace())
    superfluous = all(radP.contains(v) for v in ker)
    return ProjectiveCover(P, f, [k for k, _ in chosen], ker, superfluous)


@dataclass
class ProjectivityWitness:
    projective: bool
    cover: ProjectiveCover
    section: Optional[SparseMatrix] = None   # P.dim x M.dim, f . section = id when projective


def is_projective(M: FDModule, seed: int = 0) -> ProjectivityWitness:
    cov = projective_cover(M, seed)
    if cov.P.dim == M.dim and _invertible(cov.f):
        inv_cols = []
        for j in range(M.dim):
            e = [ZERO] * M.dim
            e[j] = ONE
            inv_cols.append(_dense_to_vec(solve(cov.f, e)))
        return ProjectivityWitness(True, cov, _matrix_from_columns(inv_cols, cov.P.dim))
    return ProjectivityWitness(False, cov)


def direct_summand_test(S: FDModule, W: FDModule, seed: int = 0, tries: int = 8
                        ) -> Optional[Tuple[SparseMatrix, SparseMatrix]]:
    """(iota, pi) with pi . iota = id_S and both module maps, or None."""
    if S.dim == 0:
        return SparseMatrix.zero(W.dim, 0), SparseMatrix.zero(0, W.dim)
    ins = hom_space(S, W)
    outs = hom_space(W, S)
    if not ins or not outs:
        return None
    rng = random.Random(seed)
    for _ in range(tries):
        i = _random_combo(ins, rng, W.dim, S.dim)
        p = _random_combo(outs, rng, S.dim, W.dim)
        pi_i = p @ i
        if _invertible(pi_i):
            inv_cols = []
            for j in range(S.dim):
                e = [ZERO] * S.dim
                e[j] = ONE
                inv_cols.append(_dense_to_vec(solve(pi_i, e)))
            inv = _matrix_from_columns(inv_cols, S.dim)
            return i, inv @ p
    return None


def lifts_through(P: FDModule, E: FDModule, f: SparseMatrix, g: SparseMatrix
                  ) -> Optional[Tuple[SparseMatrix, List[SparseMatrix]]]:
    """Module maps h: P -> E with g h = f, as (particular solution, basis of Hom(P, ker g))."""
    homs = hom_space(P, E)
    n_ent = f.rows * f.cols
    cols = []
    for h in homs:
        gh = g @ h
        cols.append({i * f.cols + j: c for i, j, c in gh.entries()})
    m = _matrix_from_columns(cols, n_ent) if cols else SparseMatrix.zero(n_ent, 0)
    rhs = [ZERO] * n_ent
    for i, j, c in f.entries():
        rhs[i * f.cols + j] = c
    if not homs:
        return (SparseMatrix.zero(E.dim, P.dim), []) if f.is_zero() else None
    sol = solve(m, rhs)
    if sol is None:
        return None
    part = SparseMatrix.zero(E.dim, P.dim)
    for c, h in zip(sol, homs):
        if c:
            part = part + h.scale(c)
    free = []
    for v in kernel_basis(m):
        h = SparseMatrix.zero(E.dim, P.dim)
        for c, hk in zip(v, homs):
            if c:
                h = h + hk.scale(c)
        free.append(h)
    return part, free


def multi_cover(P: FDModule, f: SparseMatrix, E: FDModule, g: SparseMatrix, e: DVec,
                max_n: Optional[int] = None, seed: int = 0, tries: int = 32
                ) -> Optional[Tuple[int, List[SparseMatrix]]]:
    """Smallest n found with lifts h_1..h_n: P -> E of f through g and sum h_i(p_i) = e.

    Each h_i satisfies g h_i = f, so h = (h_1, ..., h_n): P^n -> E has
    g h = f + ... + f.  For fixed points p_i the condition on the lifts is
    linear, so the search runs over tuples of points (basis tuples first,
    then seeded random ones) for n = 1 .. ``max_n`` (default dim E).
    """
    lifted = lifts_through(P, E, f, g)
    if lifted is None:
        return None
    part, free = lifted
    if not e:
        return 0, []
    rng = random.Random(seed)
    limit = max_n or max(E.dim, 1)
    basis = [{j: ONE} for j in range(P.dim)]
    for n in range(1, limit + 1):
        candidates = list(itertools.islice(itertools.combinations_with_replacement(basis, n), tries))
        for _ in range(tries):
            candidates.append(tuple({j: Rational(rng.randint(-5, 5)) for j in range(P.dim)} for _ in range(n)))
        for pts in candidates:
            rhs = dict(e)
            for p in pts:
                vec_add(rhs, _apply(part, p), -1)
            cols = [_apply(F, p) for p in pts for F in free]
            if not cols:
                if rhs:
                    continue
                sol = []
            else:
                m = _matrix_from_columns(cols, E.dim)
                sol = solve(m, [rhs.get(i, ZERO) for i in range(E.dim)])
                if sol is None:
                    continue
            hs = []
            for i in range(n):
                h = part
                for j, F in enumerate(free):
                    c = sol[i * len(free) + j]
                    if c:
                        h = h + F.scale(c)
                hs.append(h)
            return n, hs
    return None


# --- exactness and diagrams -----------------------------------------------------------------

def _image(m: SparseMatrix) -> List[DVec]:
    return _span([_apply(m, {j: ONE}) for j in range(m.cols)], m.rows)[0]


def _kernel(m: SparseMatrix) -> List[DVec]:
    return _span([_dense_to_vec(v) for v in kernel_basis(m)], m.cols)[0]


def check_exact(dims: Sequence[int], maps: Sequence[SparseMatrix], title: str = "exactness",
                zero_ends: bool = True) -> Report:
    """Exactness of V_0 -> V_1 -> ... -> V_k with maps[i]: V_i -> V_{i+1}.

    With ``zero_ends`` the sequence is read as 0 -> V_0 -> ... -> V_k -> 0, so
    the end nodes demand injectivity and surjectivity.
    """
    if len(maps) != len(dims) - 1:
        raise ShapeMismatch("need one map between each pair of consecutive nodes")
    for i, m in enumerate(maps):
        if (m.rows, m.cols) != (dims[i + 1], dims[i]):
            raise ShapeMismatch(f"map {i} is {m.rows}x{m.cols}, expected {dims[i + 1]}x{dims[i]}")
    rep = Report(title)
    for node in range(len(dims)):
        incoming = maps[node - 1] if node > 0 else None
        outgoing = maps[node] if node < len(maps) else None
        if incoming is None and not zero_ends:
            continue
        if outgoing is None and not zero_ends:
            continue
        im = _image(incoming) if incoming is not None else []
        ker = _kernel(outgoing) if outgoing is not None else [{j: ONE} for j in range(dims[node])]
        ker_e, im_e = _echelon(ker), _echelon(im)
        witness = next((v for v in im if not ker_e.contains(v)), None)
        kind = "im-not-in-ker"
        if witness is None:
            witness = next((v for v in ker if not im_e.contains(v)), None)
            kind = "ker-not-in-im"
        res = {} if witness is None else {f"{kind}[{j}]": c for j, c in sorted(witness.items())}
        rep.add("exact", f"exact;node={node}", res)
    return rep


@dataclass
class Diagram:
    nodes: Dict[str, int]
    arrows: Dict[str, Tuple[str, str, SparseMatrix]]
    squares: List[Tuple[List[str], List[str]]] = field(default_factory=list)
    exact: List[List[str]] = field(default_factory=list)

    def compose(self, path: Sequence[str]) -> SparseMatrix:
        """Compose arrows applied left to right (first arrow acts first)."""
        src = self.arrows[path[0]][0]
        out = SparseMatrix.identity(self.nodes[src])
        cur = src
        for name in path:
            s, t, m = self.arrows[name]
            if s != cur:
                raise ShapeMismatch(f"arrow {name} starts at {s}, path is at {cur}")
            out = m @ out
            cur = t
        return out

    def endpoints(self, path: Sequence[str]) -> Tuple[str, str]:
        return self.arrows[path[0]][0], self.arrows[path[-1]][1]


def load_diagram(doc: dict) -> Diagram:
    nodes = {k: int(v) for k, v in doc["nodes"].items()}
    arrows = {}
    for name, a in doc["arrows"].items():
        rows = [[parse_rational(x) for x in row] for row in a["matrix"]]
        s, t = a["source"], a["target"]
        if s not in nodes or t not in nodes:
            raise ShapeMismatch(f"arrow {name} refers to an unknown node")
        if len(rows) != nodes[t] or any(len(r) != nodes[s] for r in rows):
            got = f"{len(rows)}x{len(rows[0]) if rows else 0}"
            raise ShapeMismatch(f"arrow {name} is {got}, expected {nodes[t]}x{nodes[s]}")
        m = SparseMatrix.from_dense(rows, cols=nodes[s]) if rows else SparseMatrix.zero(nodes[t], nodes[s])
        arrows[name] = (s, t, m)
    squares = [(list(sq[0]), list(sq[1])) for sq in doc.get("squares", [])]
    exact = [list(e) for e in doc.get("exact", [])]
    return Diagram(nodes, arrows, squares, exact)


def dump_diagram(d: Diagram) -> dict:
    return {
        "nodes": d.nodes,
        "arrows": {n: {"source": s, "target": t,
                       "matrix": [[fmt_rational(x) for x in row] for row in m.to_dense()]}
                   for n, (s, t, m) in d.arrows.items()},
        "squares": [[a, b] for a, b in d.squares],
        "exact": d.exact,
    }


def check_commutative_diagram(d: Diagram) -> Report:
    rep = Report("diagram")
    for k, (p1, p2) in enumerate(d.squares):
        if d.endpoints(p1) != d.endpoints(p2):
            raise ShapeMismatch(f"square {k}: paths have different endpoints")
        diff = d.compose(p1) - d.compose(p2)
        res = {f"({i},{j})": c for i, j, c in diff.entries()}
        rep.add("commutes", f"square;{k};{'.'.join(p1)}={'.'.join(p2)}", res)
    for k, path in enumerate(d.exact):
        dims = [d.nodes[d.arrows[path[0]][0]]] + [d.nodes[d.arrows[a][1]] for a in path]
        maps = []
        cur = d.arrows[path[0]][0]
        for a in path:
            s, t, m = d.arrows[a]
            if s != cur:
                raise ShapeMismatch(f"exact row {k}: arrow {a} does not continue the path")
            maps.append(m)
            cur = t
        sub = check_exact(dims, maps, zero_ends=True)
        for e in sub.entries:
            e.descriptor = f"row{k}:{'.'.join(path)};{e.descriptor}"
        rep.extend(sub)
    return rep


def ses_radical(A: FinDimAlgebra) -> Tuple[List[int], List[SparseMatrix]]:
    """0 -> rad(A) -> A -> A/rad(A) -> 0 as dims and matrices."""
    reg = regular_module(A)
    rad = radical(A)
    R, inc = reg.submodule(rad)
    Q, proj = reg.quotient(rad)
    return [R.dim, A.dim, Q.dim], [inc, proj]


def algebra_summary(A: FinDimAlgebra, seed: int = 0) -> dict:
    rad = radical(A)
    idems = primitive_idempotents(A, seed)
    projs = [left_ideal_module(A, e)[0] for e in idems]
    return {
        "dimension": A.dim,
        "commutative": A.is_commutative(),
        "radical_dimension": len(rad),
        "radical_nilpotency": nilpotency_index(A, rad),
        "semisimple": not rad,
        "projective_dimensions": sorted(P.dim for P in projs),
        "idempotents": [{A.names[i]: fmt_rational(c) for i, c in sorted(e.items())} for e in idems],
    }


def algebra_from_json_text(text: str) -> FinDimAlgebra:
    return FinDimAlgebra.from_json(json.loads(text))

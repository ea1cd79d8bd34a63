"""Exact sparse linear algebra over the rationals.

Scalars are gmpy2 ``mpq`` rationals when gmpy2 is installed and
:class:`fractions.Fraction` otherwise; both hash and compare alike, so they
mix freely.  Vectors that live in a graded space are plain dicts
``{basis_key: Rational}`` with no stored zeros;
matrices are :class:`SparseMatrix` with integer row/column indices.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

try:
    from gmpy2 import mpq as Rational
except ImportError:  # pragma: no cover
    Rational = Fraction

Vec = Dict[Hashable, Fraction]

ZERO = Rational(0)
ONE = Rational(1)


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into an exact rational (never via float)."""
    if isinstance(text, (Fraction, Rational)):
        return Rational(text)
    if isinstance(text, int):
        return Rational(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string, got {text!r}")
    s = text.strip()
    if not s or any(ch in s for ch in ".eE"):
        raise ValueError(f"not an exact rational: {text!r}")
    try:
        return Rational(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {text!r}") from exc


def fmt_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# --- dict vectors -----------------------------------------------------------

def vec_add(acc: Vec, other: Vec, scale=ONE) -> Vec:
    """In-place ``acc += scale * other``; returns ``acc``."""
    if not scale:
        return acc
    for k, c in other.items():
        v = acc.get(k, ZERO) + scale * c
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)
    return acc


def vec_scale(v: Vec, scale) -> Vec:
    if not scale:
        return {}
    return {k: scale * c for k, c in v.items()}


def vec_sub(a: Vec, b: Vec) -> Vec:
    return vec_add(dict(a), b, -ONE)


def vec_clean(v: Vec) -> Vec:
    return {k: Rational(c) for k, c in v.items() if c}


# --- sparse matrices ----------------------------------------------------------

class SparseMatrix:
    """A rows x cols matrix over Q stored as ``{row: {col: value}}``."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, entries: Iterable[Tuple[int, int, object]] = ()):
        self.rows = rows
        self.cols = cols
        data: Dict[int, Dict[int, Fraction]] = {}
        for i, j, x in entries:
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            x = Rational(x)
            if not x:
                continue
            row = data.setdefault(i, {})
            if j in row:
                raise ValueError(f"duplicate entry ({i}, {j})")
            row[j] = x
        self._data = data

    @classmethod
    def _from_rows(cls, rows: int, cols: int, data: Dict[int, Dict[int, Fraction]]):
        m = cls(rows, cols)
        m._data = {i: r for i, r in data.items() if r}
        return m

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence], cols: Optional[int] = None):
        nrows = len(dense)
        ncols = cols if cols is not None else (len(dense[0]) if nrows else 0)
        return cls(nrows, ncols, ((i, j, x) for i, row in enumerate(dense)
                                  for j, x in enumerate(row) if x))

    @classmethod
    def from_row_dicts(cls, rows: Sequence[Dict[int, Fraction]], cols: int):
        return cls._from_rows(len(rows), cols,
                              {i: {j: Rational(x) for j, x in r.items() if x}
                               for i, r in enumerate(rows)})

    @classmethod
    def identity(cls, n: int):
        return cls(n, n, ((i, i, 1) for i in range(n)))

    @classmethod
    def zero(cls, rows: int, cols: int):
        return cls(rows, cols)

    def row(self, i: int) -> Dict[int, Fraction]:
        return self._data.get(i, {})

    def entries(self) -> List[Tuple[int, int, Fraction]]:
        return [(i, j, x) for i in sorted(self._data) for j, x in sorted(self._data[i].items())]

    def get(self, i: int, j: int) -> Fraction:
        return self._data.get(i, {}).get(j, ZERO)

    def nnz(self) -> int:
        return sum(len(r) for r in self._data.values())

    def to_dense(self) -> List[List[Fraction]]:
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for i, r in self._data.items():
            for j, x in r.items():
                out[i][j] = x
        return out

    def transpose(self) -> "SparseMatrix":
        data: Dict[int, Dict[int, Fraction]] = {}
        for i, r in self._data.items():
            for j, x in r.items():
                data.setdefault(j, {})[i] = x
        return SparseMatrix._from_rows(self.cols, self.rows, data)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        data: Dict[int, Dict[int, Fraction]] = {}
        for i, r in self._data.items():
            acc: Dict[int, Fraction] = {}
            for k, x in r.items():
                for j, y in other._data.get(k, {}).items():
                    v = acc.get(j, ZERO) + x * y
                    if v:
                        acc[j] = v
                    else:
                        acc.pop(j, None)
            if acc:
                data[i] = acc
        return SparseMatrix._from_rows(self.rows, other.cols, data)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self._combine(other, ONE)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self._combine(other, -ONE)

    def _combine(self, other, s):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        data = {i: dict(r) for i, r in self._data.items()}
        for i, r in other._data.items():
            vec_add(data.setdefault(i, {}), r, s)
        return SparseMatrix._from_rows(self.rows, self.cols, data)

    def scale(self, s) -> "SparseMatrix":
        s = Rational(s)
        return SparseMatrix._from_rows(self.rows, self.cols,
                                       {i: vec_scale(r, s) for i, r in self._data.items()})

    def matvec(self, x: Sequence) -> List[Fraction]:
        if len(x) != self.cols:
            raise ValueError("vector length mismatch")
        out = [ZERO] * self.rows
        for i, r in self._data.items():
            out[i] = sum((c * x[j] for j, c in r.items()), ZERO)
        return out

    def is_zero(self) -> bool:
        return not self._data

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries())))

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


# --- elimination ----------------------------------------------------------------

def _eliminate(rows: List[Dict[int, Fraction]], ncols: int):
    """Gauss-Jordan with leftmost-nonzero pivoting.  Returns (rref rows, pivots)."""
    work = [dict(r) for r in rows if r]
    pivots: List[int] = []
    reduced: List[Dict[int, Fraction]] = []
    for col in range(ncols):
        idx = next((k for k, r in enumerate(work) if col in r), None)
        if idx is None:
            continue
        prow = work.pop(idx)
        inv = ONE / prow[col]
        prow = {j: x * inv for j, x in prow.items()}
        for r in work:
            f = r.get(col)
            if f:
                vec_add(r, prow, -f)
        for r in reduced:
            f = r.get(col)
            if f:
                vec_add(r, prow, -f)
        work = [r for r in work if r]
        reduced.append(prow)
        pivots.append(col)
        if not work:
            break
    return reduced, pivots


def rref(m: SparseMatrix) -> Tuple[SparseMatrix, List[int], int]:
    """Reduced row echelon form; zero rows are moved to the bottom."""
    reduced, pivots = _eliminate([m.row(i) for i in range(m.rows)], m.cols)
    out = SparseMatrix._from_rows(m.rows, m.cols, {i: r for i, r in enumerate(reduced)})
    return out, pivots, len(pivots)


def rank(m: SparseMatrix) -> int:
    return rref(m)[2]


def solve(m: SparseMatrix, rhs: Sequence) -> Optional[List[Fraction]]:
    """Some x with ``m x = rhs`` (free variables zero), or None if inconsistent."""
    if len(rhs) != m.rows:
        raise ValueError("rhs length must equal the number of rows")
    aug = []
    for i in range(m.rows):
        r = dict(m.row(i))
        if rhs[i]:
            r[m.cols] = Rational(rhs[i])
        aug.append(r)
    reduced, pivots = _eliminate(aug, m.cols + 1)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [ZERO] * m.cols
    for r, p in zip(reduced, pivots):
        x[p] = r.get(m.cols, ZERO)
    return x


def kernel_basis(m: SparseMatrix) -> List[List[Fraction]]:
    reduced, pivots = _eliminate([m.row(i) for i in range(m.rows)], m.cols)
    pivset = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivset:
            continue
        v = [ZERO] * m.cols
        v[free] = ONE
        for r, p in zip(reduced, pivots):
            c = r.get(free)
            if c:
                v[p] = -c
        basis.append(v)
    return basis


def row_space(rows: Sequence[Dict[int, Fraction]], ncols: int) -> Tuple[List[Dict[int, Fraction]], List[int]]:
    """rref of a list of sparse rows (index-keyed dicts); returns (rows, pivots)."""
    return _eliminate(list(rows), ncols)


def reduce_against(vec: Dict[int, Fraction], rows: Sequence[Dict[int, Fraction]],
                   pivots: Sequence[int]) -> Dict[int, Fraction]:
    """Normal form of ``vec`` modulo the row space of an rref basis."""
    out = dict(vec)
    for r, p in zip(rows, pivots):
        c = out.get(p)
        if c:
            vec_add(out, r, -c)
    return out


def dense_rank(rows: Sequence[Sequence]) -> int:
    return rank(SparseMatrix.from_dense(rows)) if rows else 0


def dense_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(b[0]) if b else 0
    return [[sum((x * b[k][j] for k, x in enumerate(row) if x), ZERO) for j in range(n)] for row in a]


def dense_identity(n: int) -> List[List[Fraction]]:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def dense_inverse(a: Sequence[Sequence]) -> Optional[List[List[Fraction]]]:
    n = len(a)
    aug = []
    for i, row in enumerate(a):
        r = {j: Rational(x) for j, x in enumerate(row) if x}
        r[n + i] = ONE
        aug.append(r)
    reduced, pivots = _eliminate(aug, 2 * n)
    if pivots[:n] != list(range(n)):
        return None
    return [[r.get(n + j, ZERO) for j in range(n)] for r in reduced[:n]]


class EchelonBasis:
    """Incrementally grown row-echelon basis of a subspace of Q^n.

    Each stored row is normalised so that its pivot (its smallest column) is 1.
    :meth:`reduce` returns the unique remainder supported off the pivot columns,
    so it is a canonical normal form modulo the span.
    """

    def __init__(self):
        self.rows: Dict[int, Dict[int, Fraction]] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vec: Dict[int, Fraction]) -> Dict[int, Fraction]:
        out = dict(vec)
        while True:
            hit = [c for c in out if c in self.rows]
            if not hit:
                return out
            c = min(hit)
            vec_add(out, self.rows[c], -out[c])

    def add(self, vec: Dict[int, Fraction]) -> bool:
        r = self.reduce(vec)
        if not r:
            return False
        p = min(r)
        inv = ONE / r[p]
        self.rows[p] = {j: x * inv for j, x in r.items()}
        return True

    def contains(self, vec: Dict[int, Fraction]) -> bool:
        return not self.reduce(vec)

    def pivots(self) -> List[int]:
        return sorted(self.rows)

    def reduced_rows(self) -> List[Dict[int, Fraction]]:
        rows, _ = _eliminate([self.rows[p] for p in sorted(self.rows)], 1 + max(
            (max(r) for r in self.rows.values()), default=-1))
        return rows

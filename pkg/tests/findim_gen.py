"""Random inputs for the finite-dimensional suite, built with sympy only."""

import random

import sympy

from voalab.findim import FDModule
from voalab.linalg import Rational, SparseMatrix


def to_sparse(mat: sympy.Matrix) -> SparseMatrix:
    return SparseMatrix(mat.rows, mat.cols, [(i, j, Rational(int(mat[i, j].p), int(mat[i, j].q)))
                                             for i in range(mat.rows) for j in range(mat.cols) if mat[i, j] != 0])


def to_sympy(m: SparseMatrix) -> sympy.Matrix:
    return sympy.Matrix(m.rows, m.cols, lambda i, j: sympy.Rational(int(m.get(i, j).numerator),
                                                                    int(m.get(i, j).denominator)))


def random_invertible(n: int, rng: random.Random) -> sympy.Matrix:
    while True:
        m = sympy.Matrix(n, n, lambda i, j: rng.randint(-3, 3))
        if n == 0 or m.det() != 0:
            return m


def conjugate(M: FDModule, rng: random.Random) -> FDModule:
    """The same module in a random basis."""
    B = random_invertible(M.dim, rng)
    Bi = B.inv()
    return FDModule(M.algebra, M.dim, [to_sparse(B * to_sympy(a) * Bi) for a in M.action], M.name)


def random_complex(rng: random.Random, exact: bool):
    """0 -> V_0 -> ... -> V_k -> 0 with d^2 = 0, exact or with homology somewhere."""
    k = rng.randint(2, 4)
    ranks = [0] + [rng.randint(0, 3) for _ in range(k - 1)] + [0]   # rank of the map into node i
    homology = [0] * k
    if not exact:
        homology[rng.randrange(k)] = rng.randint(1, 2)
    dims = [ranks[i] + homology[i] + ranks[i + 1] for i in range(k)]
    bases = [random_invertible(d, rng) for d in dims]
    maps = []
    for i in range(k - 1):
        # node i = K_i (+) H_i (+) C_i; C_i maps onto K_{i+1}
        f = sympy.zeros(dims[i + 1], dims[i])
        off = ranks[i] + homology[i]
        for j in range(ranks[i + 1]):
            f[j, off + j] = 1
        maps.append(bases[i + 1] * f * bases[i].inv())
    return dims, maps


def perturbed(dims, maps, rng: random.Random):
    """Add 1 to a random entry of a random nonempty map."""
    cand = [i for i, m in enumerate(maps) if m.rows and m.cols]
    if not cand:
        return None
    i = rng.choice(cand)
    m = maps[i].copy()
    m[rng.randrange(m.rows), rng.randrange(m.cols)] += 1
    return dims, maps[:i] + [m] + maps[i + 1:]


def exact_by_rank_nullity(dims, maps) -> bool:
    """Independent oracle: d^2 = 0 and dim V_i = rank(in) + rank(out) at every node."""
    for f, g in zip(maps, maps[1:]):
        if not (g * f).is_zero_matrix:
            return False
    for i, d in enumerate(dims):
        r_in = maps[i - 1].rank() if i > 0 else 0
        r_out = maps[i].rank() if i < len(maps) else 0
        if d != r_in + r_out:
            return False
    return True

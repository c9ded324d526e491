"""Exact integer linear algebra: fraction-free elimination, rank with a left
kernel certificate, determinants and adjugates."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    """Divide out the content and make the first nonzero entry positive."""
    g = 0
    for x in v:
        g = math.gcd(g, int(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    out = [int(x) // g for x in v]
    for x in out:
        if x:
            if x < 0:
                out = [-y for y in out]
            break
    return tuple(out)


def _eliminate(M: Sequence[Sequence[int]], track: bool):
    """Bareiss elimination of the rows of M, optionally tracking row operations.

    Returns (rows, ops, pivot_cols, rank) where ops[i] expresses the current row
    i as an integer combination of the original rows.
    """
    rows = [[int(v) for v in row] for row in M]
    m = len(rows)
    ncols = len(rows[0]) if m else 0
    ops = [[int(i == k) for k in range(m)] for i in range(m)] if track else None
    prev = 1
    rank = 0
    pivots = []
    for c in range(ncols):
        if rank == m:
            break
        p = next((i for i in range(rank, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        if p != rank:
            rows[p], rows[rank] = rows[rank], rows[p]
            if track:
                ops[p], ops[rank] = ops[rank], ops[p]
        piv = rows[rank][c]
        for i in range(rank + 1, m):
            a = rows[i][c]
            rows[i] = [(piv * x - a * y) // prev for x, y in zip(rows[i], rows[rank])]
            if track:
                ops[i] = [(piv * x - a * y) // prev for x, y in zip(ops[i], ops[rank])]
        # rows above the pivot row that were already zeroed stay consistent
        prev = piv
        pivots.append(c)
        rank += 1
    return rows, ops, pivots, rank


def rank(M: Sequence[Sequence[int]]) -> int:
    if not M or not M[0]:
        return 0
    return _eliminate(M, track=False)[3]


def rank_mod_p(M: Sequence[Sequence[int]], p: int) -> int:
    rows = [[int(v) % p for v in row] for row in M]
    m = len(rows)
    ncols = len(rows[0]) if m else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [(x * inv) % p for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c]:
                a = rows[i][c]
                rows[i] = [(x - a * y) % p for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == m:
            break
    return r


def exact_rank_with_certificate(M: Sequence[Sequence[int]]):
    """Rank of an integer r x c matrix over Q and, if rank < r, a primitive
    integer vector b != 0 with b^T M = 0.

    Returns ``(rank, b_or_None)``.  For the zero matrix b is the first unit
    vector.
    """
    m = len(M)
    if m == 0:
        return 0, None
    if not M[0]:
        return 0, primitive([1] + [0] * (m - 1))
    rows, ops, _, rk = _eliminate(M, track=True)
    if rk == m:
        return rk, None
    # rows rk.. of the eliminated matrix vanish; their op vectors are kernel vectors
    b = primitive(ops[rk])
    return rk, b


def pivot_columns(M: Sequence[Sequence[int]]) -> list[int]:
    return _eliminate(M, track=False)[2]


def det(M: Sequence[Sequence[int]]) -> int:
    """Determinant by Bareiss elimination with row swaps."""
    n = len(M)
    if n == 0:
        return 1
    a = [[int(v) for v in row] for row in M]
    if any(len(row) != n for row in a):
        raise ValueError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def adjugate(M: Sequence[Sequence[int]]) -> Matrix:
    """Classical adjoint: adj(M) @ M = det(M) * I."""
    n = len(M)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            adj[j][i] = (-1) ** (i + j) * det(minor)
    return adj


def matmul(A, B) -> Matrix:
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def left_kernel_check(b: Sequence[int], M: Sequence[Sequence[int]]) -> bool:
    """True iff b^T M = 0 exactly."""
    if not M:
        return True
    return all(sum(bi * row[c] for bi, row in zip(b, M)) == 0 for c in range(len(M[0])))


def left_nullspace(M: Sequence[Sequence[int]], r: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of {b in Q^r : b^T M = 0} for an r-row matrix M."""
    cols = len(M[0]) if M else 0
    A = [[Fraction(M[i][c]) for i in range(r)] for c in range(cols)]  # M^T
    pivots = []
    row = 0
    for c in range(r):
        k = next((i for i in range(row, len(A)) if A[i][c]), None)
        if k is None:
            continue
        A[row], A[k] = A[k], A[row]
        A[row] = [v / A[row][c] for v in A[row]]
        for i in range(len(A)):
            if i != row and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[row])]
        pivots.append(c)
        row += 1
    basis = []
    for free in (c for c in range(r) if c not in pivots):
        v = [Fraction(0)] * r
        v[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -A[i][free]
        den = math.lcm(*(x.denominator for x in v))
        basis.append(primitive([int(x * den) for x in v]))
    return basis


class IncrementalRank:
    """Column-at-a-time rank tracking for an r-row integer matrix.

    Keeps the first linearly independent columns seen (in feed order), so the
    selected r x r minor is determined by the column stream order.
    """

    def __init__(self, r: int):
        self.r = r
        self._basis: list[list[Fraction]] = []  # reduced copies
        self._pivot_rows: list[int] = []
        self.columns: list[list[int]] = []  # original independent columns
        self.indices: list[int] = []
        self.seen = 0

    @property
    def rank(self) -> int:
        return len(self.columns)

    @property
    def full(self) -> bool:
        return self.rank == self.r

    def add(self, col: Sequence[int]) -> bool:
        idx = self.seen
        self.seen += 1
        if self.full or not any(col):
            return False
        v = [Fraction(int(x)) for x in col]
        for bv, p in zip(self._basis, self._pivot_rows):
            if v[p]:
                f = v[p] / bv[p]
                v = [a - f * b for a, b in zip(v, bv)]
        p = next((i for i, a in enumerate(v) if a), None)
        if p is None:
            return False
        self._basis.append(v)
        self._pivot_rows.append(p)
        self.columns.append([int(x) for x in col])
        self.indices.append(idx)
        return True

    def kernel_vector(self) -> tuple[int, ...]:
        """Primitive b with b^T c = 0 for every column fed so far (rank < r)."""
        if self.full:
            raise ValueError("matrix has full row rank; no kernel vector")
        if not self.columns:
            return primitive([1] + [0] * (self.r - 1))
        M = [list(row) for row in zip(*self.columns)]  # r x rank
        rk, b = exact_rank_with_certificate(M)
        return b

"""Exact integer and rational linear algebra.

Everything here works on Python ints and :class:`fractions.Fraction`; no
floating point is used anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Optional, Sequence

__all__ = [
    "IntMatrix",
    "SmithDecomposition",
    "FinAbGroup",
    "smith_normal_form",
    "hermite_normal_form",
    "cokernel",
    "kernel_basis",
    "primitive",
    "solve_integer",
    "rational_nullspace",
    "rational_solve",
    "rank",
    "det",
    "integral_primitive",
    "dot",
]


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored row-major.

    ``nrows``/``ncols`` are explicit so that matrices with zero rows or
    columns keep their shape.
    """

    nrows: int
    ncols: int
    rows: tuple

    def __post_init__(self):
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise ValueError("row data does not match the declared shape")
        for r in self.rows:
            for a in r:
                if not isinstance(a, int) or isinstance(a, bool):
                    raise TypeError(f"matrix entries must be integers, got {a!r}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], ncols: Optional[int] = None) -> "IntMatrix":
        rows = tuple(tuple(int(a) for a in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for a matrix without rows")
            ncols = len(rows[0])
        return cls(len(rows), ncols, rows)

    @classmethod
    def from_columns(cls, cols: Iterable[Iterable[int]], nrows: int) -> "IntMatrix":
        cols = [tuple(c) for c in cols]
        return cls.from_rows(([c[i] for c in cols] for i in range(nrows)), ncols=len(cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, m: int, n: int) -> "IntMatrix":
        return cls(m, n, tuple((0,) * n for _ in range(m)))

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(self.ncols, self.nrows,
                         tuple(tuple(self.rows[i][j] for i in range(self.nrows))
                               for j in range(self.ncols)))

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list:
        return [self.column(j) for j in range(self.ncols)]

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.columns()
        return IntMatrix(self.nrows, other.ncols,
                         tuple(tuple(dot(r, c) for c in cols) for r in self.rows))

    def apply(self, v: Sequence[int]) -> tuple:
        return tuple(dot(r, v) for r in self.rows)

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)


@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> tuple:
        return tuple(self.S[i, i] for i in range(min(self.S.shape)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


@dataclass(frozen=True)
class FinAbGroup:
    """Finitely generated abelian group Z^free_rank + sum Z/d_i."""

    free_rank: int
    invariant_factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "invariant_factors", tuple(self.invariant_factors))
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")
        prev = 1
        for d in self.invariant_factors:
            if d < 2 or d % prev:
                raise ValueError(f"invariant factors must be >= 2 and form a divisibility "
                                 f"chain, got {self.invariant_factors}")
            prev = d

    @classmethod
    def from_orders(cls, free_rank: int, orders: Sequence[int] = ()) -> "FinAbGroup":
        """Normalize Z^r + sum Z/m_j into invariant factor form."""
        orders = [abs(int(m)) for m in orders]
        if any(m == 0 for m in orders):
            raise ValueError("torsion orders must be nonzero")
        orders = [m for m in orders if m > 1]
        if not orders:
            return cls(free_rank, ())
        n = len(orders)
        D = IntMatrix.from_rows([[orders[i] if i == j else 0 for j in range(n)] for i in range(n)])
        diag = smith_normal_form(D).diagonal
        return cls(free_rank, tuple(d for d in diag if d > 1))

    @property
    def torsion_order(self) -> int:
        return reduce(lambda a, b: a * b, self.invariant_factors, 1)

    @property
    def is_free(self) -> bool:
        return not self.invariant_factors


def _swap_rows(M, i, j):
    M[i], M[j] = M[j], M[i]


def _swap_cols(M, i, j):
    for r in M:
        r[i], r[j] = r[j], r[i]


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    """Smith normal form ``U @ A @ V == S`` with unimodular U and V.

    The pivot is always the smallest-magnitude nonzero entry of the remaining
    block, ties broken lexicographically by (row, column), so the output is a
    deterministic function of A.
    """
    m, n = A.shape
    if m == 0 or n == 0:
        raise ValueError("smith_normal_form needs at least one row and one column")
    S = [list(r) for r in A.rows]
    U = [list(r) for r in IntMatrix.identity(m).rows]
    V = [list(r) for r in IntMatrix.identity(n).rows]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    a = S[i][j]
                    if a and (best is None or abs(a) < best[0]):
                        best = (abs(a), i, j)
            if best is None:
                break
            _, pi, pj = best
            if pi != t:
                _swap_rows(S, t, pi)
                _swap_rows(U, t, pi)
            if pj != t:
                _swap_cols(S, t, pj)
                _swap_cols(V, t, pj)
            p = S[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = S[i][t] // p
                if q:
                    S[i] = [a - q * b for a, b in zip(S[i], S[t])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[t])]
                if S[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = S[t][j] // p
                if q:
                    for r in S:
                        r[j] -= q * r[t]
                    for r in V:
                        r[j] -= q * r[t]
                if S[t][j]:
                    dirty = True
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if S[i][j] % p), None)
            if bad is None:
                break
            i = bad[0]
            S[t] = [a + b for a, b in zip(S[t], S[i])]
            U[t] = [a + b for a, b in zip(U[t], U[i])]
        if best is None:
            break
        if S[t][t] < 0:
            S[t] = [-a for a in S[t]]
            U[t] = [-a for a in U[t]]

    return SmithDecomposition(IntMatrix.from_rows(U, m), IntMatrix.from_rows(S, n),
                              IntMatrix.from_rows(V, n))


def hermite_normal_form(A: IntMatrix) -> IntMatrix:
    """Row-style Hermite normal form (zero rows dropped).

    Pivots are positive and entries above a pivot lie in ``[0, pivot)``.
    """
    M = [list(r) for r in A.rows]
    m, n = A.shape
    out = []
    r = 0
    for c in range(n):
        while True:
            nz = [i for i in range(r, m) if M[i][c]]
            if not nz:
                break
            i0 = min(nz, key=lambda i: (abs(M[i][c]), i))
            _swap_rows(M, r, i0)
            done = True
            for i in range(r + 1, m):
                q = M[i][c] // M[r][c]
                if q:
                    M[i] = [a - q * b for a, b in zip(M[i], M[r])]
                if M[i][c]:
                    done = False
            if done:
                break
        if r < m and M[r][c]:
            if M[r][c] < 0:
                M[r] = [-a for a in M[r]]
            for i in range(r):
                q = M[i][c] // M[r][c]
                if q:
                    M[i] = [a - q * b for a, b in zip(M[i], M[r])]
            r += 1
            if r == m:
                break
    out = [tuple(row) for row in M[:r]]
    return IntMatrix.from_rows(out, n)


def cokernel(A: IntMatrix) -> FinAbGroup:
    """Cokernel of ``A: Z^ncols -> Z^nrows``."""
    m, n = A.shape
    if m == 0:
        return FinAbGroup(0)
    if n == 0:
        return FinAbGroup(m)
    snf = smith_normal_form(A)
    diag = snf.diagonal
    return FinAbGroup(m - snf.rank, tuple(d for d in diag if d > 1))


def kernel_basis(A: IntMatrix) -> IntMatrix:
    """Saturated basis (as columns) of the integer kernel of ``A``.

    The basis is normalized so that its transpose is in Hermite normal form.
    """
    m, n = A.shape
    if n == 0:
        return IntMatrix.zeros(0, 0)
    if m == 0 or A.is_zero():
        return IntMatrix.identity(n)
    snf = smith_normal_form(A)
    r = snf.rank
    cols = [snf.V.column(j) for j in range(r, n)]
    if not cols:
        return IntMatrix.zeros(n, 0)
    H = hermite_normal_form(IntMatrix.from_rows(cols, n))
    return H.T


def primitive(v: Sequence[int]) -> tuple:
    g = reduce(gcd, (abs(int(a)) for a in v), 0)
    if g == 0:
        raise ValueError("no primitive direction: zero vector")
    return tuple(int(a) // g for a in v)


def integral_primitive(v: Sequence) -> tuple:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    fr = [Fraction(a) for a in v]
    den = reduce(lambda a, b: a * b // gcd(a, b), (f.denominator for f in fr), 1)
    return primitive([int(f * den) for f in fr])


def solve_integer(A: IntMatrix, b: Sequence[int]) -> Optional[tuple]:
    """An integer solution of ``A x = b`` or ``None`` if there is none."""
    m, n = A.shape
    if len(b) != m:
        raise ValueError("right-hand side has the wrong length")
    if n == 0:
        return () if all(x == 0 for x in b) else None
    if m == 0:
        return (0,) * n
    snf = smith_normal_form(A)
    c = snf.U.apply(b)
    y = [0] * n
    for i in range(m):
        d = snf.S[i, i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d:
                return None
            y[i] = c[i] // d
    return snf.V.apply(y)


def _rref(rows: Sequence[Sequence], ncols: int):
    M = [[Fraction(a) for a in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        pv = M[r][c]
        M[r] = [a / pv for a in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: Sequence[Sequence], ncols: Optional[int] = None) -> int:
    rows = list(rows)
    if not rows:
        return 0
    return len(_rref(rows, ncols if ncols is not None else len(rows[0]))[1])


def rational_nullspace(rows: Sequence[Sequence], ncols: int) -> list:
    """Basis of ``{x : r.x = 0 for r in rows}`` as primitive integer vectors."""
    R, pivots = _rref(list(rows), ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(integral_primitive(v))
    return basis


def rational_solve(A_rows: Sequence[Sequence], b: Sequence) -> Optional[tuple]:
    """A rational solution of ``A x = b`` (free variables set to 0) or None."""
    if not A_rows:
        return None if any(x != 0 for x in b) else ()
    n = len(A_rows[0])
    aug = [list(r) + [bi] for r, bi in zip(A_rows, b)]
    R, pivots = _rref(aug, n + 1)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(R, pivots):
        x[pc] = row[n]
    return tuple(x)


def det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant (Bareiss fraction-free elimination)."""
    n = len(rows)
    if n == 0:
        return 1
    M = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]

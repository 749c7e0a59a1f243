"""Exact integer/rational matrix primitives.

Matrices are immutable tuples of int rows.  Everything here is exact:
arbitrary-precision ints, Fractions where division is unavoidable, no
floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional

Matrix = tuple  # tuple[tuple[int, ...], ...]


def freeze(rows) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def thaw(mat):
    return [list(row) for row in mat]


def shape(mat):
    return (len(mat), len(mat[0]) if mat else 0)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(mat) -> Matrix:
    rows, cols = shape(mat)
    return tuple(tuple(mat[i][j] for i in range(rows)) for j in range(cols))


def matmul(a, b) -> Matrix:
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {shape(a)} @ {shape(b)}")
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(ca)) for j in range(cb))
        for i in range(ra)
    )


def matvec(mat, vec) -> tuple:
    rows, cols = shape(mat)
    if cols != len(vec):
        raise ValueError("shape mismatch in matvec")
    return tuple(sum(mat[i][j] * vec[j] for j in range(cols)) for i in range(rows))


def columns(mat):
    return [tuple(row[j] for row in mat) for j in range(shape(mat)[1])]


def from_columns(cols) -> Matrix:
    if not cols:
        return ()
    n = len(cols[0])
    return tuple(tuple(int(col[i]) for col in cols) for i in range(n))


def xgcd(a: int, b: int):
    """Return (g, x, y) with g = gcd(a, b) >= 0 and a*x + b*y = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def vec_gcd(vec) -> int:
    g = 0
    for x in vec:
        g = gcd(g, abs(int(x)))
    return g


def det(mat) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    n, m = shape(mat)
    if n != m:
        raise ValueError("det needs a square matrix")
    if n == 0:
        return 1
    a = thaw(mat)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return 0
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_unimodular(mat) -> bool:
    n, m = shape(mat)
    return n == m and det(mat) in (1, -1)


def solve_rational(mat, rhs) -> Optional[tuple]:
    """Solve mat @ x = rhs exactly.

    mat must have full column rank; returns a tuple of Fractions, or None
    when the system is inconsistent.
    """
    rows, cols = shape(mat)
    if len(rhs) != rows:
        raise ValueError("rhs length mismatch")
    a = [[Fraction(mat[i][j]) for j in range(cols)] + [Fraction(rhs[i])] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if len(pivots) < cols:
        raise ValueError("matrix does not have full column rank")
    for i in range(r, rows):
        if a[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = a[i][cols]
    return tuple(x)


def solve_integer(mat, rhs) -> Optional[tuple]:
    """Integer solution of mat @ x = rhs (full column rank), else None."""
    sol = solve_rational(mat, rhs)
    if sol is None or any(f.denominator != 1 for f in sol):
        return None
    return tuple(int(f) for f in sol)


def inv_unimodular(mat) -> Matrix:
    """Exact inverse of a unimodular integer matrix."""
    n, m = shape(mat)
    if n != m:
        raise ValueError("inverse needs a square matrix")
    cols = []
    for j in range(n):
        e = tuple(1 if i == j else 0 for i in range(n))
        col = solve_integer(mat, e)
        if col is None:
            raise ValueError("matrix is not unimodular")
        cols.append(col)
    return from_columns(cols)


class _Transformed:
    """Mutable SNF worker tracking U, U^-1, V, V^-1 alongside A."""

    def __init__(self, mat):
        self.rows, self.cols = shape(mat)
        self.a = thaw(mat)
        self.u = thaw(identity(self.rows))
        self.uinv = thaw(identity(self.rows))
        self.v = thaw(identity(self.cols))
        self.vinv = thaw(identity(self.cols))

    def swap_rows(self, i, j):
        if i == j:
            return
        self.a[i], self.a[j] = self.a[j], self.a[i]
        self.u[i], self.u[j] = self.u[j], self.u[i]
        for row in self.uinv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i, j):
        if i == j:
            return
        for row in self.a:
            row[i], row[j] = row[j], row[i]
        for row in self.v:
            row[i], row[j] = row[j], row[i]
        self.vinv[i], self.vinv[j] = self.vinv[j], self.vinv[i]

    def add_row(self, i, j, c):
        # row_i += c * row_j
        if c == 0:
            return
        self.a[i] = [x + c * y for x, y in zip(self.a[i], self.a[j])]
        self.u[i] = [x + c * y for x, y in zip(self.u[i], self.u[j])]
        for row in self.uinv:
            row[j] -= c * row[i]

    def add_col(self, j, i, c):
        # col_j += c * col_i
        if c == 0:
            return
        for row in self.a:
            row[j] += c * row[i]
        for row in self.v:
            row[j] += c * row[i]
        self.vinv[i] = [x - c * y for x, y in zip(self.vinv[i], self.vinv[j])]

    def negate_row(self, i):
        self.a[i] = [-x for x in self.a[i]]
        self.u[i] = [-x for x in self.u[i]]
        for row in self.uinv:
            row[i] = -row[i]

    def _pivot(self, t):
        best = None
        where = None
        for i in range(t, self.rows):
            for j in range(t, self.cols):
                x = self.a[i][j]
                if x != 0 and (best is None or abs(x) < best):
                    best = abs(x)
                    where = (i, j)
        return where

    def reduce(self):
        a = self.a
        t = 0
        limit = min(self.rows, self.cols)
        while t < limit:
            where = self._pivot(t)
            if where is None:
                break
            self.swap_rows(t, where[0])
            self.swap_cols(t, where[1])
            while True:
                for i in range(t + 1, self.rows):
                    if a[i][t]:
                        self.add_row(i, t, -(a[i][t] // a[t][t]))
                        if a[i][t]:
                            self.swap_rows(t, i)
                for j in range(t + 1, self.cols):
                    if a[t][j]:
                        self.add_col(j, t, -(a[t][j] // a[t][t]))
                        if a[t][j]:
                            self.swap_cols(t, j)
                if all(a[i][t] == 0 for i in range(t + 1, self.rows)) and all(
                    a[t][j] == 0 for j in range(t + 1, self.cols)
                ):
                    break
            if a[t][t] < 0:
                self.negate_row(t)
            t += 1
        # enforce the divisibility chain d_1 | d_2 | ...
        changed = True
        while changed:
            changed = False
            for k in range(limit - 1):
                dk, dn = a[k][k], a[k + 1][k + 1]
                if dk != 0 and dn % dk != 0:
                    self.add_col(k, k + 1, 1)
                    self._requeue(k)
                    changed = True
                    break

    def _requeue(self, t):
        # re-clear the 2x2 block created by the divisibility fix
        a = self.a
        while True:
            where = self._pivot(t)
            i, j = where
            self.swap_rows(t, i)
            self.swap_cols(t, j)
            while True:
                for i in range(t + 1, self.rows):
                    if a[i][t]:
                        self.add_row(i, t, -(a[i][t] // a[t][t]))
                        if a[i][t]:
                            self.swap_rows(t, i)
                for j in range(t + 1, self.cols):
                    if a[t][j]:
                        self.add_col(j, t, -(a[t][j] // a[t][t]))
                        if a[t][j]:
                            self.swap_cols(t, j)
                if all(a[i][t] == 0 for i in range(t + 1, self.rows)) and all(
                    a[t][j] == 0 for j in range(t + 1, self.cols)
                ):
                    break
            if a[t][t] < 0:
                self.negate_row(t)
            t += 1
            if t >= min(self.rows, self.cols) or self._pivot(t) is None:
                break


def snf_transforms(mat):
    """Smith normal form with transforms.

    Returns (U, Uinv, D, V, Vinv) with U @ mat @ V == D, U/V unimodular,
    and the diagonal of D a nonnegative divisibility chain.
    """
    rows, cols = shape(mat)
    if rows == 0 or cols == 0:
        ident_r, ident_c = identity(rows), identity(cols)
        return ident_r, ident_r, freeze(mat) if rows else (), ident_c, ident_c
    worker = _Transformed(mat)
    worker.reduce()
    u, uinv = freeze(worker.u), freeze(worker.uinv)
    v, vinv = freeze(worker.v), freeze(worker.vinv)
    d = freeze(worker.a)
    if matmul(matmul(u, mat), v) != d:
        raise AssertionError("SNF transform bookkeeping broke")
    return u, uinv, d, v, vinv


def smith_diagonal(mat) -> tuple:
    _, _, d, _, _ = snf_transforms(mat)
    rows, cols = shape(d)
    return tuple(d[i][i] for i in range(min(rows, cols)))


def kernel_basis(mat) -> Matrix:
    """Columns spanning the full integer kernel of mat (saturated), HNF-canonical."""
    rows, cols = shape(mat)
    if cols == 0:
        return ()
    _, _, d, v, _ = snf_transforms(mat)
    rank = sum(1 for i in range(min(rows, cols)) if d[i][i] != 0)
    cols_v = columns(v)[rank:]
    if not cols_v:
        return tuple(() for _ in range(cols))
    canon = hnf_rows(transpose(from_columns(cols_v)))
    basis = transpose(canon)
    for col in columns(basis):
        if any(x != 0 for x in matvec(mat, col)):
            raise AssertionError("kernel basis check failed")
    return basis


def hnf_rows(mat) -> Matrix:
    """Row-style Hermite normal form of the row lattice; zero rows dropped.

    Pivots are positive, entries below a pivot are zero and entries above
    are reduced into [0, pivot).
    """
    rows, cols = shape(mat)
    a = thaw(mat)
    r = 0
    for c in range(cols):
        # gcd the column below r into one row
        pivot = None
        for i in range(r, len(a)):
            if a[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        for i in range(r + 1, len(a)):
            while a[i][c] != 0:
                q = a[r][c] // a[i][c]
                a[r] = [x - q * y for x, y in zip(a[r], a[i])]
                a[r], a[i] = a[i], a[r]
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == len(a):
            break
    return tuple(tuple(row) for row in a[:r])


def saturation(cols_mat) -> Matrix:
    """Saturation of the column span inside Z^n (double annihilator)."""
    ann = kernel_basis(transpose(cols_mat))
    return kernel_basis(transpose(ann))


def random_unimodular(n: int, rng, steps: int = 12) -> Matrix:
    """Random unimodular matrix from elementary ops (deterministic given rng)."""
    m = thaw(identity(n))
    for _ in range(steps):
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i == j:
            continue
        c = rng.randint(-3, 3)
        m[i] = [x + c * y for x, y in zip(m[i], m[j])]
    return freeze(m)

"""Exact integer matrices and the Smith normal form.

Everything here works on Python ints, so entries never overflow and no
floating point is involved.  The Smith normal form is the workhorse behind
every homology computation in the package: kernels, images, integer linear
solves and lattice membership are all read off from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence


class IntegerMatrix:
    """Immutable rows x cols matrix with arbitrary-precision integer entries."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, entries: Iterable[int] = ()):
        data = tuple(int(e) for e in entries)
        if not data and rows * cols:
            data = (0,) * (rows * cols)
        if rows < 0 or cols < 0 or len(data) != rows * cols:
            raise ValueError(f"expected {rows}x{cols} entries, got {len(data)}")
        self.rows = rows
        self.cols = cols
        self._data = data

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntegerMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, (e for r in rows for e in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, (1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntegerMatrix":
        cols = len(columns)
        return cls(rows, cols, (columns[j][i] for i in range(rows) for j in range(cols)))

    @property
    def entries(self) -> tuple[int, ...]:
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return self._data[i * self.cols + j]

    def row(self, i: int) -> list[int]:
        return list(self._data[i * self.cols:(i + 1) * self.cols])

    def column(self, j: int) -> list[int]:
        return [self._data[i * self.cols + j] for i in range(self.rows)]

    def tolist(self) -> list[list[int]]:
        return [self.row(i) for i in range(self.rows)]

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(self.cols, self.rows,
                             (self[i, j] for j in range(self.cols) for i in range(self.rows)))

    T = property(transpose)

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        a = self.tolist()
        bcols = [other.column(j) for j in range(other.cols)]
        out = []
        for r in a:
            nz = [(k, v) for k, v in enumerate(r) if v]
            for c in bcols:
                out.append(sum(v * c[k] for k, v in nz))
        return IntegerMatrix(self.rows, other.cols, out)

    def apply(self, vec: Sequence[int]) -> list[int]:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        nz = [(k, v) for k, v in enumerate(vec) if v]
        return [sum(self._data[i * self.cols + k] * v for k, v in nz) for i in range(self.rows)]

    def __add__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntegerMatrix(self.rows, self.cols, (a + b for a, b in zip(self._data, other._data)))

    def __sub__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntegerMatrix(self.rows, self.cols, (a - b for a, b in zip(self._data, other._data)))

    def __neg__(self) -> "IntegerMatrix":
        return IntegerMatrix(self.rows, self.cols, (-a for a in self._data))

    def scale(self, k: int) -> "IntegerMatrix":
        return IntegerMatrix(self.rows, self.cols, (k * a for a in self._data))

    def mod(self, m: int) -> "IntegerMatrix":
        return IntegerMatrix(self.rows, self.cols, (a % m for a in self._data))

    def is_zero(self) -> bool:
        return not any(self._data)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntegerMatrix":
        return IntegerMatrix(len(rows), len(cols), (self[i, j] for i in rows for j in cols))

    def hstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch")
        return IntegerMatrix.from_rows([self.row(i) + other.row(i) for i in range(self.rows)],
                                       self.cols + other.cols)

    def vstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return IntegerMatrix(self.rows + other.rows, self.cols, self._data + other._data)

    def max_abs(self) -> int:
        return max((abs(a) for a in self._data), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        return f"IntegerMatrix({self.rows}, {self.cols}, {self.tolist()})"


def determinant(a: IntegerMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if a.rows != a.cols:
        raise ValueError("determinant of a non-square matrix")
    n = a.rows
    if n == 0:
        return 1
    m = a.tolist()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class SmithDecomposition:
    """``U @ source @ V == D`` with U, V unimodular and D in Smith form."""

    U: IntegerMatrix
    D: IntegerMatrix
    V: IntegerMatrix
    source: IntegerMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i, i] for i in range(min(self.D.rows, self.D.cols))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    @property
    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d]


def smith_normal_form(a: IntegerMatrix) -> SmithDecomposition:
    """Smith normal form with unimodular transforms.

    Pivoting always picks the smallest nonzero absolute value in the
    remaining block, ties broken by (column, row) order, so the output is a
    deterministic function of the input.
    """
    m, n = a.rows, a.cols
    d = a.tolist()
    # U is accumulated as rows, V as columns, so that U @ a @ V = d holds throughout.
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    vcols = [[1 if i == j else 0 for i in range(n)] for j in range(n)]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        vcols[i], vcols[j] = vcols[j], vcols[i]

    def add_row(src, dst, q):
        # row[dst] += q * row[src]
        rs, rd = d[src], d[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        us, ud = u[src], u[dst]
        for k in range(m):
            if us[k]:
                ud[k] += q * us[k]

    def add_col(src, dst, q):
        for r in d:
            if r[src]:
                r[dst] += q * r[src]
        vs, vd = vcols[src], vcols[dst]
        for k in range(n):
            if vs[k]:
                vd[k] += q * vs[k]

    def negate_row(i):
        d[i] = [-x for x in d[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(m, n):
        best = None
        for j in range(t, n):
            for i in range(t, m):
                x = d[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)

        while True:
            pivot = d[t][t]
            done = True
            for i in range(t + 1, m):
                if d[i][t]:
                    q = d[i][t] // pivot
                    add_row(t, i, -q)
                    if d[i][t]:
                        done = False
            for j in range(t + 1, n):
                if d[t][j]:
                    q = d[t][j] // pivot
                    add_col(t, j, -q)
                    if d[t][j]:
                        done = False
            if done:
                # Divisibility: pivot must divide every entry of the remaining block.
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if d[i][j] % pivot:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(bad, t, 1)
                continue
            # Move the smallest remainder in row/column t onto the pivot.
            cand = [(abs(d[i][t]), 0, i) for i in range(t, m) if d[i][t]]
            cand += [(abs(d[t][j]), 1, j) for j in range(t + 1, n) if d[t][j]]
            _, kind, idx = min(cand)
            if kind == 0 and idx != t:
                swap_rows(t, idx)
            elif kind == 1:
                swap_cols(t, idx)
        if d[t][t] < 0:
            negate_row(t)
        t += 1

    U = IntegerMatrix.from_rows(u, m)
    V = IntegerMatrix.from_columns(vcols, n)
    D = IntegerMatrix.from_rows(d, n)
    return SmithDecomposition(U=U, D=D, V=V, source=a)


def determinant_divisors(a: IntegerMatrix) -> list[int]:
    """Invariant factors from gcds of minors, d_1 ... d_i = gcd(i x i minors).

    Exponential in the matrix size; an independent oracle for small inputs.
    """
    from itertools import combinations

    prods = [1]
    for size in range(1, min(a.rows, a.cols) + 1):
        g = 0
        for rows in combinations(range(a.rows), size):
            for cols in combinations(range(a.cols), size):
                g = gcd(g, determinant(a.submatrix(rows, cols)))
                if g == 1:
                    break
            if g == 1:
                break
        if g == 0:
            break
        prods.append(g)
    return [prods[i] // prods[i - 1] for i in range(1, len(prods))]


def rank(a: IntegerMatrix) -> int:
    return smith_normal_form(a).rank


def integer_kernel(a: IntegerMatrix) -> IntegerMatrix:
    """Columns form a Z-basis of {x in Z^cols : a x = 0}."""
    snf = smith_normal_form(a)
    r = snf.rank
    cols = [snf.V.column(j) for j in range(r, a.cols)]
    return IntegerMatrix.from_columns(cols, a.cols)


def integer_solve(a: IntegerMatrix, b: Sequence[int], snf: SmithDecomposition | None = None) -> list[int] | None:
    """An integer x with a x = b, or None if no integer solution exists."""
    if len(b) != a.rows:
        raise ValueError("right-hand side length mismatch")
    if snf is None:
        snf = smith_normal_form(a)
    ub = snf.U.apply(list(b))
    diag = snf.diagonal
    y = [0] * a.cols
    for i, c in enumerate(ub):
        di = diag[i] if i < len(diag) else 0
        if di == 0:
            if c:
                return None
        else:
            if c % di:
                return None
            y[i] = c // di
    return snf.V.apply(y)


def column_span_contains(basis: IntegerMatrix, vec: Sequence[int]) -> bool:
    return integer_solve(basis, vec) is not None


def column_matrix(vectors: Sequence[Sequence[int]], dim: int) -> IntegerMatrix:
    return IntegerMatrix.from_columns([list(v) for v in vectors], dim)

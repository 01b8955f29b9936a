"""Exact matrix primitives: Bareiss rank, nullspaces, Kronecker products, SVD.

Rank decisions over the rationals and over F_p are exact (no tolerances);
the float lane is served by numpy and a relative singular-value threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rings
from .errors import ValidationError
from .rings import RATIONAL, Ring

DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True)
class Matrix:
    """Dense row-major matrix over a single ring.

    Entries are stored as a flat tuple; the value is immutable after
    construction, so instances are safe to share between threads.
    """

    rows: int
    cols: int
    entries: tuple
    ring: Ring

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValidationError("negative matrix dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise ValidationError(
                f"entry count {len(self.entries)} != {self.rows}x{self.cols}"
            )

    @staticmethod
    def from_rows(rows: Sequence[Sequence], ring: Ring = RATIONAL) -> "Matrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        flat = []
        for row in rows:
            if len(row) != ncols:
                raise ValidationError("ragged rows")
            flat.extend(rings.coerce(v, ring) for v in row)
        return Matrix(nrows, ncols, tuple(flat), ring)

    @staticmethod
    def identity(n: int, ring: Ring = RATIONAL) -> "Matrix":
        one = rings.one(ring)
        zero = rings.zero(ring)
        return Matrix(
            n, n, tuple(one if i == j else zero for i in range(n) for j in range(n)), ring
        )

    @staticmethod
    def zeros(rows: int, cols: int, ring: Ring = RATIONAL) -> "Matrix":
        return Matrix(rows, cols, (rings.zero(ring),) * (rows * cols), ring)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_lists(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        ent = tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows))
        return Matrix(self.cols, self.rows, ent, self.ring)

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_same_ring(self, other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValidationError("shape mismatch in matrix addition")
        ent = tuple(rings.add(a, b, self.ring) for a, b in zip(self.entries, other.entries))
        return Matrix(self.rows, self.cols, ent, self.ring)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _check_same_ring(self, other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValidationError("shape mismatch in matrix subtraction")
        ent = tuple(rings.sub(a, b, self.ring) for a, b in zip(self.entries, other.entries))
        return Matrix(self.rows, self.cols, ent, self.ring)

    def scale(self, c) -> "Matrix":
        c = rings.coerce(c, self.ring)
        ent = tuple(rings.mul(c, a, self.ring) for a in self.entries)
        return Matrix(self.rows, self.cols, ent, self.ring)

    def matmul(self, other: "Matrix") -> "Matrix":
        _check_same_ring(self, other)
        if self.cols != other.rows:
            raise ValidationError("inner dimension mismatch in matmul")
        n, m, k = self.rows, other.cols, self.cols
        a, b = self.entries, other.entries
        out = []
        for i in range(n):
            arow = a[i * k : (i + 1) * k]
            for j in range(m):
                s = sum(arow[t] * b[t * m + j] for t in range(k))
                out.append(s % self.ring.p if self.ring.kind == "fp" else s)
        return Matrix(n, m, tuple(out), self.ring)

    def mul_vector(self, v: Sequence) -> list:
        if len(v) != self.cols:
            raise ValidationError("vector length mismatch")
        out = []
        for i in range(self.rows):
            s = sum(self.entries[i * self.cols + t] * v[t] for t in range(self.cols))
            out.append(s % self.ring.p if self.ring.kind == "fp" else s)
        return out

    def is_zero(self) -> bool:
        return all(rings.is_zero(a, self.ring) for a in self.entries)


def _check_same_ring(a: Matrix, b: Matrix):
    if a.ring != b.ring:
        raise ValidationError(f"ring mismatch: {a.ring} vs {b.ring}")


def stack_rows(blocks: Sequence[Matrix]) -> Matrix:
    """Vertically concatenate matrices with equal column counts."""
    cols = blocks[0].cols
    ring = blocks[0].ring
    ent = []
    rows = 0
    for b in blocks:
        if b.cols != cols:
            raise ValidationError("column mismatch in stack_rows")
        _check_same_ring(blocks[0], b)
        ent.extend(b.entries)
        rows += b.rows
    return Matrix(rows, cols, tuple(ent), ring)


def matrix_from_vectors(vectors: Sequence[Sequence], ring: Ring) -> Matrix:
    """Stack vectors as the rows of a matrix."""
    return Matrix.from_rows([list(v) for v in vectors], ring)


# ---------------------------------------------------------------------------
# exact rank / determinant (Bareiss fraction-free elimination)
# ---------------------------------------------------------------------------

def _clear_denominators(m: Matrix) -> list[list[int]]:
    """Scale each row to integers; row scaling preserves rank."""
    out = []
    for i in range(m.rows):
        row = m.row(i)
        lcm = 1
        for a in row:
            if isinstance(a, Fraction):
                lcm = lcm * a.denominator // math.gcd(lcm, a.denominator)
        out.append([int(a * lcm) if isinstance(a, Fraction) else a * lcm for a in row])
    return out


def _bareiss(rows: list[list[int]]) -> tuple[int, int, int]:
    """Fraction-free elimination in place.

    Pivots are chosen as the first nonzero entry of the trailing submatrix in
    row-major scan order; rows and columns are swapped to bring the pivot to
    the diagonal.  Returns (rank, last_pivot, swap_sign).
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    prev = 1
    sign = 1
    k = 0
    while k < min(m, n):
        pi = pj = -1
        for i in range(k, m):
            ri = rows[i]
            for j in range(k, n):
                if ri[j]:
                    pi, pj = i, j
                    break
            if pi >= 0:
                break
        if pi < 0:
            break
        if pi != k:
            rows[k], rows[pi] = rows[pi], rows[k]
            sign = -sign
        if pj != k:
            for r in rows:
                r[k], r[pj] = r[pj], r[k]
            sign = -sign
        piv = rows[k][k]
        rowk = rows[k]
        for r in range(k + 1, m):
            rowr = rows[r]
            lead = rowr[k]
            if lead:
                for c in range(k + 1, n):
                    rowr[c] = (rowr[c] * piv - lead * rowk[c]) // prev
                rowr[k] = 0
            elif piv != prev:
                # zero-lead rows still need the Sylvester rescale to keep
                # later divisions exact
                for c in range(k + 1, n):
                    rowr[c] = (rowr[c] * piv) // prev
        prev = piv
        k += 1
    return k, prev, sign


def _fp_eliminate(rows: list[list[int]], p: int) -> int:
    """Row echelon over F_p; returns the rank. Mutates rows."""
    m = len(rows)
    n = len(rows[0]) if m else 0
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(m):
            if i != rank and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == m:
            break
    return rank


def rank_exact(m: Matrix) -> int:
    """Exact rank over the rationals or F_p.

    Float matrices are rejected; use rank_numeric for those.
    """
    if m.ring.kind == "float":
        raise ValidationError("rank_exact rejects float matrices; use rank_numeric")
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.ring.kind == "fp":
        return _fp_eliminate(m.to_lists(), m.ring.p)
    rank, _, _ = _bareiss(_clear_denominators(m))
    return rank


def det_exact(m: Matrix):
    """Exact determinant of a square rational or F_p matrix."""
    if m.ring.kind == "float":
        raise ValidationError("det_exact rejects float matrices")
    if m.rows != m.cols:
        raise ValidationError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return rings.one(m.ring)
    if m.ring.kind == "fp":
        p = m.ring.p
        rows = m.to_lists()
        det = 1
        for col in range(n):
            piv = next((i for i in range(col, n) if rows[i][col] % p), None)
            if piv is None:
                return 0
            if piv != col:
                rows[col], rows[piv] = rows[piv], rows[col]
                det = -det % p
            det = (det * rows[col][col]) % p
            inv = pow(rows[col][col], -1, p)
            for i in range(col + 1, n):
                if rows[i][col] % p:
                    f = (rows[i][col] * inv) % p
                    rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[col])]
        return det % p
    scale = Fraction(1)
    int_rows = []
    for i in range(n):
        row = m.row(i)
        lcm = 1
        for a in row:
            if isinstance(a, Fraction):
                lcm = lcm * a.denominator // math.gcd(lcm, a.denominator)
        scale /= lcm
        int_rows.append([int(a * lcm) if isinstance(a, Fraction) else a * lcm for a in row])
    rank, last_pivot, sign = _bareiss(int_rows)
    if rank < n:
        return 0
    det = scale * sign * last_pivot
    return det.numerator if det.denominator == 1 else det


def rref(m: Matrix) -> tuple[list[list], list[int]]:
    """Reduced row echelon form (exact rings); returns (rows, pivot columns)."""
    if m.ring.kind == "float":
        raise ValidationError("rref requires an exact ring")
    rows = [[Fraction(x) if m.ring.kind == "rational" else x for x in m.row(i)] for i in range(m.rows)]
    p = m.ring.p
    nrows, ncols = m.rows, m.cols
    pivots = []
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, nrows):
            if (rows[i][col] % p if p else rows[i][col]) != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][col], -1, p) if p else 1 / rows[r][col]
        rows[r] = [(x * inv) % p if p else x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r:
                f = rows[i][col] % p if p else rows[i][col]
                if f != 0:
                    rows[i] = [
                        (a - f * b) % p if p else a - f * b
                        for a, b in zip(rows[i], rows[r])
                    ]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def nullspace_exact(m: Matrix) -> list[list]:
    """Basis of the right kernel; length cols - rank, with m @ v = 0 exactly."""
    if m.ring.kind == "float":
        raise ValidationError("nullspace_exact requires an exact ring")
    rows, pivots = rref(m)
    p = m.ring.p
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        v = [rings.zero(m.ring)] * m.cols
        v[f] = rings.one(m.ring)
        for r, pc in enumerate(pivots):
            coeff = rows[r][f]
            v[pc] = (-coeff) % p if p else -coeff
        if m.ring.kind == "rational":
            v = [x.numerator if isinstance(x, Fraction) and x.denominator == 1 else x for x in v]
        basis.append(v)
    return basis


def solve_exact(a: Matrix, rhs_cols: Matrix) -> Matrix | None:
    """Solve a @ X = rhs over an exact ring; None if inconsistent.

    When the system is underdetermined the free variables are set to zero.
    """
    _check_same_ring(a, rhs_cols)
    if a.rows != rhs_cols.rows:
        raise ValidationError("row mismatch in solve_exact")
    aug = Matrix(
        a.rows,
        a.cols + rhs_cols.cols,
        tuple(
            a.entries[i * a.cols + j] if j < a.cols else rhs_cols.entries[i * rhs_cols.cols + (j - a.cols)]
            for i in range(a.rows)
            for j in range(a.cols + rhs_cols.cols)
        ),
        a.ring,
    )
    rows, pivots = rref(aug)
    for r, pc in enumerate(pivots):
        if pc >= a.cols:
            return None  # pivot in the rhs block: inconsistent
    out = [[rings.zero(a.ring)] * rhs_cols.cols for _ in range(a.cols)]
    for r, pc in enumerate(pivots):
        for j in range(rhs_cols.cols):
            v = rows[r][a.cols + j]
            if a.ring.kind == "rational" and isinstance(v, Fraction) and v.denominator == 1:
                v = v.numerator
            out[pc][j] = v
    return Matrix.from_rows(out, a.ring)


def invert_exact(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise ValidationError("inverse of a non-square matrix")
    inv = solve_exact(m, Matrix.identity(m.rows, m.ring))
    if inv is None or rank_exact(m) != m.rows:
        raise ValidationError("matrix is singular")
    return inv


# ---------------------------------------------------------------------------
# Kronecker product and the float lane
# ---------------------------------------------------------------------------

def kron(m1: Matrix, m2: Matrix) -> Matrix:
    """Kronecker product; row-block index runs over m1's rows."""
    _check_same_ring(m1, m2)
    r1, c1, r2, c2 = m1.rows, m1.cols, m2.rows, m2.cols
    ent = []
    for i1 in range(r1):
        for i2 in range(r2):
            for j1 in range(c1):
                a = m1.entries[i1 * c1 + j1]
                row2 = m2.entries[i2 * c2 : (i2 + 1) * c2]
                if m1.ring.kind == "fp":
                    ent.extend((a * b) % m1.ring.p for b in row2)
                else:
                    ent.extend(a * b for b in row2)
    return Matrix(r1 * r2, c1 * c2, tuple(ent), m1.ring)


def to_float_array(m: Matrix) -> np.ndarray:
    arr = np.array([float(x) for x in m.entries], dtype=float).reshape(m.rows, m.cols)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("non-finite entries")
    return arr


def singular_values(m: Matrix) -> list[float]:
    """Singular values in descending order, length min(rows, cols)."""
    if m.rows == 0 or m.cols == 0:
        return []
    return [float(s) for s in np.linalg.svd(to_float_array(m), compute_uv=False)]


def rank_numeric(m: Matrix, rel_tol: float = DEFAULT_REL_TOL) -> int:
    """Number of singular values above rel_tol times the largest one."""
    if rel_tol <= 0:
        raise ValidationError("rel_tol must be positive")
    sv = singular_values(m)
    if not sv or sv[0] == 0.0:
        return 0
    return sum(1 for s in sv if s > rel_tol * sv[0])

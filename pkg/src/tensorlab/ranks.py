"""Computable rank notions: flattening ranks, multilinear rank, border-rank
lower bounds, exhaustive rank search over small prime fields, and the
catalecticant ladder for symmetric ranks of binary forms.

Rank over F_p can differ from rank over the complex numbers; every result
here is tagged by the field it was computed in and is never silently
promoted.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import rings
from .errors import CapExceeded, ValidationError
from .linalg import Matrix, nullspace_exact, rank_exact, rank_numeric
from .rings import RATIONAL
from .tensors import Bipartition, DenseTensor, braid, flatten, rank_one

BRUTE_FORCE_PRIMES = (2, 3, 5)
BRUTE_FORCE_MAX_ENTRIES = 64
BRUTE_FORCE_MAX_RANK = 4


@dataclass(frozen=True)
class MultilinearRank:
    """Per-factor flattening ranks (r_1, ..., r_n)."""

    ranks: tuple[int, ...]

    def __iter__(self):
        return iter(self.ranks)


def f_rank(t: DenseTensor, b: Bipartition, rel_tol: float = 1e-8) -> int:
    """Rank of the tensor viewed as a matrix under the given bipartition."""
    m = flatten(t, b)
    if t.ring.kind == "float":
        return rank_numeric(m, rel_tol)
    return rank_exact(m)


def multilinear_rank(t: DenseTensor, rel_tol: float = 1e-8) -> MultilinearRank:
    """Mode-i flattening rank for every factor position i."""
    if t.order < 2:
        raise ValidationError("multilinear rank needs at least 2 factors")
    out = []
    for i in range(t.order):
        out.append(f_rank(t, Bipartition.of([i], t.order), rel_tol))
    return MultilinearRank(tuple(out))


def all_bipartitions(order: int):
    """Every bipartition up to complement (left part containing position 0)."""
    rest = list(range(1, order))
    for k in range(0, order - 1):
        for extra in itertools.combinations(rest, k):
            yield Bipartition.of((0,) + extra, order)


def border_rank_lower_bound(t: DenseTensor, rel_tol: float = 1e-8) -> int:
    """Max flattening rank over all bipartitions: a valid border-rank bound."""
    if t.order < 2:
        raise ValidationError("needs at least 2 factors")
    return max(f_rank(t, b, rel_tol) for b in all_bipartitions(t.order))


def w_state(n: int) -> DenseTensor:
    """Sum over positions k of x⊗...⊗y(at k)⊗...⊗x with x = e1, y = e2.

    A symmetric n-factor binary tensor of border rank 2 whose rank grows
    with n (certified exactly for n = 3 by the F_p search).
    """
    if n < 2:
        raise ValidationError("w_state needs n >= 2")
    shape = (2,) * n
    data = [0] * (2**n)
    for k in range(n):
        data[1 << (n - 1 - k)] = 1  # row-major: factor k contributes 2^(n-1-k)
    return DenseTensor(shape, tuple(data), RATIONAL)


def w_state_certificate(n: int) -> list[list[tuple[int, ...]]]:
    """Explicit n-term rank-one summands reconstructing w_state(n)."""
    if n < 2:
        raise ValidationError("w_state needs n >= 2")
    x, y = (1, 0), (0, 1)
    return [[y if j == k else x for j in range(n)] for k in range(n)]


# ---------------------------------------------------------------------------
# exhaustive rank over F_p
#
# Rank-one summands are normalized so every factor except the last has its
# first nonzero coordinate equal to 1; the last factor is then determined by
# a linear solve, so the search runs over subsets of "prefix" candidates and
# asks whether the slice span of the tensor lies inside their span.
# ---------------------------------------------------------------------------

def _normalized_vectors(dim: int, p: int):
    """All vectors in F_p^dim with first nonzero coordinate equal to 1."""
    for lead in range(dim):
        tail_len = dim - lead - 1
        for tail in itertools.product(range(p), repeat=tail_len):
            yield (0,) * lead + (1,) + tail


def _reduce_mod_p(vec, basis: dict[int, tuple], p: int) -> Optional[tuple]:
    """Reduce vec against an echelon basis {pivot: row}; None if it vanishes."""
    v = list(vec)
    for piv in sorted(basis):
        c = v[piv] % p
        if c:
            row = basis[piv]
            for i in range(piv, len(v)):
                v[i] = (v[i] - c * row[i]) % p
    for x in v:
        if x % p:
            inv = pow(x, -1, p)
            return tuple((y * inv) % p for y in v)
    return None


def _basis_insert(vec: tuple, basis: dict[int, tuple], p: int) -> bool:
    """Insert vec into the echelon basis; True iff it enlarged the span."""
    red = _reduce_mod_p(vec, basis, p)
    if red is None:
        return False
    piv = next(i for i, x in enumerate(red) if x % p)
    basis[piv] = red
    return True


COVER_SEARCH_NODE_CAP = 2_000_000


def exact_rank_bruteforce(t: DenseTensor, r_max: int) -> Optional[int]:
    """Smallest r <= r_max with t a sum of r rank-one tensors over F_p.

    Returns None when the rank exceeds r_max ("exceeds r_max").  Exact over
    F_p; for characteristic-0 tensors this is a lower-bound heuristic only.
    A rank-one summand is normalized so every factor but one has leading
    coordinate 1; the free factor is then determined by a linear solve, so
    the search covers the span of the tensor's slices by normalized prefix
    candidates.  The solved-for factor is the one with the largest mode
    rank, which keeps the search slack (r minus slice-span dimension) as
    small as possible.
    """
    if t.ring.kind != "fp" or t.ring.p not in BRUTE_FORCE_PRIMES:
        raise ValidationError(f"brute force needs F_p with p in {BRUTE_FORCE_PRIMES}")
    if len(t.data) > BRUTE_FORCE_MAX_ENTRIES:
        raise CapExceeded(
            f"tensor has {len(t.data)} entries; brute-force cap is {BRUTE_FORCE_MAX_ENTRIES}"
        )
    if r_max > BRUTE_FORCE_MAX_RANK:
        raise CapExceeded(f"r_max {r_max} exceeds the brute-force cap {BRUTE_FORCE_MAX_RANK}")
    if t.order < 2:
        raise ValidationError("rank search needs at least 2 factors")
    p = t.ring.p
    if t.is_zero():
        return 0

    mode_ranks = [
        rank_exact(flatten(t, Bipartition.of((i,), t.order))) for i in range(t.order)
    ]

    def prefix_count(mode: int) -> int:
        out = 1
        for j, d in enumerate(t.shape):
            if j != mode:
                out *= (p**d - 1) // (p - 1)
        return out

    solve_mode = max(range(t.order), key=lambda i: (mode_ranks[i], -prefix_count(i)))
    if solve_mode != t.order - 1:
        perm = [i for i in range(t.order) if i != solve_mode] + [solve_mode]
        t = braid(t, perm)

    m = flatten(t, Bipartition.of(tuple(range(t.order - 1)), t.order))
    # column space of the prefix flattening, as an echelon basis
    slice_basis: dict[int, tuple] = {}
    for j in range(m.cols):
        col = tuple(m.entries[i * m.cols + j] % p for i in range(m.rows))
        _basis_insert(col, slice_basis, p)
    s_dim = len(slice_basis)

    prefix_dims = t.shape[:-1]
    candidates = []
    for vecs in itertools.product(*(_normalized_vectors(d, p) for d in prefix_dims)):
        w = rank_one(vecs, t.ring) if len(vecs) > 1 else None
        flat = w.data if w is not None else vecs[0]
        candidates.append(tuple(x % p for x in flat))

    # slack-0 levels only ever pick candidates inside the slice span
    inside = [w for w in candidates if _reduce_mod_p(w, slice_basis, p) is None]

    for r in range(max(s_dim, 1), r_max + 1):
        slack = r - s_dim
        if slack == 0:
            if _cover_search(inside, slice_basis, r, p):
                return r
            continue
        work = math.comb(len(candidates), slack) * len(candidates)
        if work > COVER_SEARCH_NODE_CAP:
            raise CapExceeded(
                f"cover search at r = {r} needs about {work} candidate scans, "
                f"over the cap {COVER_SEARCH_NODE_CAP}"
            )
        if _cover_search(candidates, slice_basis, r, p):
            return r
    return None


def _cover_search(candidates, slice_basis, r, p) -> bool:
    """DFS for r candidates whose span contains the slice span."""

    def dfs(start: int, depth: int, span: dict[int, tuple], joint: dict[int, tuple]) -> bool:
        deficiency = len(joint) - len(span)
        if deficiency == 0:
            return True
        if depth == r or deficiency > r - depth:
            return False
        for i in range(start, len(candidates)):
            w = candidates[i]
            span2 = dict(span)
            if not _basis_insert(w, span2, p):
                continue  # already in the span: picking it cannot help
            joint2 = dict(joint)
            _basis_insert(w, joint2, p)
            if dfs(i + 1, depth + 1, span2, joint2):
                return True
        return False

    return dfs(0, 0, {}, dict(slice_basis))


# ---------------------------------------------------------------------------
# symmetric rank of binary forms via the catalecticant (Hankel) ladder
# ---------------------------------------------------------------------------

def normalized_form_coefficients(coeffs: Sequence) -> list[Fraction]:
    """Divide out binomials: F = sum_k C(d,k) a_k x^(d-k) y^k."""
    d = len(coeffs) - 1
    if d < 0 or all(c == 0 for c in coeffs):
        raise ValidationError("zero binary form")
    return [Fraction(c) / math.comb(d, k) for k, c in enumerate(coeffs)]


def catalecticant(coeffs: Sequence, s: int) -> Matrix:
    """Hankel matrix [a_(i+j)] with rows 0..d-s and columns 0..s."""
    a = normalized_form_coefficients(coeffs)
    d = len(coeffs) - 1
    if not 1 <= s <= d:
        raise ValidationError("catalecticant level out of range")
    return Matrix.from_rows(
        [[a[i + j] for j in range(s + 1)] for i in range(d - s + 1)], RATIONAL
    )


def _poly_deg(c: Sequence[Fraction]) -> int:
    for i in range(len(c) - 1, -1, -1):
        if c[i] != 0:
            return i
    return -1


def _poly_gcd_degree(a: list[Fraction], b: list[Fraction]) -> int:
    """Degree of gcd(a, b) over the rationals (Euclid; -1 for gcd of zeros)."""
    a, b = list(a), list(b)
    while _poly_deg(b) >= 0:
        da, db = _poly_deg(a), _poly_deg(b)
        if da < db:
            a, b = b, a
            continue
        lead = a[da] / b[db]
        for i in range(db + 1):
            a[da - db + i] -= lead * b[i]
        a = a[: _poly_deg(a) + 1] if _poly_deg(a) >= 0 else []
        if _poly_deg(a) < _poly_deg(b):
            a, b = b, a
    return _poly_deg(a)


def is_squarefree_binary(g: Sequence) -> bool:
    """Square-freeness of the homogeneous binary form sum_j g_j u^(s-j) v^j."""
    s = len(g) - 1
    coeffs = [Fraction(c) for c in g]
    univ = coeffs[:]  # P(t) = g(1, t)
    deg = _poly_deg(univ)
    if deg < 0:
        return False
    if s - deg > 1:  # root at (0:1) with multiplicity >= 2
        return False
    if deg == 0:
        return True  # c*u^s with s <= 1 by the multiplicity check above
    univ = univ[: deg + 1]
    deriv = [i * univ[i] for i in range(1, deg + 1)]
    return _poly_gcd_degree(univ, deriv) == 0


def _squarefree_kernel_vector(kernel: list[list], s: int) -> Optional[list[Fraction]]:
    """Search the kernel span for a square-free degree-s form.

    Affine charts over each basis vector with a grid wide enough to beat the
    degree of the discriminant locus, so the search is complete.
    """
    dim = len(kernel)
    if dim == 0:
        return None
    grid = range(max(2 * s - 1, 1))
    budget = 200000
    for lead in range(dim):
        others = [kernel[j] for j in range(dim) if j != lead]
        combos = itertools.product(grid, repeat=len(others))
        for ts in combos:
            budget -= 1
            if budget < 0:
                raise CapExceeded("square-free kernel search exceeded 200000 candidates")
            vec = [Fraction(x) for x in kernel[lead]]
            for t, other in zip(ts, others):
                if t:
                    for i, x in enumerate(other):
                        vec[i] += t * Fraction(x)
            if any(vec) and is_squarefree_binary(vec):
                return vec
    return None


def apolar_kernel_form(coeffs: Sequence) -> tuple[int, Optional[list[Fraction]]]:
    """Smallest level s with a square-free kernel form, plus the form.

    Returns (d, None) when no level below d admits one; binary forms always
    have rank at most d, attained by the x^(d-1)y family.
    """
    d = len(coeffs) - 1
    normalized_form_coefficients(coeffs)  # validates nonzero
    for s in range(1, d):
        kernel = nullspace_exact(catalecticant(coeffs, s))
        if kernel:
            g = _squarefree_kernel_vector(kernel, s)
            if g is not None:
                return s, g
    return d, None


def sylvester_symmetric_rank_binary(coeffs: Sequence) -> int:
    """Symmetric (Waring) rank of a binary form given by its coefficients.

    coeffs[k] is the coefficient of x^(d-k) y^k; the rank is the first
    catalecticant level whose kernel contains a square-free form, or d when
    no such level exists below d.
    """
    s, _ = apolar_kernel_form(coeffs)
    return s

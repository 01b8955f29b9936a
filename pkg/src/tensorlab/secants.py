"""Secant-variety dimensions by Terracini's lemma, with exact arithmetic.

The dimension of the r-th secant variety of X is computed as the rank of the
stacked affine tangent spaces at r random rational points.  A single sample
can only under-report the generic dimension, so the maximum over a few
independently seeded trials is a certified lower bound that is generically
exact.  Supported varieties: Segre, Veronese, Segre-Veronese, subspace
(Tucker) and symmetric subspace varieties.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import CapExceeded, TensorlabError, ValidationError
from .linalg import Matrix, rank_exact
from .rings import RATIONAL
from .tensors import DenseTensor, mode_apply, multi_indices, rank_one

AMBIENT_CAP = 20000
RESAMPLE_LIMIT = 10


# ---------------------------------------------------------------------------
# variety specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarietySpec:
    """Symbolic description of the embedded variety X.

    kind: "segre" | "veronese" | "segre_veronese" | "subspace" | "sym_subspace"
    dims: per-factor vector-space dimensions (a single entry for veronese
          and sym_subspace)
    degrees: per-factor symmetric degrees where applicable
    ranks: multilinear ranks for subspace kinds
    """

    kind: str
    dims: tuple[int, ...]
    degrees: tuple[int, ...] = ()
    ranks: tuple[int, ...] = ()

    def __post_init__(self):
        if any(d < 1 for d in self.dims) or not self.dims:
            raise ValidationError("dims must be positive")
        if any(d < 1 for d in self.degrees):
            raise ValidationError("degrees must be >= 1")
        if self.kind not in ("segre", "veronese", "segre_veronese", "subspace", "sym_subspace"):
            raise ValidationError(f"unknown variety kind {self.kind!r}")
        if self.kind == "segre_veronese" and len(self.dims) != len(self.degrees):
            raise ValidationError("one degree per factor is required")
        if self.kind in ("veronese", "sym_subspace") and len(self.degrees) != 1:
            raise ValidationError("a single degree is required")
        if self.kind in ("subspace", "sym_subspace"):
            if len(self.ranks) != len(self.dims):
                raise ValidationError("one rank per factor is required")
            for r, d in zip(self.ranks, self.dims):
                if not 1 <= r <= d:
                    raise ValidationError(f"rank {r} outside [1, {d}]")
            if self.kind == "subspace" and len(self.ranks) == 3:
                r1, r2, r3 = self.ranks
                if r1 > r2 * r3 or r2 > r1 * r3 or r3 > r1 * r2:
                    raise ValidationError("multiranks must satisfy r_i <= r_j r_k")
        elif self.ranks:
            raise ValidationError(f"{self.kind} takes no ranks")

    def __str__(self):
        dims = ",".join(str(d) for d in self.dims)
        if self.kind == "segre":
            return f"segre:{dims}"
        if self.kind == "veronese":
            return f"veronese:{self.dims[0]},{self.degrees[0]}"
        if self.kind == "segre_veronese":
            return f"segver:{dims}@{','.join(str(e) for e in self.degrees)}"
        if self.kind == "subspace":
            return f"sub:{dims}@{','.join(str(r) for r in self.ranks)}"
        return f"symsub:{self.dims[0]}@{self.ranks[0]},{self.degrees[0]}"


def segre(dims: Sequence[int]) -> VarietySpec:
    return VarietySpec("segre", tuple(dims))


def veronese(n: int, d: int) -> VarietySpec:
    return VarietySpec("veronese", (n,), (d,))


def segre_veronese(dims: Sequence[int], degrees: Sequence[int]) -> VarietySpec:
    return VarietySpec("segre_veronese", tuple(dims), tuple(degrees))


def subspace(dims: Sequence[int], ranks: Sequence[int]) -> VarietySpec:
    return VarietySpec("subspace", tuple(dims), (), tuple(ranks))


def sym_subspace(n: int, r: int, d: int) -> VarietySpec:
    return VarietySpec("sym_subspace", (n,), (d,), (r,))


def parse_variety(text: str) -> VarietySpec:
    """Parse the compact CLI grammar, e.g. segre:2,2,2 or sub:4,4,4@2,2,2."""
    try:
        head, _, rest = text.partition(":")
        if head == "segre":
            return segre([int(x) for x in rest.split(",")])
        if head == "veronese":
            n, d = (int(x) for x in rest.split(","))
            return veronese(n, d)
        if head == "segver":
            dims, degs = rest.split("@")
            return segre_veronese(
                [int(x) for x in dims.split(",")], [int(x) for x in degs.split(",")]
            )
        if head == "sub":
            dims, ranks = rest.split("@")
            return subspace([int(x) for x in dims.split(",")], [int(x) for x in ranks.split(",")])
        if head == "symsub":
            n, tail = rest.split("@")
            r, d = (int(x) for x in tail.split(","))
            return sym_subspace(int(n), r, d)
    except (ValueError, ValidationError) as exc:
        raise ValidationError(f"bad variety spec {text!r}: {exc}") from exc
    raise ValidationError(f"bad variety spec {text!r}: unknown kind {head!r}")


# ---------------------------------------------------------------------------
# monomial bookkeeping for the symmetric coordinates
# ---------------------------------------------------------------------------

def exponents(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """Degree-d exponent tuples in nvars variables, lex-descending."""
    if nvars == 1:
        return [(degree,)]
    out = []
    for e in range(degree, -1, -1):
        out.extend((e,) + tail for tail in exponents(nvars - 1, degree - e))
    return out


def multinomial(d: int, alpha: Sequence[int]) -> int:
    out = math.factorial(d)
    for a in alpha:
        out //= math.factorial(a)
    return out


def sym_dim(n: int, d: int) -> int:
    return math.comb(n + d - 1, d)


def _power_coeff_vector(v: Sequence[int], d: int, exps: list[tuple[int, ...]], drop: Optional[int] = None):
    """Coefficients of l_v^d (or l_v^(d-1) * x_drop when drop is given)."""
    out = []
    for alpha in exps:
        if drop is None:
            c = multinomial(d, alpha)
            for vi, a in zip(v, alpha):
                c *= vi**a
        else:
            if alpha[drop] == 0:
                out.append(0)
                continue
            beta = list(alpha)
            beta[drop] -= 1
            c = multinomial(d - 1, beta)
            for vi, a in zip(v, beta):
                c *= vi**a
        out.append(c)
    return out


# dense multivariate polynomials as {exponent tuple: coefficient}

def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def _poly_pow(a: dict, k: int, nvars: int) -> dict:
    out = {(0,) * nvars: 1}
    for _ in range(k):
        out = _poly_mul(out, a)
    return out


def _linear_form(coeffs: Sequence[int], nvars: int) -> dict:
    out = {}
    for i, c in enumerate(coeffs):
        if c:
            e = [0] * nvars
            e[i] = 1
            out[tuple(e)] = c
    return out


def _poly_coeff_vector(poly: dict, exps: list[tuple[int, ...]]) -> list:
    return [poly.get(alpha, 0) for alpha in exps]


# ---------------------------------------------------------------------------
# dimensions of the ambient space and of the affine cone over X
# ---------------------------------------------------------------------------

def ambient_affine_dim(spec: VarietySpec) -> int:
    if spec.kind == "segre":
        return math.prod(spec.dims)
    if spec.kind == "veronese":
        return sym_dim(spec.dims[0], spec.degrees[0])
    if spec.kind == "segre_veronese":
        return math.prod(sym_dim(n, d) for n, d in zip(spec.dims, spec.degrees))
    if spec.kind == "subspace":
        return math.prod(spec.dims)
    return sym_dim(spec.dims[0], spec.degrees[0])


def cone_dim(spec: VarietySpec) -> int:
    """Dimension of the affine cone over X at a generic point."""
    if spec.kind == "segre":
        return 1 + sum(d - 1 for d in spec.dims)
    if spec.kind == "veronese":
        return spec.dims[0]
    if spec.kind == "segre_veronese":
        return 1 + sum(d - 1 for d in spec.dims)
    if spec.kind == "subspace":
        return math.prod(spec.ranks) + sum(
            r * (d - r) for r, d in zip(spec.ranks, spec.dims)
        )
    n, r, d = spec.dims[0], spec.ranks[0], spec.degrees[0]
    return sym_dim(r, d) + r * (n - r)


# ---------------------------------------------------------------------------
# point sampling and tangent spaces
# ---------------------------------------------------------------------------

def _random_vector(rng: random.Random, dim: int) -> tuple[int, ...]:
    for _ in range(RESAMPLE_LIMIT):
        v = tuple(rng.randint(-10, 10) for _ in range(dim))
        if any(v):
            return v
    raise TensorlabError("failed to sample a nonzero vector after 10 attempts")


def _random_matrix_with_nonzero_columns(rng: random.Random, rows: int, cols: int) -> Matrix:
    col_vectors = [_random_vector(rng, rows) for _ in range(cols)]
    return Matrix.from_rows([[col_vectors[j][i] for j in range(cols)] for i in range(rows)], RATIONAL)


def sample_params(spec: VarietySpec, rng: random.Random):
    """Random integer point parameters for the variety, nonzero per factor."""
    if spec.kind == "segre":
        return [_random_vector(rng, d) for d in spec.dims]
    if spec.kind == "veronese":
        return [_random_vector(rng, spec.dims[0])]
    if spec.kind == "segre_veronese":
        return [_random_vector(rng, d) for d in spec.dims]
    if spec.kind == "subspace":
        core_shape = spec.ranks
        for _ in range(RESAMPLE_LIMIT):
            core = DenseTensor(
                core_shape,
                tuple(rng.randint(-10, 10) for _ in range(math.prod(core_shape))),
                RATIONAL,
            )
            if not core.is_zero():
                break
        else:
            raise TensorlabError("failed to sample a nonzero core tensor")
        factors = [
            _random_matrix_with_nonzero_columns(rng, d, r)
            for d, r in zip(spec.dims, spec.ranks)
        ]
        return core, factors
    # sym_subspace: a degree-d core polynomial in r variables plus one factor map
    n, r, d = spec.dims[0], spec.ranks[0], spec.degrees[0]
    core_exps = exponents(r, d)
    for _ in range(RESAMPLE_LIMIT):
        core = {e: rng.randint(-10, 10) for e in core_exps}
        core = {e: c for e, c in core.items() if c}
        if core:
            break
    else:
        raise TensorlabError("failed to sample a nonzero core polynomial")
    factor = _random_matrix_with_nonzero_columns(rng, n, r)
    return core, factor


def affine_tangent_basis(spec: VarietySpec, params) -> list[tuple]:
    """Spanning set of the affine tangent space at the parametrized point."""
    if spec.kind == "segre":
        return _segre_tangent(spec.dims, params)
    if spec.kind == "veronese":
        return _veronese_tangent(spec.dims[0], spec.degrees[0], params[0])
    if spec.kind == "segre_veronese":
        return _segre_veronese_tangent(spec.dims, spec.degrees, params)
    if spec.kind == "subspace":
        core, factors = params
        return _subspace_tangent(spec, core, factors)
    core, factor = params
    return _sym_subspace_tangent(spec, core, factor)


def _check_nonzero_vectors(vectors):
    for v in vectors:
        if not any(v):
            raise ValidationError("degenerate parameters: zero factor vector")


def _segre_tangent(dims, vectors) -> list[tuple]:
    _check_nonzero_vectors(vectors)
    out = []
    for pos, dim in enumerate(dims):
        for j in range(dim):
            basis_vec = tuple(1 if i == j else 0 for i in range(dim))
            factors = [basis_vec if q == pos else tuple(vectors[q]) for q in range(len(dims))]
            out.append(rank_one(factors, RATIONAL).data)
    return out


def _veronese_tangent(n, d, v) -> list[tuple]:
    _check_nonzero_vectors([v])
    exps = exponents(n, d)
    return [tuple(_power_coeff_vector(v, d, exps, drop=j)) for j in range(n)]


def _segre_veronese_tangent(dims, degrees, vectors) -> list[tuple]:
    _check_nonzero_vectors(vectors)
    exps_per_factor = [exponents(n, d) for n, d in zip(dims, degrees)]
    points = [
        _power_coeff_vector(v, d, exps)
        for v, d, exps in zip(vectors, degrees, exps_per_factor)
    ]
    out = []
    for pos, (n, d) in enumerate(zip(dims, degrees)):
        for j in range(n):
            parts = [
                _power_coeff_vector(vectors[q], degrees[q], exps_per_factor[q], drop=j)
                if q == pos
                else points[q]
                for q in range(len(dims))
            ]
            vec = parts[0]
            for part in parts[1:]:
                vec = [a * b for a in vec for b in part]
            out.append(tuple(vec))
    return out


def _subspace_tangent(spec: VarietySpec, core: DenseTensor, factors: list[Matrix]) -> list[tuple]:
    n_factors = len(spec.dims)
    out = []
    # core directions: products of one column per factor
    cols = [
        [[f.entries[i * f.cols + j] for i in range(f.rows)] for j in range(f.cols)]
        for f in factors
    ]
    for jidx in multi_indices(spec.ranks):
        vecs = [cols[q][jidx[q]] for q in range(n_factors)]
        if any(not any(v) for v in vecs):
            raise ValidationError("degenerate parameters: zero factor column")
        out.append(rank_one(vecs, RATIONAL).data)
    # factor directions: Leibniz terms with one factor map replaced by E_kl
    for pos in range(n_factors):
        partial = core
        for q in range(n_factors):
            if q != pos:
                partial = mode_apply(partial, q, factors[q])
        d, r = spec.dims[pos], spec.ranks[pos]
        for k in range(d):
            for l in range(r):
                unit = Matrix(
                    d, r, tuple(1 if (i, j) == (k, l) else 0 for i in range(d) for j in range(r)), RATIONAL
                )
                out.append(mode_apply(partial, pos, unit).data)
    return out


def _sym_subspace_tangent(spec: VarietySpec, core: dict, factor: Matrix) -> list[tuple]:
    n, r, d = spec.dims[0], spec.ranks[0], spec.degrees[0]
    exps_n = exponents(n, d)
    forms = [
        _linear_form([factor.entries[i * r + l] for i in range(n)], n) for l in range(r)
    ]
    for l in range(r):
        if not forms[l]:
            raise ValidationError("degenerate parameters: zero factor column")
    out = []
    form_powers = [[_poly_pow(forms[l], k, n) for k in range(d + 1)] for l in range(r)]
    # core directions: substituted monomials of degree d in the r forms
    for beta in exponents(r, d):
        poly = {(0,) * n: 1}
        for l, b in enumerate(beta):
            if b:
                poly = _poly_mul(poly, form_powers[l][b])
        out.append(tuple(_poly_coeff_vector(poly, exps_n)))
    # factor directions: d/dA[k,l] of core(l_1, ..., l_r) = dg/dy_l (l) * x_k
    for l in range(r):
        dgdl: dict = {}
        for beta, c in core.items():
            if beta[l] == 0:
                continue
            poly = {(0,) * n: c * beta[l]}
            for q, b in enumerate(beta):
                k = b - 1 if q == l else b
                if k:
                    poly = _poly_mul(poly, form_powers[q][k])
            for e, cc in poly.items():
                dgdl[e] = dgdl.get(e, 0) + cc
        for k in range(n):
            xk = [0] * n
            xk[k] = 1
            shifted = _poly_mul(dgdl, {tuple(xk): 1}) if dgdl else {}
            out.append(tuple(_poly_coeff_vector(shifted, exps_n)))
    return out


# ---------------------------------------------------------------------------
# secant dimensions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecantReport:
    variety: str
    r: int
    ambient_affine_dim: int
    computed_affine_dim: int
    expected_affine_dim: int
    defect: int
    trials: int

    def as_dict(self) -> dict:
        return {
            "variety": self.variety,
            "r": self.r,
            "ambient_affine_dim": self.ambient_affine_dim,
            "computed_affine_dim": self.computed_affine_dim,
            "expected_affine_dim": self.expected_affine_dim,
            "defect": self.defect,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class GenericRankResult:
    rank: int
    profile: tuple[SecantReport, ...] = field(default_factory=tuple)


def _check_ambient(spec: VarietySpec) -> int:
    ambient = ambient_affine_dim(spec)
    if ambient > AMBIENT_CAP:
        raise CapExceeded(f"ambient dimension {ambient} exceeds the cap {AMBIENT_CAP}")
    return ambient


def secant_dimension(spec: VarietySpec, r: int, trials: int = 3, seed: int = 0) -> SecantReport:
    """Dimension of the affine cone over the r-th secant variety of X.

    Stacks tangent bases at r random rational points, takes the exact rank,
    and keeps the maximum over the trials.
    """
    if r < 1:
        raise ValidationError("r must be >= 1")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    ambient = _check_ambient(spec)
    expected = min(r * cone_dim(spec), ambient)
    computed = 0
    for trial in range(trials):
        rng = random.Random(f"terracini:{spec}:{r}:{seed}:{trial}")
        rows = []
        for _ in range(r):
            rows.extend(affine_tangent_basis(spec, sample_params(spec, rng)))
        rank = rank_exact(Matrix.from_rows([list(v) for v in rows], RATIONAL))
        computed = max(computed, rank)
    if computed > expected:
        raise TensorlabError(
            f"Terracini rank {computed} exceeds the expected dimension {expected};"
            " this is a bug"
        )
    return SecantReport(str(spec), r, ambient, computed, expected, expected - computed, trials)


def generic_rank(spec: VarietySpec, trials: int = 3, seed: int = 0) -> GenericRankResult:
    """Smallest r whose secant variety fills the ambient space.

    The returned profile carries the full defect data for all r up to and
    including the generic rank.
    """
    ambient = _check_ambient(spec)
    profile = []
    r = 1
    while True:
        report = secant_dimension(spec, r, trials=trials, seed=seed)
        profile.append(report)
        if report.computed_affine_dim == ambient:
            return GenericRankResult(r, tuple(profile))
        if r > ambient:
            raise TensorlabError("secant dimensions failed to saturate; this is a bug")
        r += 1


def defect_scan(
    specs: Sequence[VarietySpec],
    r_max: Optional[int] = None,
    trials: int = 3,
    seed: int = 0,
) -> list[SecantReport]:
    """Secant reports for every (variety, r) cell of the family.

    For each variety, r runs from 1 to saturation (or to r_max if given).
    """
    reports = []
    for spec in specs:
        ambient = _check_ambient(spec)
        r = 1
        while r_max is None or r <= r_max:
            report = secant_dimension(spec, r, trials=trials, seed=seed)
            reports.append(report)
            if report.computed_affine_dim == ambient:
                break
            if r > ambient:
                raise TensorlabError("secant dimensions failed to saturate; this is a bug")
            r += 1
    return reports

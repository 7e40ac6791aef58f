"""Shortest vectors and point counts on 3-dimensional unimodular lattices.

This is the artifact's computational proxy for Mahler compactness: a basis
is held together with a flow log-scale, lambda_1 (sup-norm) is certified by
complete Fincke-Pohst enumeration inside a Euclidean ball of radius
sqrt(3) * (current best sup-norm), and K_delta membership is the inclusive
comparison lambda_1 >= delta.

The norm of record is the supremum norm; the Euclidean ball is only the
enumeration vehicle (in dimension 3, ||v||_2 <= sqrt(3) ||v||_inf, so the
inflated ball contains every candidate that could beat the incumbent).

All functions are pure; enumeration keeps only local state, so batches can
be mapped in parallel.
"""

from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass

import mpmath

from .errors import BudgetError, InvalidInputError, PrecisionError, ReductionError
from .scalars import IntegerVec3, Matrix3, ScalarMode, bigfloat, exact_ratio

LLL_DELTA = 0.99
LLL_ITERATION_CAP = 100_000
GSO_RANGE_CAP = 1e12  # dynamic range of GSO lengths tolerated in f64
COUNT_BUDGET = 10_000_000
ESCALATED_BITS = 256


@dataclass(frozen=True)
class LatticeBasis3:
    """Columns of ``matrix`` span the lattice; ``log_scale`` defers the flow
    exponentials (row 1 carries e^{2 log_scale}, rows 2-3 carry e^{-log_scale})
    so that translate bases can be stored without overflow.
    """

    matrix: Matrix3
    log_scale: float = 0.0

    @classmethod
    def identity(cls) -> "LatticeBasis3":
        return cls(((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)))

    @classmethod
    def from_columns(cls, cols, log_scale: float = 0.0) -> "LatticeBasis3":
        rows = tuple(tuple(cols[j][i] for j in range(3)) for i in range(3))
        return cls(rows, log_scale)

    def effective_columns(self, bits: int | None = None):
        """Basis columns with the flow scaling applied, as floats (or mpf
        when ``bits`` is given, converting entries through their exact
        binary/rational values)."""
        if bits is None:
            row_scale = (math.exp(2 * self.log_scale),
                         math.exp(-self.log_scale),
                         math.exp(-self.log_scale))
            return [
                [float(self.matrix[i][j]) * row_scale[i] for i in range(3)]
                for j in range(3)
            ]
        with mpmath.workprec(bits):
            ell = mpmath.mpf(self.log_scale)
            row_scale = (mpmath.exp(2 * ell), mpmath.exp(-ell), mpmath.exp(-ell))
            cols = []
            for j in range(3):
                col = []
                for i in range(3):
                    n, d = exact_ratio(self.matrix[i][j])
                    col.append(mpmath.mpf(n) / mpmath.mpf(d) * row_scale[i])
                cols.append(col)
            return cols

    def determinant(self) -> float:
        cols = self.effective_columns()
        a, b, c = cols
        return (
            a[0] * (b[1] * c[2] - b[2] * c[1])
            - b[0] * (a[1] * c[2] - a[2] * c[1])
            + c[0] * (a[1] * b[2] - a[2] * b[1])
        )


@dataclass(frozen=True)
class ShortVectorResult:
    """A certified first minimum: ``vector`` holds the integer coefficients
    with respect to the basis columns, ``lambda1`` the sup-norm length."""

    vector: IntegerVec3
    lambda1: float
    certified: bool
    escalated: bool = False


# -- generic small linear algebra (works for float and mpf entries) ---------

def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _sup(u):
    return max(abs(u[0]), abs(u[1]), abs(u[2]))


def _combine(cols, x):
    return [
        cols[0][i] * x[0] + cols[1][i] * x[1] + cols[2][i] * x[2]
        for i in range(3)
    ]


def gram_schmidt(cols):
    """Euclidean Gram-Schmidt data of three column vectors.

    Returns (bstar, mu, norm2) with mu[i][j] = <b_i, b*_j>/<b*_j, b*_j> for
    j < i.  Raises on numerically singular input.
    """
    bstar = []
    mu = [[0.0] * 3 for _ in range(3)]
    norm2 = []
    for i in range(3):
        v = list(cols[i])
        for j in range(i):
            if norm2[j] <= 0:
                raise ReductionError("numerically singular basis in Gram-Schmidt")
            mu[i][j] = _dot(cols[i], bstar[j]) / norm2[j]
            for k in range(3):
                v[k] = v[k] - mu[i][j] * bstar[j][k]
        bstar.append(v)
        norm2.append(_dot(v, v))
    if norm2[2] <= 0:
        raise ReductionError("numerically singular basis in Gram-Schmidt")
    return bstar, mu, norm2


def _nearest_int(x) -> int:
    if isinstance(x, float):
        return round(x)
    return int(mpmath.nint(x))


def lll_reduce(basis, delta: float = LLL_DELTA, bits: int | None = None):
    """LLL-reduce the basis columns; returns (reduced_columns, transform).

    The transform U is an exact integer matrix with det(U) = +-1 and
    reduced = basis . U (column convention), so the lattice is unchanged.
    """
    if isinstance(basis, LatticeBasis3):
        cols = basis.effective_columns(bits)
    else:
        cols = [list(c) for c in basis]
    u = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]  # columns of U, as int lists

    def size_reduce(k, j, bstar, mu, norm2):
        m = _nearest_int(mu[k][j])
        if m != 0:
            for i in range(3):
                cols[k][i] = cols[k][i] - m * cols[j][i]
                u[k][i] = u[k][i] - m * u[j][i]

    bstar, mu, norm2 = gram_schmidt(cols)
    k = 1
    steps = 0
    while k < 3:
        steps += 1
        if steps > LLL_ITERATION_CAP:
            raise ReductionError(
                "LLL did not converge within the iteration cap; "
                "the basis is pathologically conditioned")
        for j in range(k - 1, -1, -1):
            size_reduce(k, j, bstar, mu, norm2)
        bstar, mu, norm2 = gram_schmidt(cols)
        if norm2[k] >= (delta - mu[k][k - 1] ** 2) * norm2[k - 1]:
            k += 1
        else:
            cols[k], cols[k - 1] = cols[k - 1], cols[k]
            u[k], u[k - 1] = u[k - 1], u[k]
            bstar, mu, norm2 = gram_schmidt(cols)
            k = max(k - 1, 1)

    det_u = (
        u[0][0] * (u[1][1] * u[2][2] - u[1][2] * u[2][1])
        - u[1][0] * (u[0][1] * u[2][2] - u[0][2] * u[2][1])
        + u[2][0] * (u[0][1] * u[1][2] - u[0][2] * u[1][1])
    )
    if det_u not in (1, -1):
        raise ReductionError("LLL transform lost unimodularity")
    return cols, u


def _enumerate_half_ball(cols, bound2, budget: int = COUNT_BUDGET):
    """Yield integer coefficient triples x != 0 (one per +-pair) with
    ||cols . x||_2^2 <= bound2, by Fincke-Pohst interval nesting."""
    bstar, mu, norm2 = gram_schmidt(cols)
    sqrt = lambda v: v ** 0.5 if v > 0 else v * 0
    count = 0

    a2 = sqrt(bound2 / norm2[2])
    for x2 in range(0, math.floor(float(a2)) + 1):
        r2 = bound2 - x2 * x2 * norm2[2]
        if r2 < 0:
            continue
        c1 = mu[2][1] * x2
        half1 = sqrt(r2 / norm2[1])
        lo1 = math.ceil(float(-half1 - c1))
        hi1 = math.floor(float(half1 - c1))
        for x1 in range(lo1, hi1 + 1):
            if x2 == 0 and x1 < 0:
                continue
            t1 = x1 + c1
            r1 = r2 - t1 * t1 * norm2[1]
            if r1 < 0:
                continue
            c0 = mu[1][0] * x1 + mu[2][0] * x2
            half0 = sqrt(r1 / norm2[0])
            lo0 = math.ceil(float(-half0 - c0))
            hi0 = math.floor(float(half0 - c0))
            for x0 in range(lo0, hi0 + 1):
                if x2 == 0 and x1 == 0 and x0 <= 0:
                    continue
                count += 1
                if count > budget:
                    raise BudgetError(
                        "lattice enumeration exceeded its budget; "
                        "reduce the radius")
                yield (x0, x1, x2)


def _transform_apply(u, x):
    return tuple(
        u[0][i] * x[0] + u[1][i] * x[1] + u[2][i] * x[2] for i in range(3)
    )


def _needs_escalation(cols, cap: float = GSO_RANGE_CAP) -> bool:
    try:
        _, _, norm2 = gram_schmidt(cols)
    except ReductionError:
        return True
    small = min(norm2)
    if small <= 0:
        return True
    return float((max(norm2) / small) ** 0.5) > cap


def shortest_vector(basis: LatticeBasis3, budget: int = COUNT_BUDGET) -> ShortVectorResult:
    """The exact sup-norm first minimum, by complete enumeration.

    LLL preprocessing bounds the search; every lattice vector whose sup-norm
    could undercut the incumbent lies in the Euclidean ball of radius
    sqrt(3) times the incumbent, and that ball is enumerated to exhaustion,
    so the result is certified.  If the GSO lengths span more than ~1e12 in
    f64 the computation is rebuilt in 256-bit floats (escalated flag).
    """
    if not isinstance(basis, LatticeBasis3):
        basis = LatticeBasis3(tuple(tuple(row) for row in basis))
    bits = None
    cols = basis.effective_columns()
    if _needs_escalation(cols):
        bits = ESCALATED_BITS
        cols = basis.effective_columns(bits)
        # 256-bit mantissas tolerate a far wider GSO spread than doubles
        if _needs_escalation(cols, cap=1e60):
            raise PrecisionError(
                "basis conditioning exceeds 256-bit floats; rebuild the basis "
                "at higher precision")

    ctx = mpmath.workprec(bits) if bits is not None else nullcontext()
    with ctx:
        red_cols, u = lll_reduce(cols)
        best = min(_sup(c) for c in red_cols)
        best_x = None
        for j in range(3):
            if _sup(red_cols[j]) == best:
                best_x = (int(j == 0), int(j == 1), int(j == 2))
                break
        bound2 = 3 * best * best * (1 + 1e-9)
        for x in _enumerate_half_ball(red_cols, bound2, budget):
            v = _combine(red_cols, x)
            s = _sup(v)
            if s < best:
                best = s
                best_x = x
        coeffs = _transform_apply(u, best_x)
    return ShortVectorResult(
        vector=IntegerVec3(*coeffs),
        lambda1=float(best),
        certified=True,
        escalated=bits is not None,
    )


def count_points(basis: LatticeBasis3, r, budget: int = COUNT_BUDGET) -> int:
    """#{v in L \\ 0 : ||v||_inf <= r}, by complete enumeration.

    Counts are exact and even (the ball is symmetric); enumeration work
    beyond the budget raises BudgetError.
    """
    r = float(r)
    if r <= 0:
        raise InvalidInputError("count radius must be positive")
    if not isinstance(basis, LatticeBasis3):
        basis = LatticeBasis3(tuple(tuple(row) for row in basis))
    bits = None
    cols = basis.effective_columns()
    if _needs_escalation(cols):
        bits = ESCALATED_BITS
        cols = basis.effective_columns(bits)

    ctx = mpmath.workprec(bits) if bits is not None else nullcontext()
    with ctx:
        red_cols, _ = lll_reduce(cols)
        # crude volume-based budget guard before enumerating
        det = abs(_dot(red_cols[0],
                       [red_cols[1][1] * red_cols[2][2] - red_cols[1][2] * red_cols[2][1],
                        red_cols[1][2] * red_cols[2][0] - red_cols[1][0] * red_cols[2][2],
                        red_cols[1][0] * red_cols[2][1] - red_cols[1][1] * red_cols[2][0]]))
        if det > 0 and float((2 * r) ** 3 / det) > budget:
            raise BudgetError("count_points: expected point count exceeds the budget")
        n = 0
        bound2 = 3 * r * r * (1 + 1e-12)
        for x in _enumerate_half_ball(red_cols, bound2, budget):
            if _sup(_combine(red_cols, x)) <= r:
                n += 2  # v and -v
    return n


def in_K_delta(basis: LatticeBasis3, delta: float) -> bool:
    """Membership in the Mahler compact set: lambda_1 >= delta (inclusive)."""
    if not 0 < delta < 1:
        raise InvalidInputError("K_delta needs 0 < delta < 1")
    return shortest_vector(basis).lambda1 >= delta


def translate_basis(line, s, t) -> LatticeBasis3:
    """Basis of g_t phi(s) Z^3: the unipotent part is stored verbatim and the
    diagonal flow goes into the log-scale slot."""
    one = line.mode.from_int(1)
    zero = line.mode.from_int(0)
    rows = (
        (one, s, line.a * s + line.b),
        (zero, one, zero),
        (zero, zero, one),
    )
    return LatticeBasis3(rows, float(t.t))

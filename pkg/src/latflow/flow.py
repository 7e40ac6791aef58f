"""The diagonal flow, the line segment in the expanding horosphere, and
their actions on the standard representation and its exterior square.

The group elements in play are

    g_t   = diag(e^{2t}, e^{-t}, e^{-t}),
    phi(s) = [[1, s, a*s + b], [0, 1, 0], [0, 0, 1]],   s in I = [s1, s2].

Applying g_t . phi(s) to an integer vector (p1, p2, q) gives coordinates

    ( e^{2t} [ (b q + p1) + (a q + p2) s ],  e^{-t} p2,  e^{-t} q ),

so every coordinate is affine in s and suprema over the segment are exact
maxima over the two endpoints.  Flow times can carry an exact value of e^t
(a Fraction) so that rational-mode runs stay error-free out to t ~ ln 10^24.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import InvalidInputError
from .scalars import (
    F64,
    IntegerVec3,
    Matrix3,
    ScalarMode,
    Vec3,
    named_scalar,
)


@dataclass(frozen=True)
class LineSegmentSpec:
    """Parameters (a, b) and the interval I = [s1, s2] of the segment."""

    a: object
    b: object
    s1: object
    s2: object
    mode: ScalarMode = F64

    def __post_init__(self):
        if not self.s1 < self.s2:
            raise InvalidInputError("segment needs s1 < s2 strictly")

    @classmethod
    def from_strings(cls, a_text: str, b_text: str, s1_text: str, s2_text: str,
                     mode: ScalarMode = F64) -> "LineSegmentSpec":
        return cls(
            a=named_scalar(a_text, mode),
            b=named_scalar(b_text, mode),
            s1=named_scalar(s1_text, mode),
            s2=named_scalar(s2_text, mode),
            mode=mode,
        )

    def endpoints(self):
        return (self.s1, self.s2)

    def length(self):
        return self.s2 - self.s1


@dataclass(frozen=True)
class FlowTime:
    """A flow time t, optionally with the exact value of e^t attached.

    ``exp_t`` set to a Fraction u means t = ln(u) exactly; the powers
    e^{kt} = u^k are then exact rationals and rational-mode runs stay
    error-free.  Without it, exponentials are evaluated in floats.
    """

    t: float
    exp_t: Fraction | None = None

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise InvalidInputError("flow time must be finite")
        if self.exp_t is not None and self.exp_t <= 0:
            raise InvalidInputError("e^t must be positive")

    @classmethod
    def of(cls, t: float) -> "FlowTime":
        return cls(float(t))

    @classmethod
    def from_exp(cls, u) -> "FlowTime":
        """Flow time t = ln(u) with u = e^t kept exact."""
        u = Fraction(u)
        return cls(math.log(u), u)

    def factor(self, k: int, mode: ScalarMode = F64):
        """e^{k t} as a mode scalar (exact rational when exp_t is known)."""
        if self.exp_t is not None:
            return mode.from_fraction(self.exp_t ** k)
        if mode.kind == "bigfloat":
            with mode.workprec():
                return mpmath.exp(mpmath.mpf(self.t) * k)
        return math.exp(k * self.t)

    def log_entries(self) -> tuple[float, float, float]:
        """Diagonal of g_t in log scale: (2t, -t, -t); sums to 0 exactly."""
        return (2.0 * self.t, -self.t, -self.t)


def phi(line: LineSegmentSpec, s) -> Matrix3:
    """The unipotent segment element phi(s); upper triangular, det = 1."""
    one = line.mode.from_int(1)
    zero = line.mode.from_int(0)
    with line.mode.workprec():
        top = (one, s, line.a * s + line.b)
    return (top, (zero, one, zero), (zero, zero, one))


def g(t: FlowTime, mode: ScalarMode = F64) -> Matrix3:
    """The diagonal flow element as a dense matrix (use log_entries for big t)."""
    zero = mode.from_int(0)
    e2 = t.factor(2, mode)
    em = t.factor(-1, mode)
    return ((e2, zero, zero), (zero, em, zero), (zero, zero, em))


def unipotent_factor(r, a, mode: ScalarMode = F64) -> Matrix3:
    """The one-parameter unipotent w(r) = [[1, r, a r], [0,1,0], [0,0,1]].

    Reparametrizes the translated segment: g_t phi(s) = w(r) g_t phi(s1)
    with r = e^{3t} (s - s1).
    """
    one = mode.from_int(1)
    zero = mode.from_int(0)
    return ((one, r, a * r), (zero, one, zero), (zero, zero, one))


@dataclass(frozen=True)
class SegmentOrbitPoint:
    """g_t phi(s) v in coefficient form.

    The first coordinate is affine in s with residual coefficients
    c0 = b q + p1 and c1 = a q + p2 kept in the line's scalar mode *before*
    any exponential scaling; the second and third coordinates are the
    s-independent integers p2 and q.
    """

    c0: object
    c1: object
    p2: int
    q: int
    t: FlowTime
    mode: ScalarMode
    s: object

    def first_coord(self, s=None):
        s = self.s if s is None else s
        with self.mode.workprec():
            return self.t.factor(2, self.mode) * (self.c0 + self.c1 * s)

    def coords(self, s=None) -> Vec3:
        s = self.s if s is None else s
        with self.mode.workprec():
            em = self.t.factor(-1, self.mode)
            return (self.first_coord(s), em * self.p2, em * self.q)

    def sup_norm_over(self, s1, s2):
        """sup-norm supremum over s in [s1, s2]; exact endpoint maximum."""
        vals = [abs(x) for x in self.coords(s1)] + [abs(self.first_coord(s2))]
        return max(vals)


def _require_nonzero(v: IntegerVec3):
    if v.is_zero():
        raise InvalidInputError("the zero vector is not a valid witness or orbit seed")


def flow_standard(line: LineSegmentSpec, s, t: FlowTime, v: IntegerVec3) -> SegmentOrbitPoint:
    """g_t phi(s) applied to (p1, p2, q) in the standard representation."""
    _require_nonzero(v)
    with line.mode.workprec():
        c0 = line.b * v.q + v.p1
        c1 = line.a * v.q + v.p2
    return SegmentOrbitPoint(c0=c0, c1=c1, p2=v.p2, q=v.q, t=t, mode=line.mode, s=s)


def flow_ext2(line: LineSegmentSpec, s, t: FlowTime, w: IntegerVec3) -> Vec3:
    """g_t phi(s) on the exterior square, coordinates (p, q, r) in the basis
    (e12, e23, e13).

    phi(s) fixes e12 and e13 and sends e23 to s*e13 - (a s + b)*e12 + e23,
    so the image is (e^t(-(a s + b)q + p), e^{-2t} q, e^t(s q + r)).
    """
    _require_nonzero(w)
    p, q, r = w.p1, w.p2, w.q
    with line.mode.workprec():
        et = t.factor(1, line.mode)
        em2 = t.factor(-2, line.mode)
        first = et * (-(line.a * s + line.b) * q + p)
        third = et * (s * q + r)
        return (first, em2 * q, third)


def segment_sup(line: LineSegmentSpec, t: FlowTime, v: IntegerVec3,
                rep: str = "standard"):
    """sup_{s in I} of the sup-norm of g_t phi(s) v.

    Every coordinate is affine in s in both representations, so |coord| is
    convex and the supremum is attained at an endpoint; the value is the
    exact maximum over s in {s1, s2}.
    """
    _require_nonzero(v)
    s1, s2 = line.endpoints()
    if rep == "standard":
        pt = flow_standard(line, s1, t, v)
        return pt.sup_norm_over(s1, s2)
    if rep == "ext2":
        a_coords = flow_ext2(line, s1, t, v)
        b_coords = flow_ext2(line, s2, t, v)
        return max(max(abs(x) for x in a_coords), max(abs(x) for x in b_coords))
    raise InvalidInputError(f"unknown representation {rep!r}")


def ext2_constant(line: LineSegmentSpec):
    """The interval constant C_I = min{(s2-s1)/2, (s2-s1)/(|s1|+|s2|), 1}.

    For any nonzero integer w and t >= 0, segment_sup in the exterior
    square is bounded below by C_I * e^t.
    """
    s1, s2 = line.endpoints()
    with line.mode.workprec():
        length = s2 - s1
        one = line.mode.from_int(1)
        two = line.mode.from_int(2)
        terms = [length / two, one]
        denom = abs(s1) + abs(s2)
        if denom > 0:
            terms.append(length / denom)
        return min(terms)


@dataclass(frozen=True)
class VandermondeCheck:
    lhs: object
    rhs: object
    passed: bool


def vandermonde_check(w, t: FlowTime, line: LineSegmentSpec) -> VandermondeCheck:
    """Lower bound for the weight-0 coordinate of the SL2 action on degree-m
    polynomial vectors.

    With coefficients w = (w_0, ..., w_m) and the equispaced grid
    tau_j = s1 + (j/m)(s2 - s1), the supremum of |sum_k w_k s^k| over I
    dominates max_j |sum_k w_k tau_j^k|, and the inverse-Vandermonde
    estimate gives

        sup >= (C_I * m)^{-m} * max_k |w_k|,   C_I = (1 + max(|s1|,|s2|)) / (s2 - s1).

    Both sides carry the weight-space expansion factor e^{mt}.  Returns the
    grid maximum (lhs), the guaranteed bound (rhs) and the comparison.
    """
    m = len(w) - 1
    if m < 1:
        raise InvalidInputError("need a coefficient list of length m + 1 with m >= 1")
    coeffs = [line.mode.from_int(c) if isinstance(c, int) else c for c in w]
    if all(c == 0 for c in coeffs):
        raise InvalidInputError("all-zero coefficient vector")
    s1, s2 = line.endpoints()
    with line.mode.workprec():
        emt = t.factor(m, line.mode)
        grid_max = None
        for j in range(m + 1):
            frac = Fraction(j, m)
            tau = s1 + line.mode.from_fraction(frac) * (s2 - s1)
            acc = coeffs[0]
            power = line.mode.from_int(1)
            for k in range(1, m + 1):
                power = power * tau
                acc = acc + coeffs[k] * power
            val = abs(acc)
            if grid_max is None or val > grid_max:
                grid_max = val
        lhs = grid_max * emt
        c_i = (line.mode.from_int(1) + max(abs(s1), abs(s2))) / (s2 - s1)
        w_norm = max(abs(c) for c in coeffs)
        rhs = emt * w_norm / ((c_i * m) ** m)
        return VandermondeCheck(lhs=lhs, rhs=rhs, passed=lhs >= rhs)

"""Scalar arithmetic policy and small fixed-dimension linear algebra.

Three scalar modes are supported and threaded through the whole package:

* ``f64``        -- double precision, adequate for flow times t <= 12 and
                    denominators |q| <= 2**20,
* ``bigfloat:B`` -- mpmath floats with B mantissa bits (default 256),
* ``rational``   -- exact ``fractions.Fraction`` arithmetic; mandatory for
                    rational and truncated-Liouville inputs where residuals
                    reach 10**-24 and below.

Vectors and matrices are plain tuples of whatever numbers the mode
produces; the arithmetic helpers are mode-agnostic.  Everything here is an
immutable value, safe to share between threads.
"""

from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import ParseError

Vec3 = tuple  # 3 scalars
Matrix3 = tuple  # 3 row tuples of 3 scalars

F64_MAX_TIME = 12.0  # |t| beyond this is unsafe in f64 (e^{3t} skew ~ 4e15)
F64_MAX_DENOM = 1 << 20  # |q| beyond this loses residual bits in f64


@dataclass(frozen=True)
class ScalarMode:
    """Arithmetic policy: which number type realises the spec's Scalar."""

    kind: str  # "f64" | "bigfloat" | "rational"
    bits: int | None = None

    def __post_init__(self):
        if self.kind not in ("f64", "bigfloat", "rational"):
            raise ParseError(f"unknown scalar mode {self.kind!r}")
        if self.kind == "bigfloat" and (self.bits is None or self.bits < 53):
            raise ParseError("bigfloat mode needs a mantissa size of >= 53 bits")

    @property
    def is_exact(self) -> bool:
        return self.kind == "rational"

    def workprec(self):
        """Context manager pinning mpmath precision; no-op outside bigfloat.

        Every arithmetic block on bigfloat scalars must run inside this
        context: mpmath applies the *global* precision at operation time,
        and letting it fall back to the 53-bit default would silently
        downgrade the mode.
        """
        if self.kind == "bigfloat":
            return mpmath.workprec(self.bits)
        return nullcontext()

    def from_fraction(self, fr: Fraction):
        if self.kind == "rational":
            return fr
        if self.kind == "f64":
            return float(fr)
        with self.workprec():
            # division is correctly rounded at the working precision
            return mpmath.mpf(fr.numerator) / mpmath.mpf(fr.denominator)

    def from_int(self, n: int):
        return self.from_fraction(Fraction(n))

    def sqrt(self, n: int):
        """sqrt(n) in this mode; rejected in rational mode unless n is a square."""
        r = math.isqrt(n)
        if r * r == n:
            return self.from_int(r)
        if self.kind == "rational":
            raise ParseError(f"sqrt({n}) is irrational; not representable in rational mode")
        if self.kind == "f64":
            return math.sqrt(n)
        with self.workprec():
            return mpmath.sqrt(n)

    def spec(self) -> str:
        """The --mode string that reproduces this mode."""
        if self.kind == "bigfloat":
            return f"bigfloat:{self.bits}"
        return self.kind


F64 = ScalarMode("f64")
RATIONAL = ScalarMode("rational")


def bigfloat(bits: int = 256) -> ScalarMode:
    return ScalarMode("bigfloat", bits)


def mode_from_spec(text: str) -> ScalarMode:
    """Parse a --mode argument: f64 | rational | bigfloat[:bits]."""
    if text == "f64":
        return F64
    if text == "rational":
        return RATIONAL
    if text == "bigfloat":
        return bigfloat()
    if text.startswith("bigfloat:"):
        try:
            return bigfloat(int(text.split(":", 1)[1]))
        except ValueError as e:
            raise ParseError(f"bad bigfloat precision in {text!r}") from e
    raise ParseError(f"unknown scalar mode {text!r}")


def parse_fraction(text: str) -> Fraction:
    """Exact value of a decimal or 'p/q' string."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"cannot parse number {text!r}") from e


def scalar_from_decimal(text: str, mode: ScalarMode):
    """Parse decimal or rational text into a mode scalar.

    Exact in rational mode, correctly rounded in the float modes.
    """
    return mode.from_fraction(parse_fraction(text))


def liouville_partial(k: int) -> Fraction:
    """Partial sum of the classical Liouville series, sum_{j<=k} 10^(-j!).

    Exact rational; for k = 4 the reduced denominator is 10**24, which is
    what drives the big-q acceptance runs.
    """
    if k < 1:
        raise ParseError("liouville:k needs k >= 1")
    total = Fraction(0)
    for j in range(1, k + 1):
        total += Fraction(1, 10 ** math.factorial(j))
    return total


def named_scalar(text: str, mode: ScalarMode):
    """Resolve built-in constants (sqrt2, sqrt3, golden, liouville:k) or parse text."""
    name = text.strip().lower()
    if name == "sqrt2":
        return mode.sqrt(2)
    if name == "sqrt3":
        return mode.sqrt(3)
    if name == "golden":
        if mode.kind == "rational":
            raise ParseError("golden ratio is irrational; not representable in rational mode")
        one = mode.from_int(1)
        return (one + mode.sqrt(5)) / mode.from_int(2)
    if name.startswith("liouville:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError as e:
            raise ParseError(f"bad liouville constant {text!r}") from e
        return mode.from_fraction(liouville_partial(k))
    return scalar_from_decimal(text, mode)


def exact_ratio(x) -> tuple[int, int]:
    """(numerator, denominator) of the *stored* value of x, exactly.

    Works for int, Fraction, float and mpmath.mpf: binary floats are
    themselves rationals, so witness searches can always run over exact
    integers regardless of mode.
    """
    if isinstance(x, int):
        return x, 1
    if isinstance(x, Fraction):
        return x.numerator, x.denominator
    if isinstance(x, float):
        n, d = x.as_integer_ratio()
        return n, d
    if isinstance(x, mpmath.mpf):
        n, d = mpmath.libmp.to_rational(x._mpf_)
        return int(n), int(d)
    raise ParseError(f"unsupported scalar type {type(x).__name__}")


def to_float(x) -> float:
    return float(x)


# -- 3x3 / 3-vector helpers ------------------------------------------------

def mat_identity(mode: ScalarMode = F64) -> Matrix3:
    one, zero = mode.from_int(1), mode.from_int(0)
    return ((one, zero, zero), (zero, one, zero), (zero, zero, one))


def mat_mul(A: Matrix3, B: Matrix3) -> Matrix3:
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


def mat_vec(A: Matrix3, v: Vec3) -> Vec3:
    return tuple(sum(A[i][k] * v[k] for k in range(3)) for i in range(3))


def mat_det(A: Matrix3):
    return (
        A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
        - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
        + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0])
    )


def mat_transpose(A: Matrix3) -> Matrix3:
    return tuple(tuple(A[j][i] for j in range(3)) for i in range(3))


def vec_sup_norm(v: Vec3):
    return max(abs(x) for x in v)


@dataclass(frozen=True)
class IntegerVec3:
    """An integer vector (p1, p2, q); the shape of every Diophantine witness."""

    p1: int
    p2: int
    q: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.p1, self.p2, self.q)

    def is_zero(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.q == 0

    def __iter__(self):
        return iter(self.as_tuple())

"""Monte-Carlo and grid experiments on the translated segment measures.

The empirical object throughout is the image of N uniform draws s ~ I under
s -> g_t phi(s) Z^3: certified first minima, point counts, escape fractions
and their time averages, plus the two trajectory-level probes (first entry
into a Mahler compact set, and the exhaustive segment-minimum search that
powers the return-time estimates).

Reproducibility contract: every sample i of an experiment seeded with
``seed`` draws from a counter-based Philox stream keyed by (seed, i), so
serial and parallel runs agree bit for bit and a report can be regenerated
exactly from its config echo.  LATFLOW_THREADS caps worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.random import Generator, Philox
from scipy.stats import ks_2samp

from .diophantine import _ResidualScan, sup_operator_norm_R1
from .errors import BudgetError, InvalidInputError
from .flow import FlowTime, LineSegmentSpec, segment_sup
from .lattice import shortest_vector, count_points, translate_basis
from .scalars import IntegerVec3

TIME_AVERAGE_BUDGET = 200_000
SEGMENT_MINIMUM_BUDGET = 100_000_000


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LATFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _map_indexed(fn, n: int):
    workers = _threads()
    if workers <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(n)))


def sample_stream(seed: int, index: int) -> Generator:
    """The Philox stream for sample ``index`` of an experiment; counter-based,
    so any subset of samples can be drawn independently and in any order."""
    key = np.array([seed % (1 << 64), index % (1 << 64)], dtype=np.uint64)
    return Generator(Philox(key=key))


@dataclass(frozen=True)
class TranslateSample:
    """One draw of the translated measure: the point g_t phi(s) Z^3."""

    s: float
    t: float
    lambda1: float
    point_counts: dict
    certified: bool
    escalated: bool = False

    def as_row(self) -> dict:
        row = {"s": self.s, "t": self.t, "lambda1": self.lambda1,
               "certified": self.certified, "escalated": self.escalated}
        for r, c in sorted(self.point_counts.items()):
            row[f"count_r{r:g}"] = c
        return row


def sample_translate(line: LineSegmentSpec, t: FlowTime, N: int, seed: int,
                     radii=()) -> list[TranslateSample]:
    """N i.i.d. uniform draws of s over I; per sample the certified first
    minimum and the nonzero-point counts at the requested radii.

    Precision escalations inside the lattice routines are recorded on the
    sample, not raised.
    """
    if N < 1:
        raise InvalidInputError("need N >= 1 samples")
    s1 = float(line.s1)
    s2 = float(line.s2)
    radii = tuple(float(r) for r in radii)

    def one(i: int) -> TranslateSample:
        u = sample_stream(seed, i).random()
        s = s1 + u * (s2 - s1)
        basis = translate_basis(line, line.mode.from_fraction(Fraction(s)), t)
        res = shortest_vector(basis)
        counts = {r: count_points(basis, r) for r in radii}
        return TranslateSample(s=s, t=float(t.t), lambda1=res.lambda1,
                               point_counts=counts, certified=res.certified,
                               escalated=res.escalated)

    return _map_indexed(one, N)


def escape_mass_fraction(line: LineSegmentSpec, t: FlowTime, delta: float,
                         N: int, seed: int) -> float:
    """Fraction of sampled translates outside the compact set K_delta,
    i.e. with lambda_1 < delta."""
    if not 0 < delta < 1:
        raise InvalidInputError("delta must satisfy 0 < delta < 1")
    samples = sample_translate(line, t, N, seed)
    return sum(1 for smp in samples if smp.lambda1 < delta) / N


def time_average_observable(line: LineSegmentSpec, T: float, dt: float,
                            observable, N: int, seed: int,
                            budget: int = TIME_AVERAGE_BUDGET) -> float:
    """Trapezoidal average over t in [0, T] of a per-t Monte-Carlo estimate.

    ``observable`` is ("escape", delta), ("count", r), or ("lambda1", f)
    with f a bounded function applied to each lambda_1.
    """
    if dt <= 0:
        raise InvalidInputError("need dt > 0")
    if T < 0:
        raise InvalidInputError("need T >= 0")
    grid = [i * dt for i in range(int(math.floor(T / dt + 1e-9)) + 1)]
    if len(grid) * N > budget:
        raise BudgetError(
            f"time average would evaluate {len(grid) * N} samples; "
            f"budget is {budget}")
    kind, param = observable

    values = []
    for t in grid:
        ft = FlowTime.of(t)
        if kind == "escape":
            values.append(escape_mass_fraction(line, ft, param, N, seed))
        elif kind == "count":
            samples = sample_translate(line, ft, N, seed, radii=(param,))
            values.append(float(np.mean([s.point_counts[float(param)] for s in samples])))
        elif kind == "lambda1":
            samples = sample_translate(line, ft, N, seed)
            values.append(float(np.mean([param(s.lambda1) for s in samples])))
        else:
            raise InvalidInputError(f"unknown observable kind {kind!r}")
    if len(grid) == 1:
        return values[0]
    return float(np.trapezoid(values, grid) / (grid[-1] - grid[0]))


# -- exhaustive segment-minimum search --------------------------------------

@dataclass(frozen=True)
class SegmentMinimum:
    vector: IntegerVec3
    value: object  # scalar in the line's mode (exact when possible)


def segment_minimum(line: LineSegmentSpec, t: FlowTime, R_cap: float,
                    budget: int = SEGMENT_MINIMUM_BUDGET) -> SegmentMinimum | None:
    """Minimize sup_{s in I} ||g_t phi(s) v||_inf over nonzero integer v,
    reporting the minimizer when its value is <= R_cap (else None).

    The search window is the one a norm bound forces: q in [0, R_cap e^t],
    p1 and p2 within ceil(R1 e^{-2t} + 1) of the nearest integers to -q b,
    -q a (with R1 the sup-operator-norm multiple of R_cap), plus the q = 0
    sheets.  Two sound prunings keep it fast without giving up exhaustiveness:
    q's are visited in ascending order and abandoned once e^{-t} q reaches
    the incumbent (the third coordinate alone is already no better), and a
    q is skipped when even its nearest residual violates the necessary
    residual bound for beating the incumbent.
    """
    if R_cap < 1:
        raise InvalidInputError("R_cap must be >= 1")
    e2t = math.exp(2 * t.t)
    emt = math.exp(-t.t)
    s1 = float(line.s1)
    s2 = float(line.s2)
    opn = sup_operator_norm_R1(line, 1.0)

    best = None  # (value_float, (p1, p2, q))
    near = []  # candidates within 1e-9 of the incumbent, for exact re-ranking

    def consider(val: float, vec):
        nonlocal best, near
        if best is None or val < best[0]:
            if best is not None and val > best[0] * (1 - 1e-9):
                near.append(best)
            best = (val, vec)
            near = [c for c in near if c[0] <= best[0] * (1 + 1e-9)]
        elif val <= best[0] * (1 + 1e-9):
            near.append((val, vec))

    # q = 0, p2 = 0: value e^{2t} |p1|
    consider(e2t, (1, 0, 0))
    # q = 0, p2 != 0: first coordinate is p1 + p2 s
    p2 = 1
    while True:
        lb = max(emt * p2, e2t * p2 * (s2 - s1) / 2)
        if best is not None and lb >= best[0]:
            break
        if emt * p2 > R_cap and e2t * p2 * (s2 - s1) / 2 > R_cap:
            break
        mid = -p2 * (s1 + s2) / 2.0
        for p1 in range(math.floor(mid) - 1, math.floor(mid) + 3):
            first = e2t * max(abs(p1 + p2 * s1), abs(p1 + p2 * s2))
            consider(max(first, emt * p2), (p1, p2, 0))
        p2 += 1

    scan = _ResidualScan(line.a, line.b)
    q_hi = int(math.floor(R_cap * math.exp(t.t))) if t.t < 700 else None
    if q_hi is None:
        raise BudgetError("flow time too large for the q window")
    w = math.ceil(opn * R_cap * emt * emt + 1)
    examined = 0
    for q, rb, ra in scan.iterate(q_hi):
        if emt * q >= best[0]:
            break
        examined += 1
        if examined > budget:
            raise BudgetError(
                f"segment minimum examined more than {budget} candidates; "
                "reduce R_cap or the flow time")
        fb, fa = scan.dist_floats(rb, ra)
        # necessary condition to beat the incumbent: residuals below
        # opnorm * value * e^{-2t}
        if max(fb, fa) > opn * best[0] / e2t * (1 + 1e-9):
            continue
        p1n, res_b = scan.nearest_b(q, rb)
        p2n, res_a = scan.nearest_a(q, ra)
        rbf = float(res_b)
        raf = float(res_a)
        for d2 in range(-w, w + 1):
            ca = raf + d2
            p2v = p2n + d2
            second = emt * abs(p2v)
            for d1 in range(-w, w + 1):
                cb = rbf + d1
                first = e2t * max(abs(cb + ca * s1), abs(cb + ca * s2))
                consider(max(first, second, emt * q), (p1n + d1, p2v, q))

    candidates = [best] + near
    exactable = line.mode.is_exact and t.exp_t is not None
    best_vec = None
    best_val = None
    for val, vec in candidates:
        v = IntegerVec3(*vec)
        value = segment_sup(line, t, v) if exactable else val
        if best_val is None or value < best_val:
            best_val = value
            best_vec = v
    if not exactable:
        # report the value recomputed through segment_sup for consistency
        best_val = segment_sup(line, t, best_vec)
    cap = Fraction(R_cap) if exactable else float(R_cap)
    if best_val > cap:
        return None
    return SegmentMinimum(vector=best_vec, value=best_val)


# -- trajectory probes -------------------------------------------------------

@dataclass(frozen=True)
class ProbeResult:
    """Grid scan of one orbit against the Mahler set K_{delta^{1/3}}.

    ``first_entry``/``last_exit`` are grid times (resolution +-dt); None
    means the orbit never met the set on the horizon, the semi-decision
    signal for a delta-improvable candidate.
    """

    delta: float
    threshold: float
    first_entry: float | None
    last_exit: float | None
    times: tuple
    lambda1: tuple

    def in_k(self) -> tuple:
        return tuple(l >= self.threshold for l in self.lambda1)


def trajectory_probe(line: LineSegmentSpec, s, delta: float, t_max: float,
                     dt: float = 0.05) -> ProbeResult:
    """Scan t in [0, t_max] on a grid of step dt for membership of
    g_t phi(s) Z^3 in K_{delta^{1/3}}."""
    if not 0 < delta < 1:
        raise InvalidInputError("delta must satisfy 0 < delta < 1")
    if dt > 0.05 + 1e-12:
        raise InvalidInputError("probe grid step must be <= 0.05")
    threshold = delta ** (1.0 / 3.0)
    times = []
    lams = []
    n = int(math.floor(t_max / dt + 1e-9)) + 1
    for i in range(n):
        t = i * dt
        basis = translate_basis(line, s, FlowTime.of(t))
        lams.append(shortest_vector(basis).lambda1)
        times.append(t)
    inside = [i for i, l in enumerate(lams) if l >= threshold]
    return ProbeResult(
        delta=delta,
        threshold=threshold,
        first_entry=times[inside[0]] if inside else None,
        last_exit=times[inside[-1]] if inside else None,
        times=tuple(times),
        lambda1=tuple(lams),
    )


def ks_distance(sample_a, sample_b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic of empirical lambda_1 laws."""
    a = np.asarray(list(sample_a), dtype=float)
    b = np.asarray(list(sample_b), dtype=float)
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("KS distance needs nonempty samples")
    return float(ks_2samp(a, b).statistic)


# -- report container --------------------------------------------------------

@dataclass
class ExperimentReport:
    """Self-describing result bundle: the config that produced it is embedded
    verbatim, so rerunning the echo reproduces the report bit for bit."""

    config: dict
    samples: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "schema_version": 1,
            "config": self.config,
            "samples": self.samples,
            "summary": self.summary,
            "flags": self.flags,
        }

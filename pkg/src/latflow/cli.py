"""Command-line front end: classification, orbit, density, equidistribution
and Dirichlet-improvability runs with reproducible configs and report files.

Every run embeds its fully-resolved config in the report, so outputs are
self-describing; JSON is the authoritative format (validated against
REPORT_SCHEMA before writing) and CSV carries flat plot-ready rows.

Exit codes: 0 success, 2 usage/parse errors, 3 budget errors, 4 precision
failures.  LATFLOW_THREADS caps experiment parallelism.

Built-in named constants accepted wherever a number is expected:
sqrt2, sqrt3, golden, liouville:k (the partial sum of 10^-j! up to j = k).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

import jsonschema

from . import diophantine as dio
from . import experiments as exp
from .errors import BudgetError, InvalidInputError, ParseError, PrecisionError
from .flow import FlowTime, LineSegmentSpec
from .scalars import IntegerVec3, mode_from_spec, named_scalar

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "https://latflow.invalid/report.schema.json",
    "title": "latflow experiment report",
    "type": "object",
    "required": ["schema_version", "config", "summary", "samples", "flags"],
    "properties": {
        "schema_version": {"const": 1},
        "config": {
            "type": "object",
            "required": ["subcommand", "mode", "seed"],
        },
        "summary": {"type": "object"},
        "samples": {"type": "array", "items": {"type": "object"}},
        "flags": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
}


def report_schema() -> dict:
    """The published JSON schema that every report validates against."""
    return json.loads(json.dumps(REPORT_SCHEMA))


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, IntegerVec3):
        return list(x.as_tuple())
    if isinstance(x, float):
        return float(format(x, ".17g"))
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "__float__") and not isinstance(x, (int, bool)):
        return float(x)
    return x


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _parse_grid(text: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma list."""
    try:
        if ":" in text:
            start_s, stop_s, step_s = text.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0:
                raise ValueError
            out = []
            k = 0
            while start + k * step <= stop + 1e-12:
                out.append(start + k * step)
                k += 1
            if not out:
                raise ValueError
            return out
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ParseError(f"cannot parse grid {text!r}") from e


def _parse_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ParseError(f"cannot parse list {text!r}") from e
    if not vals:
        raise ParseError(f"empty list {text!r}")
    return vals


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, interval=True):
        sp.add_argument("a", help="slope parameter (number or named constant)")
        sp.add_argument("b", help="offset parameter (number or named constant)")
        sp.add_argument("--mode", default="f64",
                        help="scalar mode: f64 | bigfloat[:bits] | rational")
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--out", default=None, help="output path stem")
        sp.add_argument("--format", default="both", choices=["json", "csv", "both"])
        sp.add_argument("--budget", type=int, default=None,
                        help="work cap for searches and enumerations")
        if interval:
            sp.add_argument("--interval", default="0,1",
                            help="segment interval 's1,s2'")

    sp = sub.add_parser("classify", help="Diophantine class searches for (a, b)")
    common(sp)
    sp.add_argument("--C", default="1", help="fixed-quality constant")
    sp.add_argument("--eps", default="1", help="exponent improvement")
    sp.add_argument("--q-max", type=int, default=10000)
    sp.add_argument("--C-list", default="1,1e-3,1e-6",
                    help="descending constants for the every-C profile")

    sp = sub.add_parser("orbit", help="per-t segment minima and escape fractions")
    common(sp)
    sp.add_argument("--t-grid", default="0:8:1", help="flow times 'a:b:step' or list")
    sp.add_argument("--R-cap", type=float, default=6.0)
    sp.add_argument("--delta", type=float, default=0.2)
    sp.add_argument("--N", type=int, default=50)

    sp = sub.add_parser("density", help="return-time density I_R on [0, T]")
    common(sp)
    sp.add_argument("--R", default="2")
    sp.add_argument("--T", default=str(math.log(10 ** 6)))
    sp.add_argument("--q-max", type=int, default=10 ** 6)
    sp.add_argument("--dt", type=float, default=0.01)

    sp = sub.add_parser("equidist", help="translate sampling and stability proxies")
    common(sp)
    sp.add_argument("--t-list", default="5,7")
    sp.add_argument("--N", type=int, default=1000)
    sp.add_argument("--radii", default="1.5")
    sp.add_argument("--delta", type=float, default=0.05)

    sp = sub.add_parser("dirichlet", help="improvability probe with direct cross-check")
    common(sp)
    sp.add_argument("--s", default="0.3", help="point on the segment")
    sp.add_argument("--delta", type=float, default=0.9)
    sp.add_argument("--t-max", type=float, default=6.0)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--direct-step", type=float, default=0.5,
                    help="t spacing of the direct Dirichlet cross-checks")
    return p


def _line_from(args, mode) -> LineSegmentSpec:
    s1_s, s2_s = (args.interval.split(",") + ["", ""])[:2]
    if not s1_s.strip() or not s2_s.strip():
        raise ParseError(f"cannot parse interval {args.interval!r}")
    return LineSegmentSpec.from_strings(args.a, args.b, s1_s, s2_s, mode)


def _witness_row(w: dio.DiophantineWitness) -> dict:
    return {
        "class": w.class_tag,
        "q": w.q,
        "p1": w.p1,
        "p2": w.p2,
        "residual1": str(w.residual1),
        "residual2": str(w.residual2),
        "residual1_float": float(w.residual1),
        "residual2_float": float(w.residual2),
        "bound": float(w.bound_used),
    }


def _run_classify(args, mode, config) -> exp.ExperimentReport:
    a = named_scalar(args.a, mode)
    b = named_scalar(args.b, mode)
    q_max = args.q_max
    C = named_scalar(args.C, mode)
    eps = named_scalar(args.eps, mode)
    c_list = [named_scalar(c, mode) for c in args.C_list.split(",")]

    cert = dio.rational_certificate(a, b)
    w2 = dio.w2_witness_search(a, b, C, q_max)
    w2e = dio.w2eps_witness_search(a, b, eps, q_max)
    profile = dio.w2inf_profile(a, b, c_list, q_max)

    samples = [_witness_row(w) for w in w2 + w2e]
    profile_rows = []
    for entry in profile:
        profile_rows.append({
            "C": float(entry.C),
            "min_witness_q": entry.witness.q if entry.witness else None,
            "found": entry.witness is not None,
        })
        if entry.witness:
            samples.append(_witness_row(entry.witness))

    caveat = (f"bounded search up to q_max = {q_max}; witness presence is "
              "evidence, absence is not an asymptotic non-membership claim")
    summary = {
        "rational_certificate": list(cert.as_tuple()) if cert else None,
        "w2_witnesses": len(w2),
        "w2eps_witnesses": len(w2e),
        "w2inf_profile": profile_rows,
        "search_caveat": caveat,
    }
    flags = []
    if cert is not None:
        flags.append("rational-certificate")
    report = exp.ExperimentReport(config=config, samples=samples,
                                  summary=summary, flags=flags)

    print(f"classify a={args.a} b={args.b} mode={mode.spec()} q_max={q_max}")
    if cert:
        print(f"  Q^2 certificate (p1, p2, q) = {cert.as_tuple()}")
    else:
        print("  no exact rational certificate (inputs not exact rationals)")
    print(f"  W2(C={args.C}): {len(w2)} witnesses")
    print(f"  W2eps(eps={args.eps}): {len(w2e)} witnesses")
    for row in profile_rows:
        status = f"minimal q = {row['min_witness_q']}" if row["found"] else "none found"
        print(f"  W2inf C={row['C']:g}: {status}")
    print(f"  [{caveat}]")
    return report


def _run_orbit(args, mode, config) -> exp.ExperimentReport:
    line = _line_from(args, mode)
    ts = _parse_grid(args.t_grid)
    budget = args.budget or exp.SEGMENT_MINIMUM_BUDGET
    samples = []
    for t in ts:
        ft = FlowTime.of(t)
        sm = exp.segment_minimum(line, ft, args.R_cap, budget=budget)
        frac = exp.escape_mass_fraction(line, ft, args.delta, args.N, args.seed)
        samples.append({
            "t": t,
            "min_value": float(sm.value) if sm else None,
            "min_vector": list(sm.vector.as_tuple()) if sm else None,
            "below_cap": sm is not None,
            "escape_fraction": frac,
        })
        val = f"{float(sm.value):.6g}" if sm else f"none <= {args.R_cap:g}"
        print(f"  t={t:6.3f}  min={val:>14}  escape(delta={args.delta:g})={frac:.3f}")
    summary = {
        "R_cap": args.R_cap,
        "delta": args.delta,
        "min_values": [s["min_value"] for s in samples],
        "escape_fractions": [s["escape_fraction"] for s in samples],
    }
    return exp.ExperimentReport(config=config, samples=samples, summary=summary,
                                flags=[])


def _run_density(args, mode, config) -> exp.ExperimentReport:
    line = _line_from(args, mode)
    R = named_scalar(args.R, mode)
    T = float(named_scalar(args.T, mode))
    profile = dio.ir_density(line, R, T, args.q_max, dt=args.dt)
    samples = [{
        "q": iv.q,
        "lo": iv.lo,
        "hi": iv.hi,
        "rational_hit": iv.rational_hit,
    } for iv in profile.intervals]
    summary = {
        "R": profile.R, "R1": profile.R1, "T": profile.T, "q_max": profile.q_max,
        "union_measure": profile.union_measure,
        "union_density": profile.union_density,
        "direct_measure": profile.direct_measure,
        "direct_density": profile.direct_density,
        "n_nonempty_Eq": len(profile.intervals),
    }
    flags = []
    if profile.coverage_warning:
        flags.append("coverage-warning")
    if profile.rational_hit:
        flags.append("rational-hit")
    print(f"density R={profile.R:g} T={profile.T:.4f} q_max={profile.q_max}: "
          f"union={profile.union_density:.4f} direct={profile.direct_density:.4f} "
          f"flags={flags}")
    return exp.ExperimentReport(config=config, samples=samples, summary=summary,
                                flags=flags)


def _run_equidist(args, mode, config) -> exp.ExperimentReport:
    if args.N < 1:
        raise InvalidInputError("need N >= 1")
    line = _line_from(args, mode)
    ts = _parse_list(args.t_list)
    radii = tuple(_parse_list(args.radii))
    per_t = {}
    samples = []
    for t in ts:
        batch = exp.sample_translate(line, FlowTime.of(t), args.N, args.seed, radii)
        per_t[t] = batch
        samples.extend(s.as_row() for s in batch)
    ks = {}
    for t1, t2 in zip(ts, ts[1:]):
        ks[f"{t1:g}->{t2:g}"] = exp.ks_distance(
            [s.lambda1 for s in per_t[t1]], [s.lambda1 for s in per_t[t2]])
    mean_counts = {
        f"t={t:g},r={r:g}": float(sum(s.point_counts[r] for s in per_t[t]) / args.N)
        for t in ts for r in radii
    }
    escape = {f"t={t:g}": sum(1 for s in per_t[t] if s.lambda1 < args.delta) / args.N
              for t in ts}
    summary = {
        "ks_distance": ks,
        "mean_counts": mean_counts,
        "siegel_targets": {f"r={r:g}": (2 * r) ** 3 for r in radii},
        "siegel_note": "volume targets are an external validation outside the "
                       "dynamical statements; stability of the lambda1 law is "
                       "the equidistribution proxy",
        "escape_fractions": escape,
        "low_escape_candidate_times": [t for t in ts if escape[f"t={t:g}"] <= 0.02],
    }
    flags = []
    for key, r in [(k, float(k.split("r=")[1])) for k in mean_counts]:
        target = (2 * r) ** 3
        if abs(mean_counts[key] - target) > 0.15 * target:
            flags.append(f"siegel-band-miss:{key}")
    print(f"equidist: ks={ks} escape={escape}")
    for k, v in mean_counts.items():
        print(f"  mean count {k}: {v:.3f}")
    return exp.ExperimentReport(config=config, samples=samples, summary=summary,
                                flags=flags)


def _run_dirichlet(args, mode, config) -> exp.ExperimentReport:
    line = _line_from(args, mode)
    s = named_scalar(args.s, mode)
    probe = exp.trajectory_probe(line, s, args.delta, args.t_max, args.dt)
    x1 = float(s)
    x2 = float(line.a) * x1 + float(line.b)

    # exact correspondence: the solvability box at T = e^t delta^{1/3}
    # rescales onto the sup-ball of radius delta^{1/3} under g_t
    scale = args.delta ** (1.0 / 3.0)
    check_ts = [t for t in probe.times
                if abs(t / args.direct_step - round(t / args.direct_step)) < 1e-9
                and math.exp(t) * scale >= 1.0]
    verdicts = dio.dirichlet_direct(x1, x2, args.delta,
                                    [math.exp(t) * scale for t in check_ts])
    in_k = dict(zip(probe.times, probe.in_k()))
    lam = dict(zip(probe.times, probe.lambda1))
    agree = 0
    considered = 0
    samples = []
    for t, verdict in zip(check_ts, verdicts):
        dyn_out = not in_k[t]
        marginal = abs(lam[t] - probe.threshold) <= 0.02
        ok = dyn_out == verdict.solvable
        if not marginal:
            considered += 1
            agree += ok
        samples.append({
            "t": t, "T": verdict.T, "lambda1": lam[t],
            "dynamical_outside_K": dyn_out,
            "direct_solvable": verdict.solvable,
            "marginal": marginal, "agree": ok,
        })
    tail_outside = (probe.last_exit is None
                    or probe.last_exit < probe.times[-1] - 1e-9)
    verdict_text = ("candidate improvable at this horizon (tail outside K)"
                    if tail_outside else
                    "not improvable at this horizon (orbit re-enters K)")
    summary = {
        "delta": args.delta,
        "threshold": probe.threshold,
        "first_entry": probe.first_entry,
        "last_exit": probe.last_exit,
        "agreement": (agree / considered) if considered else None,
        "n_checked": considered,
        "verdict": verdict_text,
        "semi_decision_note": "horizon-bounded scan; no asymptotic claim",
    }
    print(f"dirichlet s={args.s} delta={args.delta:g}: {verdict_text}; "
          f"agreement={summary['agreement']}")
    return exp.ExperimentReport(config=config, samples=samples, summary=summary,
                                flags=[])


_RUNNERS = {
    "classify": _run_classify,
    "orbit": _run_orbit,
    "density": _run_density,
    "equidist": _run_equidist,
    "dirichlet": _run_dirichlet,
}

_CSV_COLUMNS = {
    "classify": ["class", "q", "p1", "p2", "residual1", "residual2",
                 "residual1_float", "residual2_float", "bound"],
    "orbit": ["t", "min_value", "min_vector", "below_cap", "escape_fraction"],
    "density": ["q", "lo", "hi", "rational_hit"],
    "equidist": None,  # dynamic: depends on radii
    "dirichlet": ["t", "T", "lambda1", "dynamical_outside_K",
                  "direct_solvable", "marginal", "agree"],
}


def _write_outputs(report: exp.ExperimentReport, args):
    doc = _jsonable(report.as_dict())
    jsonschema.validate(doc, REPORT_SCHEMA)
    if args.out is None:
        return
    fmt = args.format
    if fmt in ("json", "both"):
        with open(args.out + ".json", "w", encoding="utf-8", newline="\n") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
    if fmt in ("csv", "both"):
        columns = _CSV_COLUMNS.get(args.subcommand)
        rows = doc["samples"]
        if columns is None:
            columns = sorted({k for row in rows for k in row}) if rows else []
        with open(args.out + ".csv", "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(row.get(c, "")) for c in columns])


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    mode = mode_from_spec(args.mode)
    config = {k.replace("_", "-"): v for k, v in sorted(vars(args).items())}
    report = _RUNNERS[args.subcommand](args, mode, config)
    _write_outputs(report, args)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except SystemExit as e:
        return int(e.code or 0) if not isinstance(e.code, str) else 2
    except ParseError as e:
        print(f"latflow: parse error: {e}", file=sys.stderr)
        return 2
    except InvalidInputError as e:
        print(f"latflow: invalid input: {e}", file=sys.stderr)
        return 2
    except BudgetError as e:
        print(f"latflow: budget exceeded: {e}", file=sys.stderr)
        return 3
    except PrecisionError as e:
        print(f"latflow: precision failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success or certified, 1 refuted or inconclusive, 2 usage and
schema/mode/comparability/scheduling/seeding errors, 3 horizon exhaustion
and empty cover selections.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cantor_builder import (
    MAX_DEFAULT_STAGES,
    BuilderConfig,
    ConstructionTrace,
    build,
    extract_candidates,
    leaf_boxes,
)
from .errors import ScrambleError, SchemaError
from .hit_times import hit_set, longest_consecutive_run, max_run
from .metric_systems import delta_lower, get_system, parse_point, point_to_json, registered_ids, rigidity_gap
from .region_algebra import COMPACT, image, parse_region, region_to_json, sup_distance, inf_distance
from .steering import SteerRequest, steer, tracked_steer
from .verifier import (
    CERTIFIED,
    REFUTED,
    default_corpus,
    default_pairs,
    reverify_trace,
    verify_invariant_scrambled,
    verify_scrambled_pair,
    verify_tracked_pair,
    verify_transitivity,
    weak_mixing_signature,
    VerificationReport,
)

EXIT_OK, EXIT_REFUTED, EXIT_USAGE, EXIT_HORIZON = 0, 1, 2, 3
_HORIZON_CODES = {"HORIZON_EXHAUSTED", "NO_MEMBER"}


class UsageError(Exception):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _emit(obj, out: str | None, fmt: str = "json", text: str | None = None) -> None:
    payload = canonical_json(obj) + "\n"
    if out:
        Path(out).write_text(payload)
    if fmt == "text" and text is not None:
        print(text)
    elif not out:
        sys.stdout.write(payload)


def _system(name: str):
    try:
        return get_system(name)
    except KeyError as exc:
        raise UsageError(f"--system: {exc.args[0]}") from exc


def _region(text: str, system, flag: str, flavor=None):
    try:
        return parse_region(text, system, flavor)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _point(text: str, system, flag: str):
    try:
        return parse_point(text, system)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _fraction(text: str, flag: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{flag}: not a rational number") from exc
    return value


def _load_trace(path: str) -> ConstructionTrace:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not JSON: {exc.msg}") from exc
    return ConstructionTrace.from_json(obj)


def _verdict_code(reports: list[VerificationReport]) -> int:
    return EXIT_OK if all(r.verdict == CERTIFIED for r in reports) else EXIT_REFUTED


# --------------------------------------------------------------------------
# subcommands


def cmd_list_systems(args) -> int:
    rows = []
    for sid in registered_ids():
        if sid == "rot:p/q":
            rows.append({"id": sid, "kind": "circle", "beta": None, "note": "periodic control, e.g. rot:1/3"})
            continue
        s = get_system(sid)
        rows.append({"id": sid, "kind": s.kind, "beta": [s.beta.numerator, s.beta.denominator],
                     "fixed_points": [point_to_json(p) for p in s.fixed_points]})
    text = "\n".join(f"{r['id']:10s} {r['kind']:8s} " + (f"beta={Fraction(*r['beta'])}" if r["beta"] else r["note"])
                     for r in rows)
    _emit({"systems": rows}, None, args.format, text)
    return EXIT_OK


def cmd_hit_set(args) -> int:
    system = _system(args.system)
    if args.source.startswith("pt:"):
        source = _point(args.source[3:], system, "--source")
    else:
        source = _region(args.source, system, "--source")
    target = _region(args.target, system, "--target")
    if args.horizon < 1:
        raise UsageError("--horizon must be positive")
    hs = hit_set(system, source, target, args.s, args.horizon, certify=True)
    found, start = longest_consecutive_run(hs, max(args.run, 1))
    obj = hs.to_json()
    obj["longest_run"] = max_run(hs)
    obj["run_query"] = {"length": args.run, "found": found, "start": start}
    text = "{" + ",".join(map(str, hs.times)) + "}"
    _emit(obj, args.out, args.format, text)
    return EXIT_OK


def cmd_steer(args) -> int:
    system = _system(args.system)
    box = _region(args.box, system, "--box", COMPACT)
    target = _region(args.target, system, "--target")
    tracked = None
    if args.track_point or args.track_member:
        if not (args.track_point and args.track_member):
            raise UsageError("--track-point and --track-member go together")
        tracked = (_point(args.track_point, system, "--track-point"),
                   _region(args.track_member, system, "--track-member"))
    cap = _fraction(args.cap, "--cap") if args.cap else None
    if args.divisor < 1:
        raise UsageError("--divisor must be positive")
    req = SteerRequest(system, [(box, target)], s=args.s, divisor=args.divisor, shrink_cap=cap,
                       tracked=tracked, floor=args.floor)
    step = tracked_steer(req) if tracked else steer(req)
    obj = {"schema": "scrambled-steer/1", "time": step.time, "refined": [region_to_json(r) for r in step.refined],
           "tracked_hit": step.tracked_hit}
    _emit(obj, args.out, args.format, f"k={step.time} refined={step.refined[0]}")
    return EXIT_OK


def _time_filter(text: str | None):
    if not text:
        return None
    kind, _, rest = text.partition(":")
    try:
        if kind == "residue":
            q, r = rest.split(":")
            return {"kind": "residue", "modulus": int(q), "residue": int(r)}
        if kind == "from":
            return {"kind": "from", "start": int(rest)}
        if kind == "set":
            return {"kind": "set", "times": sorted(int(t) for t in rest.split(","))}
    except ValueError as exc:
        raise UsageError(f"--time-filter: {exc}") from exc
    raise UsageError("--time-filter: use residue:q:r, from:n or set:t1,t2,...")


def cmd_build(args) -> int:
    system = _system(args.system)
    if args.stages > MAX_DEFAULT_STAGES and not args.override_scale:
        raise UsageError(f"--stages above {MAX_DEFAULT_STAGES} needs --override-scale")
    if args.enum == "full" and args.stages >= 2 and not args.allow_full:
        raise UsageError("--enum full beyond stage 1 needs --allow-full")
    try:
        config = BuilderConfig(system, args.stages, sync_mode=args.sync_mode, enumeration=args.enum,
                               allow_full=args.allow_full, time_filter=_time_filter(args.time_filter),
                               override_scale=args.override_scale)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    trace = build(config)
    obj = trace.to_json()
    summary = f"{system.id}: {len(trace.stages)} stage(s), {len(trace.times())} times, {len(leaf_boxes(trace))} leaf boxes"
    _emit(obj, args.out, "text" if args.out else args.format, summary)
    return EXIT_OK


def _pair_reports(system, trace, eps) -> list[VerificationReport]:
    cands = [c for j in range(1, len(trace.stages) + 1) for c in extract_candidates(trace, "separable", j)]
    return [verify_scrambled_pair(system, a, b, trace, eps) for i, a in enumerate(cands) for b in cands[i + 1:]]


def cmd_verify(args) -> int:
    trace = _load_trace(args.trace)
    system = trace.system
    eps = _fraction(args.eps, "--eps")
    reports = [reverify_trace(system, trace)]
    if args.all_pairs:
        reports.extend(_pair_reports(system, trace, eps))
    if args.tracked:
        cands = extract_candidates(trace, "separable", 1)
        for x in trace.config.tracked[: len(trace.stages)]:
            for s in (0, 1):
                for box in cands[:2]:
                    reports.append(verify_tracked_pair(system, x, box, trace, s, eps))
    for spec in args.invariant or []:
        try:
            s, t = (int(v) for v in spec.split(","))
        except ValueError as exc:
            raise UsageError("--invariant expects s,t") from exc
        reports.append(verify_invariant_scrambled(system, trace, s, t, eps))
    if args.transitivity:
        targets = [(u, 1) for u in trace.config.base_opens]
        for box in leaf_boxes(trace)[:4]:
            reports.append(verify_transitivity(system, box, targets, trace))
    obj = {"schema": "scrambled-report/1", "trace": args.trace,
           "verdict": CERTIFIED if all(r.certified for r in reports) else REFUTED,
           "reports": [r.to_json() for r in reports]}
    lines = [f"{r.property:22s} {r.verdict}" for r in reports]
    lines.append(f"overall: {obj['verdict']} ({len(reports)} report(s))")
    if args.report:
        Path(args.report).write_text(canonical_json(obj) + "\n")
    if args.format == "json" and not args.report:
        sys.stdout.write(canonical_json(obj) + "\n")
    else:
        print("\n".join(lines))
    return _verdict_code(reports)


def cmd_lemma2(args) -> int:
    system = _system(args.system)
    if args.pairs != "default":
        raise UsageError("--pairs: only 'default' (seeded random dyadic pairs) is supported")
    corpus = default_corpus(system, args.count, args.seed)
    rep = weak_mixing_signature(system, corpus, args.horizon)
    text = f"{system.id}: {rep.verdict}; runs >= 8 in {rep.parameters['runs_at_least_8']}/{len(corpus)} pairs"
    _emit(rep.to_json(), args.out, args.format, text)
    return _verdict_code([rep])


def cmd_rigidity(args) -> int:
    system = _system(args.system)
    if args.n < 1 or args.resolution < 2:
        raise UsageError("--n must be >= 1 and --resolution >= 2")
    value, witness = rigidity_gap(system, args.n, args.resolution)
    low, per_n = delta_lower(system, args.n_max, args.resolution)
    obj = {"system": system.id, "n": args.n, "resolution": args.resolution,
           "gap": [value.numerator, value.denominator], "witness": point_to_json(witness),
           "delta_lower": [low.numerator, low.denominator], "n_max": args.n_max,
           "per_n": [[v.numerator, v.denominator] for v in per_n]}
    _emit(obj, args.out, args.format, f"delta_{args.n} >= {value} (witness {witness}); delta >= {low}")
    return EXIT_OK


def cmd_report(args) -> int:
    trace = _load_trace(args.trace)
    system = trace.system
    lines = [f"system {system.id}, {len(trace.stages)} stage(s), notes: {'; '.join(trace.notes) or 'none'}"]
    for sr in trace.stages:
        kinds = {}
        for st in sr.steps:
            kinds[st.kind] = kinds.get(st.kind, 0) + 1
        lines.append(f"stage {sr.stage}: n={sr.n} cap={sr.cap} times {sr.steps[0].time}..{sr.steps[-1].time} "
                     + ", ".join(f"{k}={v}" for k, v in kinds.items()))
    lines.append(f"M has {len(trace.m_times())} times; {len(leaf_boxes(trace))} leaf boxes")
    if args.plot:
        pairs = default_pairs(trace, limit=4)
        with open(args.plot, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pair", "time", "kind", "inf_distance", "sup_distance"])
            for a, b in pairs:
                for sr in trace.stages:
                    for st in sr.steps:
                        t = st.time + st.s
                        ia, ib = image(system, a.geometry, t), image(system, b.geometry, t)
                        lo, hi = inf_distance(system, ia, ib), sup_distance(system, ia, ib)
                        w.writerow([f"{a.j}:{a.address}|{b.j}:{b.address}", t, st.kind,
                                    f"{float(lo):.6g}", f"{float(hi):.6g}"])
        lines.append(f"distance series written to {args.plot}")
    obj = {"system": system.id, "stages": [{"stage": sr.stage, "n": sr.n, "steps": len(sr.steps),
                                            "first": sr.steps[0].time, "last": sr.steps[-1].time}
                                           for sr in trace.stages],
           "M": trace.m_times()}
    _emit(obj, None, args.format, "\n".join(lines))
    return EXIT_OK


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scrambled", description="Exact scrambled-set constructions and certificates.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--horizon-cap", type=int, help="steering search cap (default 2^16 or $SCRAMBLE_HORIZON_CAP)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--format", choices=["json", "text"], default="text")
        if out:
            sp.add_argument("--out", help="write JSON output to this path")

    sp = sub.add_parser("list-systems", help="registered systems")
    common(sp, out=False)
    sp.set_defaults(func=cmd_list_systems)

    sp = sub.add_parser("hit-set", help="N(f^s(U), V) or N(x, V) up to a horizon")
    sp.add_argument("--system", required=True)
    sp.add_argument("--source", required=True, help="region, or pt:<point>")
    sp.add_argument("--target", required=True)
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--horizon", type=int, default=64)
    sp.add_argument("--run", type=int, default=2, help="consecutive-run length to look for")
    common(sp)
    sp.set_defaults(func=cmd_hit_set)

    sp = sub.add_parser("steer", help="one steering step")
    sp.add_argument("--system", required=True)
    sp.add_argument("--box", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--divisor", type=int, default=1)
    sp.add_argument("--floor", type=int, default=0)
    sp.add_argument("--cap")
    sp.add_argument("--track-point")
    sp.add_argument("--track-member")
    common(sp)
    sp.set_defaults(func=cmd_steer)

    sp = sub.add_parser("build", help="run the stage schedule and write a trace")
    sp.add_argument("--system", required=True)
    sp.add_argument("--stages", type=int, required=True)
    sp.add_argument("--enum", choices=["sampled", "full"], default="sampled")
    sp.add_argument("--allow-full", action="store_true")
    sp.add_argument("--sync-mode", choices=["generic", "fixed-point"], default="generic")
    sp.add_argument("--time-filter", help="residue:q:r, from:n or set:t1,t2,... (mixing variant)")
    sp.add_argument("--override-scale", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("verify", help="re-verify a trace and certify pair properties")
    sp.add_argument("trace")
    sp.add_argument("--all-pairs", action="store_true")
    sp.add_argument("--tracked", action="store_true")
    sp.add_argument("--invariant", action="append", metavar="S,T")
    sp.add_argument("--transitivity", action="store_true")
    sp.add_argument("--eps", default="1/64")
    sp.add_argument("--report")
    sp.add_argument("--format", choices=["json", "text"], default="text")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("lemma2-check", help="consecutive-hit signature of weak mixing")
    sp.add_argument("--system", required=True)
    sp.add_argument("--pairs", default="default")
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--horizon", type=int, default=64)
    common(sp)
    sp.set_defaults(func=cmd_lemma2)

    sp = sub.add_parser("rigidity", help="rigidity gap lower bounds")
    sp.add_argument("--system", required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--resolution", type=int, default=64)
    common(sp)
    sp.set_defaults(func=cmd_rigidity)

    sp = sub.add_parser("report", help="human-readable trace summary")
    sp.add_argument("trace")
    sp.add_argument("--plot", help="write a distance-vs-time CSV")
    sp.add_argument("--format", choices=["json", "text"], default="text")
    sp.set_defaults(func=cmd_report)
    return p


def run_cli(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        if args.horizon_cap is None:
            return args.func(args)
        if args.horizon_cap < 1:
            raise UsageError("--horizon-cap must be positive")
        # scoped to this invocation so embedding callers keep their own setting
        saved = os.environ.get("SCRAMBLE_HORIZON_CAP")
        os.environ["SCRAMBLE_HORIZON_CAP"] = str(args.horizon_cap)
        try:
            return args.func(args)
        finally:
            if saved is None:
                del os.environ["SCRAMBLE_HORIZON_CAP"]
            else:
                os.environ["SCRAMBLE_HORIZON_CAP"] = saved
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScrambleError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_HORIZON if exc.code in _HORIZON_CODES else EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

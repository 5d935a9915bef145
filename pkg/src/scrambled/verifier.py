"""Independent re-verification of traces and finite-horizon certificates.

The checker only trusts times, box geometry and targets from a trace.
Every containment and distance is recomputed with exact region images;
targets are recomputed from the trace's configuration.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cantor_builder import (
    AddressedBox,
    ConstructionTrace,
    StageRecord,
    _filter_fn,
    extract_candidates,
    scheduled_limit,
    seed_family,
    stage_plan,
)
from .errors import ModeError, NotComparable, SchemaError, TargetNotScheduled
from .hit_times import OrbitCache, hit_set, max_run
from .metric_systems import MetricSystem, delta_lower, farthest_point, get_system, point_to_json
from .region_algebra import (
    COMPACT,
    CylinderRegion,
    Region,
    ball,
    cylinder_region,
    diameter,
    image,
    inf_distance,
    interval_region,
    largest_piece,
    point_distances,
    region_to_json,
    sup_distance,
    whole,
)
from .steering import SteerRequest, orbit_cover, orbit_points, select_cover_member, tracked_steer

Q = Fraction
CERTIFIED, REFUTED, INCONCLUSIVE = "certified", "refuted", "inconclusive-at-horizon"
DEFAULT_EPS = Q(1, 64)


def _js(x):
    """JSON form for report payloads: rationals become [num, den]."""
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    if isinstance(x, dict):
        return {k: _js(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_js(v) for v in x]
    if isinstance(x, (int, str, bool)) or x is None:
        return x
    if hasattr(x, "period"):
        return point_to_json(x)
    return region_to_json(x)


@dataclass
class VerificationReport:
    property: str
    verdict: str
    witnesses: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_json(self) -> dict:
        return {
            "schema": "scrambled-report/1",
            "property": self.property,
            "verdict": self.verdict,
            "witnesses": _js(self.witnesses),
            "parameters": _js(self.parameters),
            "failures": _js(self.failures),
        }


def _system_of(system, trace: ConstructionTrace) -> MetricSystem:
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    if system.id != trace.system.id:
        raise NotComparable(f"trace was built for {trace.system.id}, not {system.id}")
    return system


def _as_trace(trace) -> ConstructionTrace:
    if isinstance(trace, ConstructionTrace):
        return trace
    return ConstructionTrace.from_json(trace)


# --------------------------------------------------------------------------
# full trace re-verification


def _overlaps(system: MetricSystem, boxes: Sequence[tuple[object, Region]]) -> list[tuple]:
    """Pairs of distinct owners whose regions intersect, found by a sorted sweep."""
    clashes = []
    if system.kind == "shift":
        words = sorted((w, owner) for owner, r in boxes for w in r.words)
        stack: list[tuple[str, object]] = []
        for w, owner in words:
            while stack and not w.startswith(stack[-1][0]):
                stack.pop()
            if stack and stack[-1][1] != owner:
                clashes.append((stack[-1][1], owner))
            stack.append((w, owner))
        return clashes
    pieces = sorted(((p.lo, not p.lc), p, owner) for owner, r in boxes for p in r.pieces)
    reach = None  # (hi, hc, owner) of the piece reaching furthest right so far
    for _, p, owner in pieces:
        if reach is not None:
            hi, hc, other = reach
            if other != owner and (p.lo < hi or (p.lo == hi and hc and p.lc)):
                clashes.append((other, owner))
        if reach is None or p.hi > reach[0] or (p.hi == reach[0] and p.hc):
            reach = (p.hi, p.hc, owner)
    return clashes


def reverify_trace(system, trace) -> VerificationReport:
    """Recheck every claim in a trace from scratch."""
    trace = _as_trace(trace)
    system = _system_of(system, trace)
    config = trace.config
    fails: list[dict] = []
    witnesses: list[dict] = []

    def fail(check, **where):
        fails.append(dict(check=check, **where))

    if [sr.stage for sr in trace.stages] != list(range(1, len(trace.stages) + 1)):
        fail("stage-numbering")
        return VerificationReport("trace", REFUTED, [], {}, fails)
    if len(trace.stages) != config.stages:
        fail("stage-count", expected=config.stages, found=len(trace.stages))

    filt = _filter_fn(config.time_filter) if config.time_filter is not None else None
    boxes: dict[tuple[int, str], Region] = {}
    last_time = 0
    all_times: list[int] = []
    for sr in trace.stages:
        ell = sr.stage
        n_expected = 1 if ell == 1 else last_time + 1
        if sr.n != n_expected:
            fail("stage-parameter-n", stage=ell, expected=n_expected, found=sr.n)
        cap = Q(1, 2 ** (2 * ell + 2))
        if sr.cap != cap:
            fail("stage-cap", stage=ell)
        _check_seeds(system, config, sr, boxes, fail)
        boxes = dict(boxes)
        boxes.update(sr.seeds)
        try:
            plans = stage_plan(config, ell, sr.n, sorted(boxes))
        except Exception as exc:  # a corrupted config can make planning impossible
            fail("schedule-recompute", stage=ell, detail=str(exc))
            return VerificationReport("trace", REFUTED, witnesses, {}, fails)
        if len(plans) != len(sr.steps):
            fail("step-count", stage=ell, expected=len(plans), found=len(sr.steps))
        floor = sr.n
        fact = math.factorial(ell)
        for plan, st in zip(plans, sr.steps):
            where = {"stage": ell, "step": st.index}
            _check_plan(plan, st, ell, fact, filt, fail, where)
            k = st.time
            all_times.append(k)
            if k <= floor:
                fail("time-monotone", floor=floor, time=k, **where)
            if k % st.divisor:
                fail("divisibility", time=k, divisor=st.divisor, **where)
            if st.filtered and filt is not None and not filt(k):
                fail("time-filter", time=k, **where)
            if st.tracked is not None:
                x, member = st.tracked
                if not member.contains_point(system.iterate(x, k)):
                    fail("tracked-membership", time=k, **where)
            parents = []
            for it in st.items:
                parent = boxes.get((it.j, it.parent))
                if parent is None:
                    fail("missing-parent", j=it.j, address=it.address, **where)
                    continue
                parents.append((parent, it.target))
                if it.box.flavor != COMPACT or it.box.is_empty():
                    fail("box-flavor", j=it.j, address=it.address, **where)
                    continue
                if not it.box.is_subset(parent):
                    fail("nesting", j=it.j, address=it.address, **where)
                d = diameter(system, it.box)
                if not 0 < d <= sr.cap:
                    fail("diameter-cap", j=it.j, address=it.address, diameter=d, **where)
                if not image(system, it.box, k + st.s).is_subset(it.target):
                    fail("image-containment", j=it.j, address=it.address, time=k, **where)
            if len(parents) == len(st.items):
                _check_minimal(system, parents, st, floor, filt, fail, where)
            for a, b in _overlaps(system, [((it.j, it.address), it.box) for it in st.items]):
                fail("disjointness", boxes=[list(a), list(b)], **where)
            boxes = {(it.j, it.address): it.box for it in st.items}
            floor = k
        final = sr.final_boxes()
        expected_count = ell * 2 ** (ell + 1)
        if len(final) != expected_count or any(len(a) != ell + 1 or not 1 <= j <= ell for j, a in final):
            fail("box-family", stage=ell, expected=expected_count, found=len(final))
        total = sum((diameter(system, b) for b in final.values()), Q(0))
        if not total < Q(ell, 2**ell):
            fail("diameter-sum", stage=ell, total=total)
        witnesses.append({"stage": ell, "n": sr.n, "steps": len(sr.steps), "diameter_sum": total,
                          "first_time": sr.steps[0].time if sr.steps else None, "last_time": floor})
        last_time = floor
    if any(b <= a for a, b in zip(all_times, all_times[1:])):
        fail("global-time-monotone")
    recorded = getattr(trace, "recorded_m", None)
    if recorded is not None and recorded != trace.m_times():
        fail("M-membership", expected=trace.m_times(), found=recorded)
    verdict = REFUTED if fails else CERTIFIED
    return VerificationReport("trace", verdict, witnesses, {"system": system.id, "stages": config.stages}, fails)


def _check_seeds(system, config, sr: StageRecord, previous: dict, fail) -> None:
    ell = sr.stage
    u = config.base_opens[ell - 1]
    if len(sr.seeds) != 2**ell or any(j != ell or len(a) != ell for j, a in sr.seeds):
        fail("seed-family", stage=ell)
    for key, box in sr.seeds.items():
        if box.flavor != COMPACT or not box.is_subset(u):
            fail("seed-in-base-open", stage=ell, address=key[1])
        for other in previous.values():
            if box.intersects(other):
                fail("seed-disjoint-from-boxes", stage=ell, address=key[1])
                break
        if ell >= 2 and not diameter(system, box) < Q(1, 2 ** (2 * ell + 1)):
            fail("seed-diameter", stage=ell, address=key[1])
    for a, b in _overlaps(system, list(sr.seeds.items())):
        fail("seed-disjointness", stage=ell, boxes=[list(a), list(b)])
    try:
        if seed_family(config, ell, previous) != sr.seeds:
            fail("seed-recompute", stage=ell)
    except Exception as exc:
        fail("seed-recompute", stage=ell, detail=str(exc))


def _check_plan(plan, st, ell, fact, filt, fail, where) -> None:
    if st.kind != plan.kind or st.params != _norm_params(plan.params) or st.s != plan.s:
        fail("schedule", expected=[plan.kind, plan.s], found=[st.kind, st.s], **where)
    divisor = fact if plan.divisible and filt is None else 1
    if st.divisor != divisor or st.filtered != (plan.divisible and filt is not None):
        fail("divisor-assignment", expected=divisor, found=st.divisor, **where)
    if (st.tracked is None) != (plan.tracked is None) or (
            st.tracked is not None and (st.tracked[0] != plan.tracked[0] or st.tracked[1] != plan.tracked[1])):
        fail("tracked-target", **where)
    expected = [(j, c, p, t) for j, c, p, t in plan.items]
    found = [(it.j, it.address, it.parent, it.target) for it in st.items]
    if expected != found:
        fail("targets", **where)


def _norm_params(params: dict) -> dict:
    return json.loads(json.dumps(params))


def _check_minimal(system, parents, st, floor, filt, fail, where) -> None:
    """No earlier time after the floor is admissible for the same parents and targets."""
    for k in range(floor + 1, st.time):
        if k % st.divisor or (st.filtered and filt is not None and not filt(k)):
            continue
        if st.tracked is not None and not st.tracked[1].contains_point(system.iterate(st.tracked[0], k)):
            continue
        if all(image(system, box, k + st.s).intersects(tgt) for box, tgt in parents):
            fail("time-minimality", earlier=k, time=st.time, **where)
            return


# --------------------------------------------------------------------------
# pair certificates


def _find_box(trace: ConstructionTrace, box: AddressedBox) -> None:
    final = trace.stages[-1].final_boxes() if trace.stages else {}
    if final.get((box.j, box.address)) != box.geometry:
        raise NotComparable(f"box ({box.j}, {box.address}) is not a leaf of this trace")


def _ancestor(step, j: int, address: str):
    for it in step.items:
        if it.j == j and address.startswith(it.address):
            return it
    return None


def _separations(system, trace, A: AddressedBox, B: AddressedBox, step_shift=None):
    """Separation-step witnesses where the two boxes' ancestors aim at different targets."""
    out = []
    for sr in trace.stages:
        for st in sr.steps:
            if st.kind != "separation" or (step_shift is not None and st.s != step_shift):
                continue
            ia, ib = _ancestor(st, A.j, A.address), _ancestor(st, B.j, B.address)
            if ia is None or ib is None or ia.target == ib.target:
                continue
            imA = image(system, A.geometry, st.time + st.s)
            imB = image(system, B.geometry, st.time + st.s)
            dist = inf_distance(system, imA, imB)
            slack = diameter(system, imA) + diameter(system, imB)
            bound = system.beta - Q(3, sr.n) - slack
            out.append({"stage": sr.stage, "step": st.index, "time": st.time, "s": st.s, "distance": dist,
                        "bound": bound, "ok": dist >= bound})
    return out


def _proximities(system, trace, A: AddressedBox, B: AddressedBox, eps, shift_a=0, shift_b=0, sync_m=None):
    out = []
    for sr in trace.stages:
        for st in sr.steps:
            if st.kind != "sync" or (sync_m is not None and st.params.get("m") != sync_m):
                continue
            if _ancestor(st, A.j, A.address) is None or _ancestor(st, B.j, B.address) is None:
                continue
            imA = image(system, A.geometry, st.time + shift_a)
            imB = image(system, B.geometry, st.time + shift_b)
            d = sup_distance(system, imA, imB)
            bound = Q(1, sr.n) + eps
            out.append({"stage": sr.stage, "step": st.index, "time": st.time, "m": st.params.get("m"),
                        "distance": d, "bound": bound, "ok": d <= bound})
    return out


def _per_stage(rows: list[dict], best) -> list[dict]:
    by_stage: dict[int, dict] = {}
    for row in rows:
        cur = by_stage.get(row["stage"])
        if cur is None or best(row["distance"], cur["distance"]):
            by_stage[row["stage"]] = row
    return [by_stage[k] for k in sorted(by_stage)]


def verify_scrambled_pair(system, boxA: AddressedBox, boxB: AddressedBox, trace, eps: Fraction = DEFAULT_EPS) -> VerificationReport:
    """Separation near beta at an M-time and proximality near 0 at another, for every point pair."""
    trace = _as_trace(trace)
    system = _system_of(system, trace)
    _find_box(trace, boxA)
    _find_box(trace, boxB)
    seps = _separations(system, trace, boxA, boxB)
    proxs = _proximities(system, trace, boxA, boxB, eps)
    good_sep = [w for w in seps if w["ok"]]
    good_prox = [w for w in proxs if w["ok"]]
    sep_trend = _per_stage(seps, lambda a, b: a > b)
    prox_trend = _per_stage(proxs, lambda a, b: a < b)
    bounds = [Q(1, sr.n) for sr in trace.stages if sr.stage >= max(boxA.j, boxB.j)]
    params = {"beta": system.beta, "eps": eps, "pair": [[boxA.j, boxA.address], [boxB.j, boxB.address]],
              "proximality_bounds": bounds,
              "bounds_strictly_decrease": all(b < a for a, b in zip(bounds, bounds[1:])),
              "separation_trend": [w["distance"] for w in sep_trend],
              "proximality_trend": [w["distance"] for w in prox_trend]}
    fails = []
    if not good_sep:
        fails.append({"check": "separation", "detail": "no separation step pulls the boxes apart",
                      "best": max((w["distance"] for w in seps), default=None)})
    if not good_prox:
        fails.append({"check": "proximality", "best": min((w["distance"] for w in proxs), default=None)})
    witnesses = []
    if good_sep:
        witnesses.append(dict(kind="separation", **max(good_sep, key=lambda w: (w["stage"], w["distance"]))))
    if good_prox:
        witnesses.append(dict(kind="proximality", **min(good_prox, key=lambda w: (-w["stage"], w["distance"]))))
    return VerificationReport("scrambled-pair", REFUTED if fails else CERTIFIED, witnesses, params, fails)


def verify_tracked_pair(system, x_m, box: AddressedBox, trace, s: int = 0, eps: Fraction = DEFAULT_EPS) -> VerificationReport:
    """Tracked point versus f^s(box): proximal at G-steps, far apart at G-hat steps."""
    trace = _as_trace(trace)
    system = _system_of(system, trace)
    _find_box(trace, box)
    tracked = trace.config.tracked
    if x_m not in tracked:
        raise NotComparable("point is not a tracked point of this trace")
    m = tracked.index(x_m) + 1
    prox, sep, fails = [], [], []
    for sr in trace.stages:
        for st in sr.steps:
            if st.kind != "track" or st.params.get("m") != m or st.s != s:
                continue
            it = _ancestor(st, box.j, box.address)
            if it is None:
                continue
            pt = system.iterate(x_m, st.time)
            img = image(system, box.geometry, st.time + s)
            lo, hi = point_distances(system, pt, img)
            member = st.tracked[1]
            if st.params.get("phase") == "G":
                bound = Q(1, sr.n) + eps
                prox.append({"stage": sr.stage, "step": st.index, "time": st.time, "distance": hi,
                             "bound": bound, "ok": hi <= bound})
            else:
                recorded = Q(*st.params["dist"])
                actual = inf_distance(system, member, it.target)
                floor_ = system.beta / 2 - Q(2, sr.n)
                slack = Q(1, sr.n)
                ok = actual == recorded and recorded >= floor_ and lo >= recorded - slack
                sep.append({"stage": sr.stage, "step": st.index, "time": st.time, "distance": lo,
                            "recorded_dist": recorded, "required_dist": floor_, "bound": recorded - slack, "ok": ok})
    if not any(w["ok"] for w in prox):
        fails.append({"check": "proximality", "best": min((w["distance"] for w in prox), default=None)})
    if not any(w["ok"] for w in sep):
        fails.append({"check": "separation", "best": max((w["distance"] for w in sep), default=None)})
    witnesses = [dict(kind="proximality", **w) for w in prox if w["ok"]][-1:] + \
                [dict(kind="separation", **w) for w in sep if w["ok"]][-1:]
    params = {"beta": system.beta, "eps": eps, "s": s, "m": m, "box": [box.j, box.address],
              "proximality_trend": [w["distance"] for w in _per_stage(prox, lambda a, b: a < b)],
              "separation_trend": [w["distance"] for w in _per_stage(sep, lambda a, b: a > b)]}
    return VerificationReport("tracked-pair", REFUTED if fails else CERTIFIED, witnesses, params, fails)


def verify_invariant_scrambled(system, trace, s: int, t: int, eps: Fraction = DEFAULT_EPS,
                               pairs: Sequence[tuple[AddressedBox, AddressedBox]] | None = None) -> VerificationReport:
    """Pairs (f^s c, f^t d): proximal at the sync toward the fixed point, separated by the rigidity gap."""
    trace = _as_trace(trace)
    system = _system_of(system, trace)
    config = trace.config
    if config.sync_mode != "fixed-point":
        raise ModeError("trace was not built with fixed-point-led sync targets")
    if not 0 <= s <= t:
        raise ValueError("need 0 <= s <= t")
    k_rig = config.rigidity_k
    d_low, per_n = delta_lower(system, n_max=k_rig)
    centers = config.sync_center_pairs()
    sep_m = None
    if t > s:
        if (t - s, s) not in centers:
            raise ModeError(f"no sync target aims at the rigidity witness for ({t - s}, {s})")
        sep_m = centers.index((t - s, s)) + 1
        if sep_m > len(trace.stages):
            return VerificationReport("invariant-scrambled", INCONCLUSIVE, [],
                                      {"s": s, "t": t, "needed_stages": sep_m}, [{"check": "depth"}])
    if pairs is None:
        pairs = default_pairs(trace, include_equal=t > s)
    witnesses, fails = [], []
    for A, B in pairs:
        _find_box(trace, A)
        _find_box(trace, B)
        prox = [w for w in _proximities(system, trace, A, B, Q(0), s, t, sync_m=1)]
        for w in prox:
            w["bound"] = eps
            w["ok"] = w["distance"] <= eps
        if t > s:
            sep = []
            for sr in trace.stages:
                for st in sr.steps:
                    if st.kind != "sync" or st.params.get("m") != sep_m:
                        continue
                    imA = image(system, A.geometry, st.time + s)
                    imB = image(system, B.geometry, st.time + t)
                    dist = inf_distance(system, imA, imB)
                    slack = diameter(system, imA) + diameter(system, imB)
                    bound = d_low - Q(1, k_rig) - slack
                    sep.append({"stage": sr.stage, "step": st.index, "time": st.time, "distance": dist,
                                "bound": bound, "ok": dist >= bound})
        else:
            sep = _separations(system, trace, A, B, step_shift=s)
        pair_id = [[A.j, A.address], [B.j, B.address]]
        good_p = [w for w in prox if w["ok"]]
        good_s = [w for w in sep if w["ok"]]
        if not good_p:
            fails.append({"check": "proximality", "pair": pair_id,
                          "best": min((w["distance"] for w in prox), default=None)})
        if not good_s:
            fails.append({"check": "separation", "pair": pair_id,
                          "best": max((w["distance"] for w in sep), default=None)})
        if good_p and good_s:
            witnesses.append({"pair": pair_id, "proximality": good_p[-1], "separation": good_s[-1]})
    params = {"s": s, "t": t, "eps": eps, "delta_lower": d_low, "delta_per_n": per_n, "k": k_rig,
              "pairs": len(pairs)}
    return VerificationReport("invariant-scrambled", REFUTED if fails else CERTIFIED, witnesses, params, fails)


def default_pairs(trace: ConstructionTrace, include_equal: bool = False, limit: int = 12):
    cands = []
    for j in range(1, len(trace.stages) + 1):
        cands.extend(extract_candidates(trace, "separable", j))
    cands = cands[:limit]
    pairs = [(a, b) for i, a in enumerate(cands) for b in cands[i + 1:]]
    if include_equal:
        pairs = [(a, a) for a in cands] + pairs
    return pairs


def verify_transitivity(system, box: AddressedBox, targets: Sequence[tuple[Region, int]], trace) -> VerificationReport:
    """For each (target, q): some trace time k with q | k and f^k(box) inside target."""
    trace = _as_trace(trace)
    system = _system_of(system, trace)
    _find_box(trace, box)
    scheduled = {it.target for sr in trace.stages for st in sr.steps if st.kind == "enumerate" for it in st.items}
    times = trace.times()
    witnesses, fails = [], []
    for target, q in targets:
        if q < 1:
            raise ValueError("divisor must be positive")
        hit = next((k for k in times if k % q == 0 and image(system, box.geometry, k).is_subset(target)), None)
        if hit is not None:
            witnesses.append({"target": target, "q": q, "time": hit})
            continue
        if target not in scheduled:
            raise TargetNotScheduled("the enumeration phase never aimed at this target", target=str(target))
        fails.append({"check": "transitivity", "target": target, "q": q})
    return VerificationReport("transitivity", REFUTED if fails else CERTIFIED, witnesses,
                              {"box": [box.j, box.address], "targets": len(targets)}, fails)


# --------------------------------------------------------------------------
# weak mixing signature


def random_dyadic_region(system: MetricSystem, rng: random.Random) -> Region:
    if system.kind == "shift":
        length = rng.randint(1, 5)
        return cylinder_region(system, [format(rng.randrange(2**length), f"0{length}b")])
    m = rng.randint(2, 5)
    a = rng.randrange(2**m)
    return interval_region(system, [(Q(a, 2**m), Q(a + 1, 2**m))])


def default_corpus(system, count: int = 20, seed: int = 0) -> list[tuple[Region, Region]]:
    """Seeded random dyadic pairs plus one small self-pair."""
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    rng = random.Random(seed)
    pairs = [(random_dyadic_region(system, rng), random_dyadic_region(system, rng)) for _ in range(count)]
    if system.kind == "shift":
        small = cylinder_region(system, ["00"])
    else:
        small = interval_region(system, [(Q(0), Q(1, 6))])
    pairs.append((small, small))
    return pairs


def _consecutive_impossible(system: MetricSystem, u: Region, v: Region):
    """For a periodic map the hit set is periodic; no cyclically adjacent residues means no run of 2 ever."""
    q = system.period()
    if q is None:
        return None
    residues = sorted({n % q for n in hit_set(system, u, v, 0, q).times})
    for r in residues:
        if (r + 1) % q in residues:
            return None
    return {"period": q, "residues": residues}


def weak_mixing_signature(system, corpus: Sequence[tuple[Region, Region]], horizon: int = 64) -> VerificationReport:
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    if not corpus:
        raise ValueError("corpus must be nonempty")
    rows, fails = [], []
    inconclusive = False
    cache = OrbitCache(system)
    for u, v in corpus:
        hs = hit_set(system, u, v, 0, horizon, cache=cache)
        run = max_run(hs)
        row = {"U": u, "V": v, "longest_run": run, "hits": len(hs.times)}
        if run < 2:
            proof = _consecutive_impossible(system, u, v)
            if proof is not None:
                row["periodicity_witness"] = proof
                fails.append(dict(check="no-consecutive-pair", **row))
            else:
                inconclusive = True
        rows.append(row)
    verdict = REFUTED if fails else (INCONCLUSIVE if inconclusive else CERTIFIED)
    return VerificationReport("weak-mixing-signature", verdict, rows,
                              {"horizon": horizon, "pairs": len(corpus),
                               "runs_at_least_8": sum(r["longest_run"] >= 8 for r in rows)}, fails)


# --------------------------------------------------------------------------
# chaoticity sample


def _inner_box(system: MetricSystem, v: Region) -> Region:
    piece = largest_piece(system, v)
    if isinstance(v, CylinderRegion):
        return cylinder_region(system, [piece], COMPACT)
    length = piece.hi - piece.lo if piece.lo <= piece.hi else 1 - piece.lo + piece.hi
    lo = piece.lo + length / 3
    hi = lo + length / 3
    if system.kind == "circle":
        lo, hi = lo % 1, hi % 1
        if hi == 0:
            hi = Q(1)
    return interval_region(system, [(lo, hi, True, True)], COMPACT)


def verify_chaoticity_sample(system, x, v: Region, eta: Fraction | None = None, eps: Fraction = DEFAULT_EPS,
                             n: int = 64, floor: int = 0) -> VerificationReport:
    """Steer a box inside V once near x's orbit and once far from it."""
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    if v.is_empty():
        raise ValueError("V must be nonempty")
    radius = Q(1, 2 * n + 2)
    cover = orbit_cover(system, x, radius, 256)
    idx, _ = select_cover_member(system, x, 0, cover, (v, whole(system)), 256)
    g = cover.members[idx]
    g_center = orbit_points(system, x, 256)[idx]
    h = ball(system, farthest_point(system, g_center), radius)
    gap = inf_distance(system, g, h)
    if eta is None:
        eta = system.beta / 2 - Q(2, n)
    box0 = _inner_box(system, v)
    near = tracked_steer(SteerRequest(system, [(box0, g)], tracked=(x, g), floor=floor))
    far = tracked_steer(SteerRequest(system, [(near.refined[0], h)], tracked=(x, g), floor=near.time))
    box = far.refined[0]
    prox = point_distances(system, system.iterate(x, near.time), image(system, box, near.time))[1]
    sep = point_distances(system, system.iterate(x, far.time), image(system, box, far.time))[0]
    fails = []
    if not box.is_subset(v):
        fails.append({"check": "box-in-V"})
    if not prox <= Q(1, n) + eps:
        fails.append({"check": "proximality", "distance": prox})
    if not sep >= eta:
        fails.append({"check": "separation", "distance": sep, "eta": eta})
    witnesses = [{"kind": "box", "box": box},
                 {"kind": "proximality", "time": near.time, "distance": prox, "bound": Q(1, n) + eps},
                 {"kind": "separation", "time": far.time, "distance": sep, "eta": eta, "dist_G_Ghat": gap}]
    return VerificationReport("chaoticity-sample", REFUTED if fails else CERTIFIED, witnesses,
                              {"n": n, "eps": eps, "eta": eta, "x": x}, fails)

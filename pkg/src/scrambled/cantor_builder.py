"""Finite-depth execution of the nested-box stage schedule.

Stage l works on boxes K(j, address) for base families j <= l with binary
addresses of length l+1, and runs, in order:

* separation  r = 0..l-1, s = 0..l     (l(l+1) steps, divisor l!)
* sync        m = 1..l                 (l steps, divisor l!)
* tracking    m = 1..l, G then G-hat, s = 0..l   (2l(l+1) steps, divisor 1)
* enumeration one step per target tuple (divisor l!)

Every step is one call into ``steering``; the trace records times, targets
and refined boxes so the verifier can recheck everything from scratch.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import SchemaError, SeedFailure
from .metric_systems import (
    MetricSystem,
    ShiftPoint,
    farthest_point,
    get_system,
    point_from_json,
    point_to_json,
    rigidity_gap,
)
from .region_algebra import (
    COMPACT,
    CylinderRegion,
    Region,
    ball,
    cylinder_region,
    diameter,
    inf_distance,
    interval_region,
    largest_piece,
    region_from_json,
    region_to_json,
    whole,
)
from .steering import SteerRequest, orbit_cover, orbit_points, select_cover_member, steer, tracked_steer

Q = Fraction
SCHEMA = "scrambled-trace/1"
MAX_DEFAULT_STAGES = 3
RIGIDITY_K = 8
COVER_HORIZON = 256

DEFAULT_TRACKED = {
    "doubling": [Q(1, 3), Q(1, 7), Q(1, 5)],
    "tent": [Q(2, 5), Q(2, 7), Q(2, 9)],
    "shift2": [ShiftPoint("", "01"), ShiftPoint("", "001"), ShiftPoint("", "0011")],
}
DEFAULT_SEPARATION = {
    "doubling": (Q(0), Q(1, 2)),
    "tent": (Q(0), Q(1)),
    "shift2": (ShiftPoint("", "0"), ShiftPoint("", "1")),
}
DEFAULT_SYNC = {
    "doubling": [Q(1, 3), Q(1, 5), Q(2, 7), Q(3, 7)],
    "tent": [Q(1, 3), Q(3, 5), Q(2, 7), Q(4, 9)],
    "shift2": [ShiftPoint("", "01"), ShiftPoint("", "011"), ShiftPoint("", "0010"), ShiftPoint("", "0111")],
}


# --------------------------------------------------------------------------
# configuration


def default_base_opens(system: MetricSystem, count: int) -> list[Region]:
    """Dyadic intervals (0,1), (0,1/2), (1/2,1), (0,1/4), ... or cylinders "", "0", "1", "00", ..."""
    out = []
    level = 0
    while len(out) < count:
        for a in range(2**level):
            if len(out) >= count:
                break
            if system.kind == "shift":
                word = format(a, f"0{level}b") if level else ""
                out.append(cylinder_region(system, [word]))
            else:
                out.append(interval_region(system, [(Q(a, 2**level), Q(a + 1, 2**level))]))
        level += 1
    return out


def diagonal_pairs() -> Iterable[tuple[int, int]]:
    """(n, m) = (1,0), (1,1), (2,0), (1,2), (2,1), (3,0), ..."""
    d = 1
    while True:
        for n in range(1, d + 1):
            yield n, d - n
        d += 1


def rigidity_center(system: MetricSystem, n: int, m: int, resolution: int = 64):
    """A point whose f^m image maximizes rho(f^n(w), w) on the grid."""
    w = rigidity_gap(system, n, resolution)[1]
    if m == 0:
        return w
    if system.kind == "shift":
        return ShiftPoint("0" * m + w.prefix, w.period)
    if system.id in ("doubling", "tent"):
        return w / 2**m
    return (w - m * system.angle) % 1


@dataclass
class BuilderConfig:
    system: MetricSystem
    stages: int
    base_opens: list[Region] | None = None
    separation: tuple | None = None
    sync_mode: str = "generic"
    sync_points: list | None = None
    tracked: list | None = None
    enumeration: str = "sampled"
    enumeration_tuples: dict[int, list[tuple[int, ...]]] = field(default_factory=dict)
    allow_full: bool = False
    time_filter: dict | None = None
    rigidity_k: int = RIGIDITY_K
    override_scale: bool = False

    def __post_init__(self):
        if not isinstance(self.system, MetricSystem):
            self.system = get_system(self.system)
        sysm = self.system
        if self.stages < 0:
            raise ValueError("stage count must be nonnegative")
        if self.stages > MAX_DEFAULT_STAGES and not self.override_scale:
            raise ValueError(f"more than {MAX_DEFAULT_STAGES} stages needs override_scale")
        if self.enumeration not in ("sampled", "full"):
            raise ValueError("enumeration policy is 'sampled' or 'full'")
        if self.sync_mode not in ("generic", "fixed-point"):
            raise ValueError("sync mode is 'generic' or 'fixed-point'")
        if self.base_opens is None:
            self.base_opens = default_base_opens(sysm, self.stages + 1)
        if len(self.base_opens) < self.stages + 1:
            raise ValueError("need one base open per stage plus one")
        if any(u.is_empty() for u in self.base_opens) or len(set(self.base_opens)) != len(self.base_opens):
            raise ValueError("base opens must be nonempty and pairwise distinct")
        if self.separation is None:
            if sysm.id not in DEFAULT_SEPARATION:
                raise ValueError(f"no default separation pair for {sysm.id}")
            self.separation = DEFAULT_SEPARATION[sysm.id]
        if self.tracked is None:
            self.tracked = list(DEFAULT_TRACKED.get(sysm.id, []))
        if self.sync_points is None:
            self.sync_points = self._default_sync()
        if len(self.sync_points) < self.stages or len(self.tracked) < self.stages:
            raise ValueError("need at least one sync point and one tracked point per stage")
        if self.time_filter is not None:
            _filter_fn(self.time_filter)

    def _default_sync(self) -> list:
        sysm = self.system
        if self.sync_mode == "fixed-point":
            pts = [sysm.fixed_points[0]]
            for n, m in itertools.islice(diagonal_pairs(), max(self.stages - 1, 0)):
                pts.append(rigidity_center(sysm, n, m))
            return pts
        pts = list(DEFAULT_SYNC.get(sysm.id, []))
        extra = iter(sysm.grid(4 * self.stages + 8))
        while len(pts) < self.stages:
            pts.append(next(extra))
        return pts

    def sync_center_pairs(self) -> list[tuple[int, int] | None]:
        """(n, m) behind each sync point in fixed-point mode (None for the fixed point)."""
        if self.sync_mode != "fixed-point":
            return []
        return [None] + list(itertools.islice(diagonal_pairs(), max(len(self.sync_points) - 1, 0)))

    def to_json(self) -> dict:
        return {
            "system": self.system.id,
            "stages": self.stages,
            "base_opens": [region_to_json(u) for u in self.base_opens],
            "separation": [point_to_json(p) for p in self.separation],
            "sync_mode": self.sync_mode,
            "sync_points": [point_to_json(p) for p in self.sync_points],
            "tracked": [point_to_json(p) for p in self.tracked],
            "enumeration": self.enumeration,
            "enumeration_tuples": {str(k): [list(t) for t in v] for k, v in sorted(self.enumeration_tuples.items())},
            "allow_full": self.allow_full,
            "time_filter": self.time_filter,
            "rigidity_k": self.rigidity_k,
            "override_scale": self.override_scale,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BuilderConfig":
        system = get_system(obj["system"])
        return cls(
            system=system,
            stages=_int(obj["stages"]),
            base_opens=[region_from_json(u) for u in obj["base_opens"]],
            separation=tuple(point_from_json(p) for p in obj["separation"]),
            sync_mode=obj["sync_mode"],
            sync_points=[point_from_json(p) for p in obj["sync_points"]],
            tracked=[point_from_json(p) for p in obj["tracked"]],
            enumeration=obj["enumeration"],
            enumeration_tuples={int(k): [tuple(t) for t in v] for k, v in obj["enumeration_tuples"].items()},
            allow_full=bool(obj["allow_full"]),
            time_filter=obj["time_filter"],
            rigidity_k=_int(obj["rigidity_k"]),
            override_scale=bool(obj["override_scale"]),
        )


def _int(x) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise ValueError(f"expected an integer, got {x!r}")
    return x


def _filter_fn(spec: dict):
    """Admissible-time filters for the mixing variant: residue classes or finite sets."""
    kind = spec.get("kind")
    if kind == "residue":
        q, r = _int(spec["modulus"]), _int(spec["residue"])
        if q < 1:
            raise ValueError("modulus must be positive")
        return lambda k: k % q == r % q
    if kind == "set":
        times = frozenset(_int(t) for t in spec["times"])
        return lambda k: k in times
    if kind == "from":
        start = _int(spec["start"])
        return lambda k: k >= start
    raise ValueError(f"unknown time filter {spec!r}")


# --------------------------------------------------------------------------
# trace records


@dataclass
class Item:
    j: int
    address: str
    parent: str
    target: Region
    box: Region


@dataclass
class StepRecord:
    index: int
    kind: str
    params: dict
    s: int
    divisor: int
    filtered: bool
    time: int
    tracked: tuple | None
    items: list[Item]


@dataclass
class StageRecord:
    stage: int
    n: int
    cap: Fraction
    seeds: dict[tuple[int, str], Region]
    steps: list[StepRecord]

    def final_boxes(self) -> dict[tuple[int, str], Region]:
        return {(it.j, it.address): it.box for it in self.steps[-1].items} if self.steps else {}


@dataclass
class ConstructionTrace:
    config: BuilderConfig
    stages: list[StageRecord]
    notes: list[str] = field(default_factory=list)

    @property
    def system(self) -> MetricSystem:
        return self.config.system

    def times(self) -> list[int]:
        return [st.time for sr in self.stages for st in sr.steps]

    def m_times(self) -> list[int]:
        out = []
        for sr in self.stages:
            lim = scheduled_limit(sr.stage)
            out.extend(st.time for st in sr.steps if st.index <= lim[0] or st.index > lim[1])
        return out

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": self.config.to_json(),
            "stages": [_stage_to_json(sr) for sr in self.stages],
            "M": self.m_times(),
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, obj) -> "ConstructionTrace":
        try:
            if not isinstance(obj, dict) or obj.get("schema") != SCHEMA:
                raise ValueError("missing or unknown schema tag")
            config = BuilderConfig.from_json(obj["config"])
            stages = [_stage_from_json(s) for s in obj["stages"]]
            trace = cls(config, stages, list(obj.get("notes", [])))
            if not isinstance(obj["M"], list):
                raise ValueError("M must be a list")
            trace.recorded_m = [_int(t) for t in obj["M"]]
            return trace
        except SchemaError:
            raise
        except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError, AttributeError) as exc:
            raise SchemaError(f"malformed trace: {exc}") from exc


def scheduled_limit(stage: int) -> tuple[int, int]:
    """(last divisible scheduled index, last tracking index) for a stage."""
    return stage * (stage + 1) + stage, 3 * stage * stage + 4 * stage


def _stage_to_json(sr: StageRecord) -> dict:
    return {
        "stage": sr.stage,
        "n": sr.n,
        "cap": [sr.cap.numerator, sr.cap.denominator],
        "seeds": [{"j": j, "address": a, "box": region_to_json(b)} for (j, a), b in sorted(sr.seeds.items())],
        "steps": [
            {
                "index": st.index,
                "kind": st.kind,
                "params": st.params,
                "s": st.s,
                "divisor": st.divisor,
                "filtered": st.filtered,
                "time": st.time,
                "tracked": None if st.tracked is None else {
                    "point": point_to_json(st.tracked[0]), "member": region_to_json(st.tracked[1])},
                "items": [
                    {"j": it.j, "address": it.address, "parent": it.parent,
                     "target": region_to_json(it.target), "box": region_to_json(it.box)}
                    for it in st.items
                ],
            }
            for st in sr.steps
        ],
    }


def _stage_from_json(obj: dict) -> StageRecord:
    cap = Q(_int(obj["cap"][0]), _int(obj["cap"][1]))
    seeds = {(_int(s["j"]), _word(s["address"])): region_from_json(s["box"]) for s in obj["seeds"]}
    steps = []
    for st in obj["steps"]:
        tracked = st["tracked"]
        if tracked is not None:
            tracked = (point_from_json(tracked["point"]), region_from_json(tracked["member"]))
        items = [Item(_int(it["j"]), _word(it["address"]), _word(it["parent"]),
                      region_from_json(it["target"]), region_from_json(it["box"])) for it in st["items"]]
        if not isinstance(st["params"], dict) or not isinstance(st["kind"], str):
            raise ValueError("step kind/params malformed")
        steps.append(StepRecord(_int(st["index"]), st["kind"], st["params"], _int(st["s"]), _int(st["divisor"]),
                                bool(st["filtered"]), _int(st["time"]), tracked, items))
    return StageRecord(_int(obj["stage"]), _int(obj["n"]), cap, seeds, steps)


def _word(w) -> str:
    if not isinstance(w, str) or set(w) - {"0", "1"}:
        raise ValueError(f"bad address {w!r}")
    return w


# --------------------------------------------------------------------------
# schedule


@dataclass
class StepPlan:
    kind: str
    params: dict
    s: int
    divisible: bool
    tracked: tuple | None
    items: list[tuple[int, str, str, Region]]  # (j, child address, parent address, target)


def v_ball(system: MetricSystem, x, n: int) -> Region:
    """Open ball of diameter below 1/n around x."""
    return ball(system, x, Q(1, 2 * n + 2))


def tracking_targets(config: BuilderConfig, stage: int, n: int, m: int) -> dict:
    """G member around the tracked point's orbit and its far partner G-hat."""
    system = config.system
    x = config.tracked[m - 1]
    radius = Q(1, 2 * n + 2)
    cover = orbit_cover(system, x, radius, COVER_HORIZON)
    probe = (config.base_opens[0], whole(system))
    idx, count = select_cover_member(system, x, 0, cover, probe, COVER_HORIZON)
    g_center = orbit_points(system, x, COVER_HORIZON)[idx]
    h_center = farthest_point(system, g_center)
    g = cover.members[idx]
    h = ball(system, h_center, radius)
    return {"G": g, "H": h, "index": idx, "count": count, "g_center": g_center, "h_center": h_center,
            "dist": inf_distance(system, g, h)}


def enumeration_tuples(config: BuilderConfig, stage: int, nboxes: int) -> list[tuple[int, ...]]:
    if stage in config.enumeration_tuples:
        tuples = [tuple(t) for t in config.enumeration_tuples[stage]]
        for t in tuples:
            if len(t) != nboxes or not all(1 <= p <= stage + 1 for p in t):
                raise ValueError(f"enumeration tuple {t} does not fit stage {stage}")
        return tuples
    if stage == 1 or config.enumeration == "full":
        if stage >= 2 and not config.allow_full:
            raise ValueError("full enumeration beyond stage 1 needs the override flag")
        return list(itertools.product(range(1, stage + 2), repeat=nboxes))
    return [(p,) * nboxes for p in range(1, stage + 2)]


def stage_plan(config: BuilderConfig, stage: int, n: int, parents: list[tuple[int, str]]) -> list[StepPlan]:
    """The full step list for one stage.  ``parents`` are the (j, address) keys at stage start."""
    system = config.system
    a, b = config.separation
    va, vb = v_ball(system, a, n), v_ball(system, b, n)
    side = {"0": va, "1": vb}
    children = sorted((j, addr + bit) for j, addr in parents for bit in "01")
    plans: list[StepPlan] = []
    for r in range(stage):
        for s in range(stage + 1):
            if r == 0 and s == 0:
                items = [(j, c, c[:-1], side[c[-1]]) for j, c in children]
            elif r == 0:
                items = [(j, c, c, side[c[-1]]) for j, c in children]
            else:
                items = [(j, c, c, va if j <= r else vb) for j, c in children]
            plans.append(StepPlan("separation", {"r": r}, s, True, None, items))
    for m in range(1, stage + 1):
        tgt = v_ball(system, config.sync_points[m - 1], n)
        plans.append(StepPlan("sync", {"m": m}, 0, True, None, [(j, c, c, tgt) for j, c in children]))
    for m in range(1, stage + 1):
        tt = tracking_targets(config, stage, n, m)
        x = config.tracked[m - 1]
        common = {"m": m, "member_index": tt["index"], "member_count": tt["count"],
                  "g_center": point_to_json(tt["g_center"]), "h_center": point_to_json(tt["h_center"]),
                  "dist": [tt["dist"].numerator, tt["dist"].denominator]}
        for phase, tgt in (("G", tt["G"]), ("H", tt["H"])):
            for s in range(stage + 1):
                plans.append(StepPlan("track", dict(common, phase=phase), s, False, (x, tt["G"]),
                                      [(j, c, c, tgt) for j, c in children]))
    for tup in enumeration_tuples(config, stage, len(children)):
        items = [(j, c, c, config.base_opens[p - 1]) for (j, c), p in zip(children, tup)]
        plans.append(StepPlan("enumerate", {"tuple": list(tup)}, 0, True, None, items))
    return plans


# --------------------------------------------------------------------------
# seeding


def _interval_seeds(system: MetricSystem, start: Fraction, length: Fraction, count: int, width_cap: Fraction):
    """``count`` boxes in the odd slots of 2*count+1 equal slots, narrowed below ``width_cap``."""
    slot = length / (2 * count + 1)
    out = []
    for i in range(count):
        lo, width = start + (2 * i + 1) * slot, slot
        if slot >= width_cap:
            lo, width = lo + slot / 2 - width_cap / 4, width_cap / 2
        out.append(_arc_box(system, lo, width))
    return out


def seed_family(config: BuilderConfig, stage: int, existing: dict[tuple[int, str], Region]) -> dict:
    """2^stage disjoint compact boxes inside U_stage minus the current boxes."""
    system = config.system
    u = config.base_opens[stage - 1]
    room = u
    for box in existing.values():
        room = room.difference(box)
    if room.is_empty():
        raise SeedFailure(f"no room left in base open {stage}", stage=stage)
    count = 2**stage
    piece = largest_piece(system, room)
    if system.kind == "shift":
        if stage == 1:
            words = [piece + "0", piece + "1"]
        else:
            pad = max(0, 2 * stage + 2 - len(piece) - stage)
            words = [piece + format(i, f"0{stage}b") + "0" * pad for i in range(count)]
        boxes = [cylinder_region(system, [w], COMPACT) for w in words]
    else:
        start = piece.lo
        length = piece.hi - piece.lo if piece.lo <= piece.hi else 1 - piece.lo + piece.hi
        if stage == 1:
            boxes = [_arc_box(system, start + length / 9, length / 9),
                     _arc_box(system, start + 7 * length / 9, length / 9)]
        else:
            boxes = _interval_seeds(system, start, length, count, Q(1, 2 ** (2 * stage + 1)))
    for box in boxes:
        if not box.is_subset(room):
            raise SeedFailure("seed box escapes the available room", stage=stage)
    return {(stage, format(i, f"0{stage}b")): box for i, box in enumerate(boxes)}


def _arc_box(system: MetricSystem, lo: Fraction, width: Fraction) -> Region:
    if system.kind == "circle":
        lo = lo % 1
    hi = lo + width
    if hi > 1 and system.kind == "circle":
        return interval_region(system, [(lo, hi - 1, True, True)], COMPACT)
    return interval_region(system, [(lo, hi, True, True)], COMPACT)


# --------------------------------------------------------------------------
# build


def build(config: BuilderConfig, progress=None) -> ConstructionTrace:
    """Run stages 1..L and return the full trace."""
    system = config.system
    trace = ConstructionTrace(config, [])
    if config.stages >= 2 and config.enumeration == "sampled" and not config.enumeration_tuples:
        trace.notes.append("enumeration sampled: one all-U_p tuple per p <= l+1 for stages >= 2")
    if config.time_filter is not None:
        trace.notes.append("time filter replaces the factorial divisibility at separation, sync and enumeration")
    boxes: dict[tuple[int, str], Region] = {}
    last_time = 0
    fn = _filter_fn(config.time_filter) if config.time_filter is not None else None
    for stage in range(1, config.stages + 1):
        n = 1 if stage == 1 else last_time + 1
        cap = Q(1, 2 ** (2 * stage + 2))
        seeds = seed_family(config, stage, boxes)
        boxes.update(seeds)
        record = StageRecord(stage, n, cap, seeds, [])
        floor = n
        plans = stage_plan(config, stage, n, sorted(boxes))
        for index, plan in enumerate(plans, 1):
            divisor = math.factorial(stage) if plan.divisible and fn is None else 1
            filt = fn if plan.divisible else None
            req = SteerRequest(system, [(boxes[(j, p)], tgt) for j, c, p, tgt in plan.items],
                               s=plan.s, divisor=divisor, shrink_cap=cap, tracked=plan.tracked,
                               floor=floor, time_filter=filt)
            step = tracked_steer(req) if plan.tracked is not None else steer(req)
            items = [Item(j, c, p, tgt, box) for (j, c, p, tgt), box in zip(plan.items, step.refined)]
            boxes = {(it.j, it.address): it.box for it in items}
            record.steps.append(StepRecord(index, plan.kind, plan.params, plan.s, divisor, filt is not None,
                                           step.time, plan.tracked, items))
            floor = step.time
            if progress:
                progress(stage, index, len(plans), step.time)
        trace.stages.append(record)
        last_time = floor
    return trace


# --------------------------------------------------------------------------
# candidates


def breve_address(prefix: str) -> str:
    """Concatenation of the prefixes of lengths 1..m of the input."""
    return "".join(prefix[: i + 1] for i in range(len(prefix)))


def breve_prefixes(length: int) -> set[str]:
    m = 1
    while m * (m + 1) // 2 < length:
        m += 1
    return {breve_address(format(i, f"0{m}b"))[:length] for i in range(2**m)}


@dataclass(frozen=True)
class AddressedBox:
    j: int
    stage: int
    step: int
    address: str
    geometry: Region


def extract_candidates(trace: ConstructionTrace, selection: str, j: int) -> list[AddressedBox]:
    """Deepest boxes of family ``j``: all ('raw'), breve-image prefixes ('breve'), or
    'separable' ones.

    'separable' pins the seed bits to zero, and also the stage-1 split when
    later stages exist.  Boxes sharing those bits are only ever sent to
    different separation targets through the bits that follow, so every
    selected pair parts ways at a stage with n > 1, where beta - 3/n is a
    real bound.
    """
    if selection not in ("raw", "breve", "separable"):
        raise ValueError("selection is 'raw', 'breve' or 'separable'")
    if not trace.stages or j > len(trace.stages) or j < 1:
        return []
    last = trace.stages[-1]
    length = last.stage + 1
    allowed = breve_prefixes(length) if selection == "breve" else None
    out = []
    for (jj, addr), box in sorted(last.final_boxes().items()):
        if jj != j:
            continue
        if allowed is not None and addr not in allowed:
            continue
        fixed = j if last.stage == 1 else max(j, 2)
        if selection == "separable" and addr[:fixed] != "0" * fixed:
            continue
        out.append(AddressedBox(jj, last.stage, last.steps[-1].index, addr, box))
    return out


def leaf_boxes(trace: ConstructionTrace) -> list[AddressedBox]:
    if not trace.stages:
        return []
    last = trace.stages[-1]
    return [AddressedBox(j, last.stage, last.steps[-1].index, a, b) for (j, a), b in sorted(last.final_boxes().items())]


def box_diameter(trace: ConstructionTrace, box: Region) -> Fraction:
    return diameter(trace.system, box)


def is_shift_region(r: Region) -> bool:
    return isinstance(r, CylinderRegion)

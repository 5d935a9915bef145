"""Steering: pick a time and shrink compact boxes so their images land in open targets."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import HorizonExhausted, NoMember, ShrinkFailure
from .hit_times import OrbitCache, hit_set, hits
from .metric_systems import MetricSystem, ShiftPoint, get_system
from .region_algebra import (
    COMPACT,
    CylinderRegion,
    Region,
    ball,
    largest_piece,
    piece_midpoint,
    point_distances,
    shrink_around,
)

Q = Fraction
HORIZON_START = 2**8
DEFAULT_HORIZON_CAP = 2**16


def horizon_cap() -> int:
    raw = os.environ.get("SCRAMBLE_HORIZON_CAP")
    if raw:
        value = int(raw)
        if value < 1:
            raise ValueError("SCRAMBLE_HORIZON_CAP must be positive")
        return value
    return DEFAULT_HORIZON_CAP


@dataclass
class SteerRequest:
    system: MetricSystem
    items: Sequence[tuple[Region, Region]]
    s: int = 0
    divisor: int = 1
    shrink_cap: Fraction | None = None
    tracked: tuple | None = None  # (x0, member G)
    floor: int = 0
    time_filter: Callable[[int], bool] | None = None
    horizon_start: int = HORIZON_START
    horizon_limit: int | None = None

    def __post_init__(self):
        if not isinstance(self.system, MetricSystem):
            self.system = get_system(self.system)
        if not self.items:
            raise ValueError("steering needs at least one (box, target) item")
        if self.divisor < 1 or self.s < 0:
            raise ValueError("divisor must be positive and s nonnegative")
        if self.shrink_cap is not None and self.shrink_cap <= 0:
            raise ValueError("shrink cap must be positive")


@dataclass
class SteerStep:
    time: int
    refined: list[Region]
    tracked_hit: bool | None = None
    centers: list = field(default_factory=list)


def admissible(req: SteerRequest, k: int, cache: OrbitCache) -> bool:
    """The canonical admissibility test; the verifier reuses it for minimality."""
    if k % req.divisor:
        return False
    if req.time_filter is not None and not req.time_filter(k):
        return False
    if req.tracked is not None:
        x0, member = req.tracked
        if not member.contains_point(cache.at(x0, k)):
            return False
    return all(hits(req.system, box, target, k + req.s, cache) for box, target in req.items)


def _search(req: SteerRequest) -> SteerStep:
    cap = req.horizon_limit or horizon_cap()
    window = min(req.horizon_start, cap)
    cache = OrbitCache(req.system)
    k = req.floor
    while True:
        while k < req.floor + window:
            k += 1
            if admissible(req, k, cache):
                return _refine(req, k, cache)
        if window >= cap:
            raise HorizonExhausted(
                f"no admissible time in ({req.floor}, {req.floor + window}]",
                floor=req.floor, window=window, divisor=req.divisor)
        window = min(2 * window, cap)


def _refine(req: SteerRequest, k: int, cache: OrbitCache) -> SteerStep:
    system = req.system
    refined, centers = [], []
    t = k + req.s
    for box, target in req.items:
        landing = cache.at(box, t).intersect(target)
        chosen = None
        for y in steering_points(system, landing):
            for c in preimage_points(system, y, t, box):
                try:
                    chosen = (shrink_around(system, c, box, target, t, cap=req.shrink_cap), c)
                    break
                except ShrinkFailure:
                    continue
            if chosen:
                break
        if chosen is None:
            raise ShrinkFailure("no interior preimage of a landing point inside the box", time=k)
        refined.append(chosen[0])
        centers.append(chosen[1])
    hit = None
    if req.tracked is not None:
        hit = req.tracked[1].contains_point(cache.at(req.tracked[0], k))
    return SteerStep(k, refined, hit, centers)


def steer(req: SteerRequest) -> SteerStep:
    """Smallest admissible k > floor, with every box shrunk so f^{k+s}(box) lies in its target."""
    if req.tracked is not None:
        raise ValueError("use tracked_steer for requests with a tracked point")
    return _search(req)


def tracked_steer(req: SteerRequest) -> SteerStep:
    """As ``steer`` but additionally requires f^k(x0) in the chosen cover member."""
    if req.tracked is None:
        raise ValueError("tracked_steer needs a (point, member) pair")
    return _search(req)


# --------------------------------------------------------------------------
# steering points


def steering_points(system: MetricSystem, landing: Region, depth: int = 6):
    """Canonical points deep inside the landing region, best first.

    The middle of the largest piece comes first; then dyadic fractions of
    that piece at increasing depth, then the middles of the other pieces.
    """
    if landing.is_empty():
        return
    piece = largest_piece(system, landing)
    if isinstance(landing, CylinderRegion):
        yield ShiftPoint(piece, "0")
        for w in landing.words:
            if w != piece:
                yield ShiftPoint(w, "0")
        return
    start = piece.lo
    length = piece.hi - piece.lo if piece.lo <= piece.hi else 1 - piece.lo + piece.hi
    for d in range(1, depth + 1):
        for num in range(1, 2**d, 2):
            y = start + length * Q(num, 2**d)
            yield y % 1 if system.kind == "circle" else y
    for p in landing.arcs():
        if p != piece:
            yield piece_midpoint(p)


def _box_center(system: MetricSystem, box: Region):
    piece = largest_piece(system, box)
    if isinstance(box, CylinderRegion):
        return piece
    return piece_midpoint(piece)


def preimage_points(system: MetricSystem, y, t: int, box: Region) -> list:
    """Preimages of ``y`` under f^t inside ``box``, nearest the box center first.

    Only a handful of branches around the center are examined, so the cost
    does not grow with 2^t.
    """
    center = _box_center(system, box)
    if system.kind == "shift":
        w = center
        if len(w) <= t:
            return [ShiftPoint(w + "0" * (t - len(w)) + y.prefix, y.period)]
        if y.take(len(w) - t) == w[t:]:
            return [ShiftPoint(w[:t] + y.prefix, y.period)]
        return []
    cands = []
    if system.id.startswith("rot:"):
        cands.append((y - t * system.angle) % 1)
    elif system.id == "doubling":
        s = 2**t
        j0 = math.floor(center * s - y)
        cands.extend(((y + j) / s) % 1 for j in range(j0 - 1, j0 + 3))
    elif system.id == "tent":
        s = 2 ** max(t - 1, 0)
        if t == 0:
            cands.append(y)
        else:
            m0 = round(center * s)
            for m in range(m0 - 1, m0 + 2):
                for x in ((m - y / 2) / s, (m + y / 2) / s):
                    if 0 <= x <= 1:
                        cands.append(x)
    inner = box.complement()
    out = []
    for x in cands:
        if x in out or not box.contains_point(x) or system.iterate(x, t) != y:
            continue
        if inner.is_empty() or point_distances(system, x, inner)[0] > 0:
            out.append(x)
    out.sort(key=lambda x: (system.distance(x, center), x))
    return out


# --------------------------------------------------------------------------
# covers for tracked points


@dataclass
class Cover:
    members: list[Region]
    target: object
    horizon: int

    def check(self, system: MetricSystem) -> bool:
        x = self.target
        for _ in range(self.horizon + 1):
            if not any(g.contains_point(x) for g in self.members):
                return False
            x = system.apply(x)
        return True


def orbit_points(system: MetricSystem, x, horizon: int) -> list:
    """Distinct orbit points f^0(x), ..., f^horizon(x) in first-visit order."""
    seen, out = set(), []
    for _ in range(horizon + 1):
        if x in seen:
            break
        seen.add(x)
        out.append(x)
        x = system.apply(x)
    return out


def orbit_cover(system: MetricSystem, x, radius: Fraction, horizon: int) -> Cover:
    return Cover([ball(system, p, radius) for p in orbit_points(system, x, horizon)], x, horizon)


def select_cover_member(system, x0, s: int, cover: Cover, probe: tuple[Region, Region], horizon: int) -> tuple[int, int]:
    """Index of the member maximizing |N(f^s(W), W') and N(x0, G)|; returns (index, count)."""
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    w, w2 = probe
    base = set(hit_set(system, w, w2, s, horizon).times)
    best, best_count = None, 0
    for i, g in enumerate(cover.members):
        count = len(base.intersection(hit_set(system, x0, g, 0, horizon).times))
        if count > best_count:
            best, best_count = i, count
    if best is None:
        raise NoMember("no cover member is revisited at a probe hit time", horizon=horizon)
    return best, best_count


def compact(region: Region) -> Region:
    return region.with_flavor(COMPACT)

"""Exact regions: finite unions of rational intervals, or finite sets of cylinders.

Interval regions live on a chart: [0,1] for the segment and [0,1) for the
circle.  Arcs crossing 0 are two chart pieces internally and one wrapped
piece when serialized, so canonical forms stay unique either way.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ShrinkFailure
from .metric_systems import (
    MetricSystem,
    ShiftPoint,
    circle_distance,
    get_system,
)

Q = Fraction
OPEN, COMPACT = "open", "compact"
MAX_BRANCHES = 1 << 20


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lc: bool
    hc: bool

    def is_empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lc and self.hc))

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lc:
            return False
        if x == self.hi and not self.hc:
            return False
        return True

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


def _chart(kind: str) -> Interval:
    return Interval(Q(0), Q(1), True, kind == "segment")


def _meet(a: Interval, b: Interval) -> Interval:
    if a.lo > b.lo:
        lo, lc = a.lo, a.lc
    elif b.lo > a.lo:
        lo, lc = b.lo, b.lc
    else:
        lo, lc = a.lo, a.lc and b.lc
    if a.hi < b.hi:
        hi, hc = a.hi, a.hc
    elif b.hi < a.hi:
        hi, hc = b.hi, b.hc
    else:
        hi, hc = a.hi, a.hc and b.hc
    return Interval(lo, hi, lc, hc)


def canonical_pieces(pieces: Iterable[Interval], kind: str) -> tuple[Interval, ...]:
    chart = _chart(kind)
    live = [p for p in (_meet(q, chart) for q in pieces) if not p.is_empty()]
    live.sort(key=lambda p: (p.lo, not p.lc))
    out: list[Interval] = []
    for p in live:
        if out:
            cur = out[-1]
            if p.lo < cur.hi or (p.lo == cur.hi and (cur.hc or p.lc)):
                if p.hi > cur.hi:
                    out[-1] = Interval(cur.lo, p.hi, cur.lc, p.hc)
                elif p.hi == cur.hi:
                    out[-1] = Interval(cur.lo, cur.hi, cur.lc, cur.hc or p.hc)
                continue
        out.append(p)
    return tuple(out)


def _complement_pieces(pieces: Sequence[Interval], kind: str) -> tuple[Interval, ...]:
    chart = _chart(kind)
    gaps = []
    pos, pos_closed = chart.lo, chart.lc
    for p in pieces:
        gaps.append(Interval(pos, p.lo, pos_closed, not p.lc))
        pos, pos_closed = p.hi, not p.hc
    gaps.append(Interval(pos, chart.hi, pos_closed, chart.hc))
    return canonical_pieces(gaps, kind)


# --------------------------------------------------------------------------
# region values


@dataclass(frozen=True)
class IntervalRegion:
    system_id: str
    kind: str
    flavor: str
    pieces: tuple[Interval, ...]

    def is_empty(self) -> bool:
        return not self.pieces

    def contains_point(self, x) -> bool:
        return any(p.contains(x) for p in self.pieces)

    def with_flavor(self, flavor: str) -> "IntervalRegion":
        return IntervalRegion(self.system_id, self.kind, flavor, self.pieces)

    def _new(self, pieces, flavor=None) -> "IntervalRegion":
        return IntervalRegion(self.system_id, self.kind, flavor or self.flavor, canonical_pieces(pieces, self.kind))

    def intersect(self, other: "IntervalRegion") -> "IntervalRegion":
        out = [_meet(a, b) for a in self.pieces for b in other.pieces]
        return self._new(out)

    def union(self, other: "IntervalRegion") -> "IntervalRegion":
        return self._new(self.pieces + other.pieces)

    def complement(self) -> "IntervalRegion":
        flip = OPEN if self.flavor == COMPACT else COMPACT
        return IntervalRegion(self.system_id, self.kind, flip, _complement_pieces(self.pieces, self.kind))

    def difference(self, other: "IntervalRegion") -> "IntervalRegion":
        return self.intersect(other.complement()).with_flavor(self.flavor)

    def is_subset(self, other: "IntervalRegion") -> bool:
        return self.intersect(other.complement()).is_empty()

    def intersects(self, other: "IntervalRegion") -> bool:
        return not self.intersect(other).is_empty()

    def is_whole(self) -> bool:
        return self.pieces == (_chart(self.kind),)

    def arcs(self) -> list[Interval]:
        """Pieces with a circle arc through 0 merged into one wrapped piece (lo > hi)."""
        ps = list(self.pieces)
        if self.kind != "circle" or len(ps) < 2:
            return ps
        first, last = ps[0], ps[-1]
        if first.lo == 0 and first.lc and last.hi == 1:
            return ps[1:-1] + [Interval(last.lo, first.hi, last.lc, first.hc)]
        return ps

    def __str__(self) -> str:
        return " u ".join(_fmt_piece(p) for p in self.arcs()) or "{}"


@dataclass(frozen=True)
class CylinderRegion:
    system_id: str
    flavor: str
    words: tuple[str, ...]
    kind: str = "shift"

    def is_empty(self) -> bool:
        return not self.words

    def contains_point(self, x: ShiftPoint) -> bool:
        return any(x.take(len(w)) == w for w in self.words)

    def with_flavor(self, flavor: str) -> "CylinderRegion":
        return CylinderRegion(self.system_id, flavor, self.words)

    def _new(self, words, flavor=None) -> "CylinderRegion":
        return CylinderRegion(self.system_id, flavor or self.flavor, canonical_words(words))

    def intersect(self, other: "CylinderRegion") -> "CylinderRegion":
        out = []
        for u in self.words:
            for v in other.words:
                if v.startswith(u):
                    out.append(v)
                elif u.startswith(v):
                    out.append(u)
        return self._new(out)

    def union(self, other: "CylinderRegion") -> "CylinderRegion":
        return self._new(self.words + other.words)

    def complement(self) -> "CylinderRegion":
        return CylinderRegion(self.system_id, self.flavor, canonical_words(_word_complement(self.words)))

    def difference(self, other: "CylinderRegion") -> "CylinderRegion":
        return self.intersect(other.complement())

    def is_subset(self, other: "CylinderRegion") -> bool:
        have = other.words
        for w in self.words:
            i = bisect.bisect_right(have, w)
            if i == 0 or not w.startswith(have[i - 1]):
                return False
        return True

    def intersects(self, other: "CylinderRegion") -> bool:
        return any(v.startswith(u) or u.startswith(v) for u in self.words for v in other.words)

    def is_whole(self) -> bool:
        return self.words == ("",)

    @property
    def pieces(self) -> tuple[str, ...]:
        return self.words

    def __str__(self) -> str:
        return "{" + ", ".join(f"[{w}]" for w in self.words) + "}"


Region = IntervalRegion | CylinderRegion


def canonical_words(words: Iterable[str]) -> tuple[str, ...]:
    ws = set()
    last = None
    # in sorted order a word's prefixes precede it, with only extensions in between
    for w in sorted(set(words)):
        if last is not None and w.startswith(last):
            continue
        ws.add(w)
        last = w
    changed = True
    while changed:
        changed = False
        for w in sorted(ws, key=len, reverse=True):
            if w and w in ws:
                sib = w[:-1] + ("1" if w[-1] == "0" else "0")
                if sib in ws:
                    ws.discard(w)
                    ws.discard(sib)
                    ws.add(w[:-1])
                    changed = True
    return tuple(sorted(ws))


def _word_complement(words: Sequence[str]) -> list[str]:
    out = []
    stack = [("", list(words))]
    while stack:
        c, ws = stack.pop()
        if not ws:
            out.append(c)
        elif c in ws:
            continue
        else:
            for b in "10":
                child = c + b
                stack.append((child, [w for w in ws if w.startswith(child)]))
    return out


def _fmt_piece(p: Interval) -> str:
    return f"{'[' if p.lc else '('}{p.lo}, {p.hi}{']' if p.hc else ')'}"


# --------------------------------------------------------------------------
# constructors


def _system(system) -> MetricSystem:
    return system if isinstance(system, MetricSystem) else get_system(system)


def interval_region(system, pieces: Iterable[tuple], flavor: str = OPEN) -> IntervalRegion:
    """Build from ``(lo, hi)`` pairs (flags follow the flavor) or ``(lo, hi, lc, hc)``.

    On the circle ``lo > hi`` denotes an arc through 0.
    """
    system = _system(system)
    raw = []
    for item in pieces:
        lo, hi = Q(item[0]), Q(item[1])
        if len(item) == 4:
            lc, hc = bool(item[2]), bool(item[3])
        else:
            lc = hc = flavor == COMPACT
        raw.extend(_unwrap(system.kind, lo, hi, lc, hc))
    return IntervalRegion(system.id, system.kind, flavor, canonical_pieces(raw, system.kind))


def _unwrap(kind: str, lo, hi, lc, hc) -> list[Interval]:
    if kind != "circle":
        return [Interval(lo, hi, lc, hc)]
    if lo > hi:
        return [Interval(lo, Q(1), lc, False), Interval(Q(0), hi, True, hc)]
    if hi == 1 and hc:
        return [Interval(lo, Q(1), lc, False), Interval(Q(0), Q(0), True, True)]
    return [Interval(lo, hi, lc, hc)]


def cylinder_region(system, words: Iterable[str], flavor: str = OPEN) -> CylinderRegion:
    system = _system(system)
    words = list(words)
    for w in words:
        if set(w) - {"0", "1"}:
            raise ValueError(f"bad cylinder word {w!r}")
    return CylinderRegion(system.id, flavor, canonical_words(words))


def whole(system, flavor: str = OPEN) -> Region:
    system = _system(system)
    if system.kind == "shift":
        return CylinderRegion(system.id, flavor, ("",))
    return IntervalRegion(system.id, system.kind, flavor, (_chart(system.kind),))


def empty(system, flavor: str = OPEN) -> Region:
    system = _system(system)
    if system.kind == "shift":
        return CylinderRegion(system.id, flavor, ())
    return IntervalRegion(system.id, system.kind, flavor, ())


def ball(system, center, radius: Fraction) -> Region:
    """Open metric ball; on the shift this is the cylinder of agreeing prefixes."""
    system = _system(system)
    radius = Q(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if system.kind == "shift":
        # rho < radius  <=>  agreement on indices 0..m-1 with 2^-m < radius
        m = 0
        while Q(1, 2**m) >= radius:
            m += 1
        return CylinderRegion(system.id, OPEN, (center.take(m),))
    if system.kind == "circle":
        if radius > Q(1, 2):
            return whole(system)
        return interval_region(system, _lifted_pieces(center - radius, center + radius, False, False), OPEN)
    return interval_region(system, [(max(Q(0), center - radius), min(Q(1), center + radius),
                                     center - radius < 0, center + radius > 1)], OPEN)


def closed_ball(system, center, radius: Fraction) -> Region:
    system = _system(system)
    if system.kind == "shift":
        raise ValueError("use cylinders for shift boxes")
    if system.kind == "circle":
        if radius >= Q(1, 2):
            return whole(system, COMPACT)
        return interval_region(system, _lifted_pieces(center - radius, center + radius, True, True), COMPACT)
    return interval_region(system, [(max(Q(0), center - radius), min(Q(1), center + radius), True, True)], COMPACT)


def _lifted_pieces(a: Fraction, b: Fraction, lc: bool, hc: bool) -> list[tuple]:
    """Reduce a real interval [a, b] (length <= 1) modulo 1 onto the circle chart."""
    return [(p.lo, p.hi, p.lc, p.hc) for p in _reduce_mod1(a, b, lc, hc)]


def _reduce_mod1(a: Fraction, b: Fraction, lc: bool, hc: bool) -> list[Interval]:
    span = b - a
    if span > 1 or (span == 1 and (lc or hc)):
        return [_chart("circle")]
    m = math.floor(a)
    a, b = a - m, b - m
    if span == 1:
        return [Interval(Q(0), a, True, False), Interval(a, Q(1), False, False)]
    if b < 1:
        return [Interval(a, b, lc, hc)]
    out = [Interval(a, Q(1), lc, False)]
    if b > 1 or hc:
        out.append(Interval(Q(0), b - 1, True, hc))
    return out


def box_of(region: Region) -> Region:
    return region.with_flavor(COMPACT)


# --------------------------------------------------------------------------
# images


def _triangle_image(a: Fraction, b: Fraction, lc: bool, hc: bool) -> Interval:
    """Image of the real interval <a,b> under y -> 2 dist(y, Z)."""

    def g(y):
        f = y - math.floor(y)
        return 2 * min(f, 1 - f)

    def hits(point):
        return point < b or (point == b and hc)

    m = Q(math.ceil(a))
    if m == a and not lc:
        m += 1
    half = Q(math.floor(a - Q(1, 2))) + Q(1, 2)
    if half < a or (half == a and not lc):
        half += 1
    ga, gb = g(a), g(b)
    if a == b:
        v = ga
        return Interval(v, v, lc and hc, lc and hc)
    if hits(m):
        low, low_c = Q(0), True
    else:
        low = min(ga, gb)
        low_c = (ga == low and lc) or (gb == low and hc)
    if hits(half):
        high, high_c = Q(1), True
    else:
        high = max(ga, gb)
        high_c = (ga == high and lc) or (gb == high and hc)
    return Interval(low, high, low_c, high_c)


def _piece_image(system: MetricSystem, p: Interval, n: int) -> list[Interval]:
    if n == 0:
        return [p]
    sid = system.id
    if sid == "doubling":
        s = 2**n
        return _reduce_mod1(p.lo * s, p.hi * s, p.lc, p.hc)
    if sid == "tent":
        s = 2 ** (n - 1)
        return [_triangle_image(p.lo * s, p.hi * s, p.lc, p.hc)]
    if sid.startswith("rot:"):
        t = n * system.angle
        return _reduce_mod1(p.lo + t, p.hi + t, p.lc, p.hc)
    raise ValueError(f"no interval images for {sid}")


def image(system, r: Region, n: int = 1) -> Region:
    """Exact n-fold forward image; flavor is preserved and the result is canonical."""
    system = _system(system)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if isinstance(r, CylinderRegion):
        return r._new([w[n:] if n < len(w) else "" for w in r.words])
    out: list[Interval] = []
    for p in r.pieces:
        out.extend(_piece_image(system, p, n))
    return r._new(out)


def image_orbit(system, r: Region, upto: int) -> list[Region]:
    """``[r, f(r), ..., f^upto(r)]``; stops recomputing once the whole space is reached."""
    system = _system(system)
    out = [r]
    cur = r
    for _ in range(upto):
        if cur.is_whole():
            out.append(cur)
            continue
        cur = image(system, cur, 1)
        out.append(cur)
    return out


# --------------------------------------------------------------------------
# preimages


def _branches(system: MetricSystem, t: int, lo: Fraction, hi: Fraction):
    """Affine branches (x0, x1, slope, offset) of the lift of f^t covering [lo, hi]."""
    sid = system.id
    if sid.startswith("rot:"):
        yield Q(0), Q(1), 1, t * system.angle
        return
    s = 2**t
    j0, j1 = math.floor(lo * s), math.floor(hi * s)
    if sid == "tent":
        j1 = min(j1, s - 1)
    if j1 - j0 + 1 > MAX_BRANCHES:
        raise ValueError("preimage would need too many branches; lower the time")
    for j in range(j0, j1 + 1):
        x0, x1 = Q(j, s), Q(j + 1, s)
        if sid == "doubling" or j % 2 == 0:
            yield x0, x1, s, -j
        else:
            yield x0, x1, -s, j + 1


def _pull_back(system: MetricSystem, target: IntervalRegion, t: int, piece: Interval) -> list[Interval]:
    if t == 0:
        return [_meet(q, piece) for q in target.pieces]
    out = []
    circle = system.kind == "circle"
    for x0, x1, slope, off in _branches(system, t, piece.lo, piece.hi):
        branch = _meet(Interval(x0, x1, True, True), piece)
        if branch.is_empty():
            continue
        y0, y1 = sorted((slope * branch.lo + off, slope * branch.hi + off))
        shifts = range(math.floor(y0), math.floor(y1) + 1) if circle else (0,)
        for z in shifts:
            for q in target.pieces:
                lo, hi = q.lo + z, q.hi + z
                if slope > 0:
                    cand = Interval((lo - off) / slope, (hi - off) / slope, q.lc, q.hc)
                else:
                    cand = Interval((hi - off) / slope, (lo - off) / slope, q.hc, q.lc)
                cand = _meet(cand, branch)
                if not cand.is_empty():
                    out.append(cand)
    if circle:
        out = [Interval(p.lo % 1 if p.lo >= 1 else p.lo, p.hi - math.floor(p.lo) if p.lo >= 1 else p.hi, p.lc, p.hc)
               for p in out]
    return out


def preimage(system, target: Region, t: int, within: Region | None = None) -> Region:
    """``f^{-t}(target)``, optionally intersected with ``within`` (exact)."""
    system = _system(system)
    if within is None:
        within = whole(system, target.flavor)
    if isinstance(target, CylinderRegion):
        words = []
        for u in within.words:
            for v in target.words:
                if len(u) >= t:
                    cand = u[:t] + v
                    if cand.startswith(u):
                        words.append(cand)
                    elif u.startswith(cand):
                        words.append(u)
                else:
                    free = t - len(u)
                    if free > 20:
                        raise ValueError("preimage would need too many cylinders; lower the time")
                    for bits in range(2**free):
                        words.append(u + (format(bits, f"0{free}b") if free else "") + v)
        return within._new(words, target.flavor)
    out: list[Interval] = []
    for piece in within.pieces:
        out.extend(_pull_back(system, target, t, piece))
    return IntervalRegion(system.id, system.kind, target.flavor, canonical_pieces(out, system.kind))


def preimage_refine(system, base: Region, constraints: Sequence[tuple[int, Region]]) -> Region:
    """``base`` intersected with f^{-t}(target) for every (t, target); may be empty."""
    system = _system(system)
    cur = base
    for t, target in constraints:
        if cur.is_empty():
            break
        cur = preimage(system, target, t, within=cur).with_flavor(base.flavor)
    return cur


# --------------------------------------------------------------------------
# metric quantities


def _arc_span(p: Interval) -> tuple[Fraction, Fraction]:
    length = p.hi - p.lo if p.lo <= p.hi else 1 - p.lo + p.hi
    return p.lo, length


def _lattice_hit(u: Fraction, v: Fraction, h: Fraction) -> bool:
    """Is there an integer m with u <= h + m <= v?"""
    return math.ceil(u - h) <= math.floor(v - h)


def _circle_pair(a: Interval, b: Interval, want_sup: bool) -> Fraction:
    sa, la = _arc_span(a)
    sb, lb = _arc_span(b)
    u, v = sb - (sa + la), sb + lb - sa
    if want_sup:
        if v - u >= 1 or _lattice_hit(u, v, Q(1, 2)):
            return Q(1, 2)
        return max(circle_distance(u, 0), circle_distance(v, 0))
    if _lattice_hit(u, v, Q(0)):
        return Q(0)
    return min(circle_distance(u, 0), circle_distance(v, 0))


def _lcp(u: str, v: str) -> int:
    n = min(len(u), len(v))
    for i in range(n):
        if u[i] != v[i]:
            return i
    return n


def _word_pair(u: str, v: str, want_sup: bool) -> Fraction:
    k = _lcp(u, v)
    if k == min(len(u), len(v)):
        return Q(1, 2**k) if want_sup else Q(0)
    return Q(1, 2**k)


def _pair(system: MetricSystem, a, b, want_sup: bool) -> Fraction:
    if system.kind == "shift":
        return _word_pair(a, b, want_sup)
    if system.kind == "circle":
        return _circle_pair(a, b, want_sup)
    if want_sup:
        return max(b.hi - a.lo, a.hi - b.lo)
    return max(Q(0), b.lo - a.hi, a.lo - b.hi)


def _units(r: Region):
    if isinstance(r, CylinderRegion):
        return list(r.words)
    return r.arcs()


def diameter(system, r: Region) -> Fraction:
    system = _system(system)
    if r.is_empty():
        return Q(0)
    if isinstance(r, CylinderRegion):
        ws = r.words
        if len(ws) == 1:
            return Q(1, 2 ** len(ws[0]))
        return Q(1, 2 ** _lcp(ws[0], ws[-1]))
    if system.kind == "segment":
        return r.pieces[-1].hi - r.pieces[0].lo
    units = _units(r)
    return max(_pair(system, units[i], units[j], True) for i in range(len(units)) for j in range(i, len(units)))


def inf_distance(system, a: Region, b: Region) -> Fraction:
    """Exact infimum of rho over pairs drawn one from each region."""
    system = _system(system)
    return min(_pair(system, x, y, False) for x in _units(a) for y in _units(b))


def sup_distance(system, a: Region, b: Region) -> Fraction:
    system = _system(system)
    return max(_pair(system, x, y, True) for x in _units(a) for y in _units(b))


def point_region(system, x, r: Region) -> Region:
    """The singleton {x} as a compact region (only for interval systems)."""
    system = _system(system)
    if system.kind == "shift":
        raise ValueError("shift points are not finite cylinders")
    return IntervalRegion(system.id, system.kind, COMPACT, (Interval(x, x, True, True),))


def point_distances(system, x, r: Region) -> tuple[Fraction, Fraction]:
    """(inf, sup) of rho(x, y) over y in r."""
    system = _system(system)
    if system.kind == "shift":
        lo, hi = None, None
        for w in r.words:
            k = _lcp(x.take(len(w)), w)
            if k == len(w):
                d_inf, d_sup = Q(0), Q(1, 2**k)
            else:
                d_inf = d_sup = Q(1, 2**k)
            lo = d_inf if lo is None else min(lo, d_inf)
            hi = d_sup if hi is None else max(hi, d_sup)
        return lo, hi
    pt = point_region(system, x, r)
    return inf_distance(system, pt, r), sup_distance(system, pt, r)


def largest_piece(system, r: Region):
    """Largest piece (by length / shortest word); ties go to the first in canonical order."""
    system = _system(system)
    if isinstance(r, CylinderRegion):
        return min(r.words, key=lambda w: (len(w), w))
    best = None
    for p in r.arcs():
        span = _arc_span(p)[1]
        if best is None or span > best[0]:
            best = (span, p)
    return best[1]


def piece_midpoint(p: Interval) -> Fraction:
    start, length = _arc_span(p)
    return (start + length / 2) % 1 if p.lo > p.hi else start + length / 2


# --------------------------------------------------------------------------
# shrinking


def shrink_around(system, c, enclosing: Region, target: Region, total_time: int,
                  cap: Fraction | None = None, budget: int = 64) -> Region:
    """Compact box around ``c`` inside ``enclosing`` whose total_time image lies in ``target``.

    Tries ``enclosing`` itself first.  Otherwise the starting radius is the
    smallest of: the room left inside ``enclosing``, half the cap, and the
    room around f^t(c) inside ``target`` divided by the map's Lipschitz
    constant to the power t.  The radius is then halved (the cylinder
    deepened) at most ``budget`` times; containment is re-checked exactly.
    """
    system = _system(system)
    if not enclosing.contains_point(c):
        raise ShrinkFailure("center is not in the enclosing box")
    y = system.iterate(c, total_time)
    if not target.contains_point(y):
        raise ShrinkFailure("center does not reach the target", time=total_time)
    enclosing = enclosing.with_flavor(COMPACT)
    if (cap is None or diameter(system, enclosing) <= cap) and image(system, enclosing, total_time).is_subset(target):
        return enclosing
    if system.kind == "shift":
        m = min(len(w) for w in enclosing.words if c.take(len(w)) == w)
        if cap is not None:
            while Q(1, 2**m) > cap:
                m += 1
        if not target.is_whole():
            depth = min(len(w) for w in target.words if y.take(len(w)) == w)
            m = max(m, total_time + depth)
        for step in range(budget + 1):
            box = cylinder_region(system, [c.take(m + step)], COMPACT)
            if image(system, box, total_time).is_subset(target):
                return box
        raise ShrinkFailure("no cylinder around the center reached the target", center=str(c))
    outside = enclosing.complement()
    r = system.beta / 2 if outside.is_empty() else point_distances(system, c, outside)[0]
    if cap is not None:
        r = min(r, Q(cap) / 2)
    miss = target.complement()
    if not miss.is_empty():
        r = min(r, point_distances(system, y, miss)[0] / Q(system.expansion) ** total_time)
    if r <= 0:
        raise ShrinkFailure("center lies on the boundary of the enclosing box or target")
    for _ in range(budget + 1):
        box = closed_ball(system, c, r)
        if box.is_subset(enclosing) and image(system, box, total_time).is_subset(target):
            return box
        r /= 2
    raise ShrinkFailure("bisection budget exhausted", center=str(c))


# --------------------------------------------------------------------------
# serialization


def _q_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def region_to_json(r: Region) -> dict:
    if isinstance(r, CylinderRegion):
        return {"system": r.system_id, "flavor": r.flavor, "cylinders": list(r.words)}
    default = r.flavor == COMPACT
    out = []
    for p in r.arcs():
        item = _q_pair(p.lo) + _q_pair(p.hi)
        if (p.lc, p.hc) != (default, default):
            item.append(("[" if p.lc else "(") + ("]" if p.hc else ")"))
        out.append(item)
    return {"system": r.system_id, "flavor": r.flavor, "pieces": out}


def _q_from(num, den) -> Fraction:
    if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool) or den <= 0:
        raise ValueError("rational endpoints must be integer pairs with positive denominator")
    q = Q(num, den)
    if q.numerator != num or q.denominator != den:
        raise ValueError("rational endpoint not in lowest terms")
    return q


def region_from_json(obj: dict) -> Region:
    if not isinstance(obj, dict):
        raise ValueError("region must be an object")
    system = get_system(obj["system"])
    flavor = obj["flavor"]
    if flavor not in (OPEN, COMPACT):
        raise ValueError(f"bad flavor {flavor!r}")
    if system.kind == "shift":
        words = obj["cylinders"]
        if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
            raise ValueError("cylinders must be a list of words")
        reg = cylinder_region(system, words, flavor)
        if list(reg.words) != words:
            raise ValueError("cylinder list not canonical")
        return reg
    items = []
    for item in obj["pieces"]:
        if not isinstance(item, list) or len(item) not in (4, 5):
            raise ValueError("interval piece must have 4 integers and optional flags")
        lo, hi = _q_from(item[0], item[1]), _q_from(item[2], item[3])
        if not (0 <= lo <= 1 and 0 <= hi <= 1):
            raise ValueError("endpoint outside the chart")
        if len(item) == 5:
            flags = item[4]
            if flags not in ("()", "[)", "(]", "[]"):
                raise ValueError("bad endpoint flags")
            lc, hc = flags[0] == "[", flags[1] == "]"
        else:
            lc = hc = flavor == COMPACT
        items.append((lo, hi, lc, hc))
    reg = interval_region(system, items, flavor)
    if region_to_json(reg) != {"system": system.id, "flavor": flavor, "pieces": obj["pieces"]}:
        raise ValueError("interval pieces not canonical")
    if flavor == COMPACT and any(p.lo == p.hi for p in reg.pieces) and len(reg.pieces) == 1:
        raise ValueError("compact regions need nonempty interior")
    return reg


def parse_region(text: str, system, flavor: str | None = None) -> Region:
    """CLI syntax: ``(0,1/8)``, ``[1/4,3/4]``, ``cyl:0,11``, ``whole``; join pieces with ``+``."""
    system = _system(system)
    text = text.strip()
    if text == "whole":
        return whole(system, flavor or OPEN)
    if text.startswith("cyl:"):
        if system.kind != "shift":
            raise ValueError("cylinders only exist on the shift")
        return cylinder_region(system, [w for w in text[4:].split(",")], flavor or OPEN)
    if system.kind == "shift":
        raise ValueError("shift regions are written cyl:w1,w2")
    items = []
    kinds = set()
    for part in text.split("+"):
        part = part.strip()
        if len(part) < 5 or part[0] not in "([" or part[-1] not in ")]":
            raise ValueError(f"cannot parse interval {part!r}")
        lo, hi = (Q(s.strip()) for s in part[1:-1].split(","))
        lc, hc = part[0] == "[", part[-1] == "]"
        kinds.add(COMPACT if lc and hc else OPEN)
        items.append((lo, hi, lc, hc))
    if flavor is None:
        flavor = COMPACT if kinds == {COMPACT} else OPEN
    return interval_region(system, items, flavor)

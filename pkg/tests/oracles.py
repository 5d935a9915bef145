"""Independent brute-force oracles shared by unit and acceptance tests.

Nothing here calls the closed-form image or preimage code: points are
pushed one map application at a time, and preimages come from
enumerating inverse branches by hand.
"""

from __future__ import annotations

import random
from fractions import Fraction as Q

from scrambled.metric_systems import ShiftPoint
from scrambled.region_algebra import COMPACT, OPEN, cylinder_region, interval_region


def random_region(system, rng: random.Random, flavor=None):
    flavor = flavor or rng.choice([OPEN, COMPACT])
    if system.kind == "shift":
        words = ["".join(rng.choice("01") for _ in range(rng.randint(1, 5))) for _ in range(rng.randint(1, 3))]
        return cylinder_region(system, words, flavor)
    pieces = []
    for _ in range(rng.randint(1, 3)):
        den = rng.choice([8, 12, 16, 30, 64, 97])
        a, b = sorted(rng.sample(range(den + 1), 2))
        if system.kind == "circle" and rng.random() < 0.2:
            a, b = b % den, a  # arc through 0
            if a == b:
                continue
        pieces.append((Q(a, den), Q(b, den), rng.random() < 0.5, rng.random() < 0.5))
    if not pieces:
        pieces = [(Q(1, 5), Q(2, 5), False, False)]
    return interval_region(system, pieces, flavor)


def sample_points(system, region, rng: random.Random, count: int = 40) -> list:
    """Points of ``region``: closed endpoints, piece midpoints and random interior points."""
    if system.kind == "shift":
        out = []
        for w in region.words:
            for _ in range(max(count // len(region.words), 1)):
                tail = "".join(rng.choice("01") for _ in range(rng.randint(0, 4)))
                period = "".join(rng.choice("01") for _ in range(rng.randint(1, 3)))
                out.append(ShiftPoint(w + tail, period))
        return out
    out = []
    for p in region.pieces:
        if p.lc:
            out.append(p.lo)
        if p.hc:
            out.append(p.hi % 1 if system.kind == "circle" else p.hi)
        if p.lo < p.hi:
            for _ in range(max(count // len(region.pieces), 2)):
                u = Q(rng.randint(1, 9999), 10000)
                out.append(p.lo + (p.hi - p.lo) * u)
    return [x for x in out if region.contains_point(x)]


def step_iterate(system, x, n: int):
    for _ in range(n):
        x = system.apply(x)
    return x


def brute_preimages(system, y, n: int) -> list:
    """Every x with f^n(x) = y, from inverse branches applied one step at a time."""
    if system.kind == "shift":
        out = [y]
        for _ in range(n):
            out = [ShiftPoint(b + p.prefix, p.period) for p in out for b in "01"]
        return out
    pts = [y]
    for _ in range(n):
        nxt = []
        for p in pts:
            if system.id == "doubling":
                nxt += [p / 2, (p + 1) / 2]
            elif system.id == "tent":
                nxt += [p / 2, 1 - p / 2]
            else:
                nxt.append((p - system.angle) % 1)
        pts = sorted(set(nxt))
    return pts

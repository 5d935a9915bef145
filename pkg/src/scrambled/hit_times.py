"""Hit-time sets N(f^s(U), V) and N(x, V) at an explicit horizon."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .metric_systems import MetricSystem, get_system, point_to_json
from .region_algebra import CylinderRegion, IntervalRegion, image, region_to_json


def _is_region(x) -> bool:
    return isinstance(x, (IntervalRegion, CylinderRegion))


class OrbitCache:
    """Forward images of regions (and orbits of points), extended on demand.

    One cache belongs to one caller; nothing is shared between calls unless
    the caller passes the same instance.
    """

    def __init__(self, system: MetricSystem):
        self.system = system
        self._orbits: dict = {}

    def at(self, source, n: int):
        orbit = self._orbits.setdefault(source, {0: source})
        if n in orbit:
            return orbit[n]
        prev = orbit.get(n - 1)
        if prev is None:
            # closed forms jump straight to a late time
            cur = _direct(self.system, source, n)
        elif _is_region(prev):
            cur = prev if prev.is_whole() else image(self.system, prev, 1)
        else:
            cur = self.system.apply(prev)
        orbit[n] = cur
        return cur


def hits(system: MetricSystem, source, target, n: int, cache: OrbitCache | None = None) -> bool:
    """Does the n-th image of ``source`` meet ``target`` (membership for points)?"""
    cur = cache.at(source, n) if cache else _direct(system, source, n)
    if _is_region(cur):
        return cur.intersects(target)
    return target.contains_point(cur)


def _direct(system, source, n):
    if _is_region(source):
        return image(system, source, n)
    return system.iterate(source, n)


@dataclass
class HitSet:
    source: object
    target: object
    s: int
    horizon: int
    times: list[int]
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        src = region_to_json(self.source) if _is_region(self.source) else {"point": point_to_json(self.source)}
        cert = {}
        for n, obj in self.certificate.items():
            cert[str(n)] = region_to_json(obj) if _is_region(obj) else {"point": point_to_json(obj)}
        return {
            "schema": "scrambled-hitset/1",
            "source": src,
            "target": region_to_json(self.target),
            "s": self.s,
            "horizon": self.horizon,
            "times": list(self.times),
            "certificate": cert,
        }


def hit_set(system, source, target, s: int = 0, horizon: int = 64,
            cache: OrbitCache | None = None, certify: bool = False) -> HitSet:
    """All n in [1, horizon] with f^{n+s}(source) meeting target (exact and complete)."""
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if s < 0:
        raise ValueError("shift s must be nonnegative")
    if _is_region(source) and source.is_empty():
        raise ValueError("source region is empty")
    cache = cache or OrbitCache(system)
    times, cert = [], {}
    for n in range(1, horizon + 1):
        if hits(system, source, target, n + s, cache):
            times.append(n)
            if certify:
                cert[n] = cache.at(source, n + s)
    return HitSet(source, target, s, horizon, times, cert)


def longest_consecutive_run(h: HitSet | Sequence[int], L: int) -> tuple[bool, int | None]:
    """Smallest start of a run of ``L`` consecutive members, if any."""
    times = h.times if isinstance(h, HitSet) else sorted(h)
    run_start, run_len, prev = None, 0, None
    for n in times:
        if prev is not None and n == prev + 1:
            run_len += 1
        else:
            run_start, run_len = n, 1
        if run_len >= L:
            return True, run_start
        prev = n
    return False, None


def max_run(h: HitSet | Sequence[int]) -> int:
    times = h.times if isinstance(h, HitSet) else sorted(h)
    best = cur = 0
    prev = None
    for n in times:
        cur = cur + 1 if prev is not None and n == prev + 1 else 1
        best = max(best, cur)
        prev = n
    return best


def joint_hit_set(system, pairs: Sequence[tuple], divisor: int = 1, horizon: int = 64,
                  cache: OrbitCache | None = None) -> list[int]:
    """Times n <= horizon divisible by ``divisor`` that lie in every pair's hit set."""
    if not isinstance(system, MetricSystem):
        system = get_system(system)
    if not pairs:
        raise ValueError("need at least one (source, target, s) pair")
    if divisor < 1:
        raise ValueError("divisor must be positive")
    cache = cache or OrbitCache(system)
    return [n for n in range(divisor, horizon + 1, divisor)
            if all(hits(system, src, tgt, n + s, cache) for src, tgt, s in pairs)]

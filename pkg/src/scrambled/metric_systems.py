"""Registry of exactly representable dynamical systems.

Every system acts on points that can be stored without rounding:
rationals for the circle and the unit segment, eventually periodic
binary words for the full shift.  No floats appear anywhere.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

Q = Fraction


@dataclass(frozen=True)
class ShiftPoint:
    """Eventually periodic binary sequence ``prefix + period + period + ...``.

    Stored canonically: the period is primitive and the prefix is as short
    as possible, so equal sequences compare equal.
    """

    prefix: str
    period: str

    def __post_init__(self):
        if not self.period:
            raise ValueError("period word must be nonempty")
        if set(self.prefix + self.period) - {"0", "1"}:
            raise ValueError("shift points use the alphabet {0,1}")
        period = _primitive_root(self.period)
        prefix = self.prefix
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1] + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    def symbol(self, i: int) -> str:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def take(self, n: int) -> str:
        if n <= len(self.prefix):
            return self.prefix[:n]
        reps = (n - len(self.prefix)) // len(self.period) + 1
        return (self.prefix + self.period * reps)[:n]

    def shifted(self, n: int) -> "ShiftPoint":
        if n <= len(self.prefix):
            return ShiftPoint(self.prefix[n:], self.period)
        k = (n - len(self.prefix)) % len(self.period)
        return ShiftPoint("", self.period[k:] + self.period[:k])

    def first_disagreement(self, other: "ShiftPoint") -> int | None:
        bound = max(len(self.prefix), len(other.prefix)) + _lcm(len(self.period), len(other.period))
        a, b = self.take(bound), other.take(bound)
        for i in range(bound):
            if a[i] != b[i]:
                return i
        return None

    def __str__(self) -> str:
        return f"{self.prefix}({self.period})"


def _primitive_root(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


Point = Union[Fraction, ShiftPoint]


def circle_distance(x: Fraction, y: Fraction) -> Fraction:
    d = abs(x - y) % 1
    return min(d, 1 - d)


def farey_points(count: int, include_one: bool) -> list[Fraction]:
    """First ``count`` points of a nested enumeration of [0,1] by denominator.

    Nested means the first r points are a prefix of the first r+1 points,
    which keeps grid searches monotone in the resolution.
    """
    out = [Q(0)]
    if include_one:
        out.append(Q(1))
    q = 2
    while len(out) < count:
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                out.append(Q(p, q))
                if len(out) >= count:
                    break
        q += 1
    return out[:count]


class MetricSystem:
    """Base class; concrete systems override the map and metric."""

    id: str
    kind: str  # "circle" | "segment" | "shift"
    beta: Fraction
    fixed_points: tuple
    expansion = 2  # Lipschitz constant of the map

    def apply(self, p):
        raise NotImplementedError

    def iterate(self, p, n: int):
        for _ in range(n):
            p = self.apply(p)
        return p

    def distance(self, p, q) -> Fraction:
        raise NotImplementedError

    def contains(self, p) -> bool:
        raise NotImplementedError

    def normalize(self, p):
        return p

    def grid(self, resolution: int) -> list:
        raise NotImplementedError

    def rigidity_witness(self, n: int):
        raise NotImplementedError

    def antipodes(self, c) -> list:
        """Points that are exactly farthest from ``c`` (used for far targets)."""
        return []

    def period(self) -> int | None:
        """``q`` with f^q = identity, when the system is periodic."""
        return None

    def orbit(self, p, horizon: int) -> list:
        out = [p]
        for _ in range(horizon):
            p = self.apply(p)
            out.append(p)
        return out

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.id}>"


class DoublingCircle(MetricSystem):
    id = "doubling"
    kind = "circle"
    beta = Q(1, 2)
    fixed_points = (Q(0),)

    def apply(self, p):
        return (2 * p) % 1

    def iterate(self, p, n):
        return (p * 2**n) % 1

    def distance(self, p, q):
        return circle_distance(p, q)

    def contains(self, p):
        return isinstance(p, Fraction) and 0 <= p < 1

    def normalize(self, p):
        return Q(p) % 1

    def grid(self, resolution):
        return farey_points(resolution, include_one=False)

    def rigidity_witness(self, n):
        # (2^n - 1) x = 1/2 mod 1 puts f^n(x) antipodal to x
        return Q(1, 2 * (2**n - 1))

    def antipodes(self, c):
        return [(c + Q(1, 2)) % 1]


class TentInterval(MetricSystem):
    id = "tent"
    kind = "segment"
    beta = Q(1)
    fixed_points = (Q(0), Q(2, 3))

    def apply(self, p):
        return 1 - abs(2 * p - 1)

    def iterate(self, p, n):
        if n == 0:
            return p
        # T^n(x) = T(frac(2^(n-1) x)); T(1) = 0 matches frac(integer) = 0
        return self.apply((p * 2 ** (n - 1)) % 1)

    def distance(self, p, q):
        return abs(p - q)

    def contains(self, p):
        return isinstance(p, Fraction) and 0 <= p <= 1

    def normalize(self, p):
        return Q(p)

    def grid(self, resolution):
        return farey_points(resolution, include_one=True)

    def rigidity_witness(self, n):
        return Q(1)

    def antipodes(self, c):
        return [Q(0), Q(1)]


class FullShift2(MetricSystem):
    id = "shift2"
    kind = "shift"
    beta = Q(1)
    fixed_points = (ShiftPoint("", "0"), ShiftPoint("", "1"))

    def apply(self, p):
        return p.shifted(1)

    def iterate(self, p, n):
        return p.shifted(n)

    def distance(self, p, q):
        i = p.first_disagreement(q)
        return Q(0) if i is None else Q(1, 2**i)

    def contains(self, p):
        return isinstance(p, ShiftPoint)

    def grid(self, resolution):
        out: list[ShiftPoint] = []
        seen = set()
        length = 1
        while len(out) < resolution:
            for bits in range(2**length):
                w = format(bits, f"0{length}b")
                pt = ShiftPoint("", w)
                if pt not in seen:
                    seen.add(pt)
                    out.append(pt)
                    if len(out) >= resolution:
                        break
            length += 1
        return out

    def rigidity_witness(self, n):
        return ShiftPoint("", "0" * n + "1")

    def antipodes(self, c):
        flipped = "1" if c.symbol(0) == "0" else "0"
        # prefix+period symbols end on a period boundary, so the tail realigns
        return [ShiftPoint(flipped + c.take(len(c.prefix) + len(c.period))[1:], c.period)]


class RationalRotation(MetricSystem):
    """Rotation by p/q; periodic, hence never weakly mixing (control system)."""

    kind = "circle"
    beta = Q(1, 2)
    expansion = 1

    def __init__(self, angle: Fraction):
        angle = Q(angle) % 1
        self.angle = angle
        self.id = f"rot:{angle.numerator}/{angle.denominator}"
        self.fixed_points = tuple(self.grid(1)) if angle == 0 else ()

    def apply(self, p):
        return (p + self.angle) % 1

    def iterate(self, p, n):
        return (p + n * self.angle) % 1

    def distance(self, p, q):
        return circle_distance(p, q)

    def contains(self, p):
        return isinstance(p, Fraction) and 0 <= p < 1

    def normalize(self, p):
        return Q(p) % 1

    def grid(self, resolution):
        return farey_points(resolution, include_one=False)

    def rigidity_witness(self, n):
        return Q(0)

    def antipodes(self, c):
        return [(c + Q(1, 2)) % 1]

    def period(self):
        return self.angle.denominator


_FIXED = {cls.id: cls() for cls in (DoublingCircle, TentInterval, FullShift2)}
_ROT = re.compile(r"^rot:(-?\d+)/(\d+)$")


def get_system(system_id: str) -> MetricSystem:
    if system_id in _FIXED:
        return _FIXED[system_id]
    m = _ROT.match(system_id)
    if m and int(m.group(2)) > 0:
        return RationalRotation(Q(int(m.group(1)), int(m.group(2))))
    raise KeyError(f"unknown system id {system_id!r}")


def registered_ids() -> list[str]:
    return list(_FIXED) + ["rot:p/q"]


def apply_point(system: MetricSystem, p):
    return system.apply(p)


def distance(system: MetricSystem, p, q) -> Fraction:
    return system.distance(p, q)


def space_diameter(system: MetricSystem) -> Fraction:
    return system.beta


def special_points(system: MetricSystem, n: int) -> list:
    return list(system.fixed_points) + [system.rigidity_witness(n)]


def rigidity_gap(system: MetricSystem, n: int, resolution: int, extra: tuple = ()):
    """Largest observed rho(f^n(x), x) over the grid plus special points.

    The value is a certified lower bound for delta_n; the grid is nested,
    so the bound never decreases as ``resolution`` grows.
    """
    if n < 1 or resolution < 2:
        raise ValueError("need n >= 1 and resolution >= 2")
    best, arg = Q(-1), None
    for x in _candidates(system, n, resolution, extra):
        d = system.distance(system.iterate(x, n), x)
        if d > best:
            best, arg = d, x
    return best, arg


def _candidates(system, n, resolution, extra) -> Iterator:
    yield from system.grid(resolution)
    yield from extra
    yield from special_points(system, n)


def delta_lower(system: MetricSystem, n_max: int = 8, resolution: int = 64) -> tuple[Fraction, list]:
    """min over n <= n_max of the delta_n lower bounds, with the per-n values."""
    per_n = [rigidity_gap(system, n, resolution)[0] for n in range(1, n_max + 1)]
    return min(per_n), per_n


def farthest_point(system: MetricSystem, c, resolution: int = 64):
    best, arg = Q(-1), None
    for x in list(system.grid(resolution)) + system.antipodes(c):
        d = system.distance(x, c)
        if d > best:
            best, arg = d, x
    return arg


# -- JSON forms of points -------------------------------------------------

def point_to_json(p):
    if isinstance(p, ShiftPoint):
        return {"prefix": p.prefix, "period": p.period}
    return [p.numerator, p.denominator]


def point_from_json(obj):
    if isinstance(obj, dict):
        return ShiftPoint(obj["prefix"], obj["period"])
    num, den = obj
    if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
        raise ValueError("rational must be [num, den] with den > 0")
    q = Q(num, den)
    if q.numerator != num or q.denominator != den:
        raise ValueError("rational not in lowest terms")
    return q


def parse_point(text: str, system: MetricSystem):
    """``1/3`` for interval systems; ``10|1`` (prefix|period) or ``(01)`` for the shift."""
    text = text.strip()
    if system.kind == "shift":
        if "|" in text:
            prefix, period = text.split("|", 1)
        elif text.startswith("(") and text.endswith(")"):
            prefix, period = "", text[1:-1]
        else:
            prefix, period = text, "0"
        return ShiftPoint(prefix, period)
    return system.normalize(Q(text))

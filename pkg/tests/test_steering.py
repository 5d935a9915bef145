from __future__ import annotations

from fractions import Fraction as Q

import pytest

from scrambled.errors import HorizonExhausted, NoMember
from scrambled.metric_systems import ShiftPoint, get_system
from scrambled.region_algebra import COMPACT, ball, cylinder_region, diameter, image, interval_region, whole
from scrambled.steering import (
    Cover,
    SteerRequest,
    orbit_cover,
    select_cover_member,
    steer,
    tracked_steer,
)

D, T, S = get_system("doubling"), get_system("tent"), get_system("shift2")


def iv(system, lo, hi, flavor="open"):
    return interval_region(system, [(Q(lo), Q(hi))], flavor)


def test_steer_doubling_example():
    box = iv(D, 0, Q(1, 4), COMPACT)
    step = steer(SteerRequest(D, [(box, ball(D, Q(1, 3), Q(1, 24)))]))
    assert step.time == 1
    assert step.refined == [iv(D, Q(1, 6) - Q(1, 96), Q(1, 6) + Q(1, 96), COMPACT)]


@pytest.mark.parametrize("system", [D, T])
def test_steer_whole_target(system):
    box = iv(system, Q(1, 5), Q(2, 5), COMPACT)
    step = steer(SteerRequest(system, [(box, whole(system))], floor=7, shrink_cap=Q(1, 64)))
    assert step.time == 8
    assert diameter(system, step.refined[0]) <= Q(1, 64)


def test_steer_shift_example():
    box = cylinder_region(S, ["00"], COMPACT)
    step = steer(SteerRequest(S, [(box, cylinder_region(S, ["11"]))], s=1, divisor=2))
    assert step.time == 2
    (r,) = step.refined
    assert r.is_subset(box) and all(len(w) >= 5 for w in r.words)
    assert image(S, r, 3).is_subset(cylinder_region(S, ["11"]))


def test_tracked_doubling_example():
    req = SteerRequest(D, [(iv(D, 0, Q(1, 4), COMPACT), iv(D, Q(1, 2), Q(3, 4)))],
                       tracked=(Q(1, 3), iv(D, Q(1, 4), Q(1, 2))))
    step = tracked_steer(req)
    assert step.time == 2 and step.tracked_hit
    assert step.refined == [iv(D, Q(9, 64), Q(11, 64), COMPACT)]
    assert image(D, step.refined[0], 2).is_subset(iv(D, Q(1, 2), Q(3, 4)))


def test_tracked_shift_example():
    req = SteerRequest(S, [(cylinder_region(S, ["1"], COMPACT), cylinder_region(S, ["00"]))],
                       tracked=(ShiftPoint("", "01"), cylinder_region(S, ["0"])))
    step = tracked_steer(req)
    assert step.time == 2
    assert step.refined == [cylinder_region(S, ["1000"], COMPACT)]


def test_tracked_fixed_point_is_free():
    items = [(iv(D, Q(1, 5), Q(2, 5), COMPACT), iv(D, Q(1, 2), Q(3, 4)))]
    plain = steer(SteerRequest(D, items))
    tracked = tracked_steer(SteerRequest(D, items, tracked=(Q(0), ball(D, Q(0), Q(1, 8)))))
    assert plain.time == tracked.time


def test_divisor_and_filter():
    items = [(iv(D, Q(1, 5), Q(2, 5), COMPACT), iv(D, Q(1, 2), Q(3, 4)))]
    assert steer(SteerRequest(D, items, divisor=6)).time % 6 == 0
    assert steer(SteerRequest(D, items, time_filter=lambda k: k in {11, 40})).time == 11


def test_horizon_exhausted(monkeypatch):
    monkeypatch.setenv("SCRAMBLE_HORIZON_CAP", "8")
    items = [(iv(D, 0, Q(1, 1024), COMPACT), iv(D, Q(1, 2), Q(3, 4)))]
    with pytest.raises(HorizonExhausted) as info:
        steer(SteerRequest(D, items))
    assert info.value.code == "HORIZON_EXHAUSTED"


def test_rotation_never_reaches_disjoint_orbit():
    r = get_system("rot:1/3")
    items = [(iv(r, 0, Q(1, 12), COMPACT), iv(r, Q(1, 6), Q(1, 4)))]
    with pytest.raises(HorizonExhausted):
        steer(SteerRequest(r, items, horizon_limit=64))


def test_request_validation():
    with pytest.raises(ValueError):
        SteerRequest(D, [])
    with pytest.raises(ValueError):
        steer(SteerRequest(D, [(whole(D, COMPACT), whole(D))], tracked=(Q(0), whole(D))))


def test_cover_selection_examples():
    half, upper = iv(D, 0, Q(1, 2)), iv(D, Q(1, 4), 1)
    cover = Cover([half, upper], Q(1, 3), 12)
    assert cover.check(D)
    idx, count = select_cover_member(D, Q(1, 3), 0, cover, (half, half), 12)
    assert idx in (0, 1) and count > 0
    assert select_cover_member(D, Q(1, 3), 0, Cover([whole(D)], Q(1, 3), 12), (half, half), 12)[0] == 0
    r = get_system("rot:1/3")
    arcs = [interval_region(r, [(Q(11, 12), Q(1, 4))]), iv(r, Q(1, 4), Q(7, 12)), iv(r, Q(7, 12), Q(11, 12))]
    idx, _ = select_cover_member(r, Q(0), 0, Cover(arcs, Q(0), 12), (whole(r), whole(r)), 12)
    assert arcs[idx].contains_point(Q(0))


def test_orbit_cover_and_no_member():
    cover = orbit_cover(D, Q(1, 7), Q(1, 50), 10)
    assert len(cover.members) == 3 and cover.check(D)
    far = Cover([iv(D, Q(1, 2), Q(5, 8))], Q(0), 8)
    with pytest.raises(NoMember):
        select_cover_member(D, Q(0), 0, far, (whole(D), whole(D)), 8)

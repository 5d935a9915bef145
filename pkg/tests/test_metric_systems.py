from __future__ import annotations

from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from scrambled.metric_systems import (
    ShiftPoint,
    apply_point,
    delta_lower,
    distance,
    farthest_point,
    get_system,
    parse_point,
    point_from_json,
    point_to_json,
    rigidity_gap,
    space_diameter,
)

D, T, S = get_system("doubling"), get_system("tent"), get_system("shift2")

rationals = st.fractions(min_value=0, max_value=1, max_denominator=1000)
words = st.text(alphabet="01", max_size=6)
periods = st.text(alphabet="01", min_size=1, max_size=4)
shift_points = st.builds(ShiftPoint, words, periods)


def test_apply_examples():
    assert apply_point(D, Q(1, 3)) == Q(2, 3)
    assert apply_point(T, Q(1)) == 0
    assert apply_point(S, ShiftPoint("10", "1")) == ShiftPoint("0", "1")


def test_distance_examples():
    assert distance(D, Q(1, 8), Q(7, 8)) == Q(1, 4)
    assert distance(T, Q(0), Q(1)) == 1
    assert distance(S, ShiftPoint("", "0"), ShiftPoint("", "1")) == 1


def test_space_diameters():
    assert [space_diameter(s) for s in (D, T, S)] == [Q(1, 2), 1, 1]


def test_rigidity_examples():
    assert rigidity_gap(T, 1, 64) == (1, 1)
    assert rigidity_gap(D, 1, 64) == (Q(1, 2), Q(1, 2))
    assert S.distance(S.iterate(ShiftPoint("", "0001"), 3), ShiftPoint("", "0001")) == 1
    assert rigidity_gap(S, 3, 64)[0] == 1


def test_delta_lower_values():
    assert delta_lower(D)[0] == Q(1, 2)
    assert delta_lower(T)[0] == 1
    assert delta_lower(S)[0] == 1


def test_rotation_is_periodic():
    r = get_system("rot:1/3")
    assert r.iterate(Q(1, 7), 3) == Q(1, 7)
    assert rigidity_gap(r, 3, 64)[0] == 0
    with pytest.raises(KeyError):
        get_system("rot:1/0")
    with pytest.raises(KeyError):
        get_system("logistic")


def test_shift_point_canonical():
    assert ShiftPoint("0101", "01") == ShiftPoint("", "01")
    assert ShiftPoint("", "0101") == ShiftPoint("", "01")
    assert str(ShiftPoint("0", "10")) == "(01)"
    with pytest.raises(ValueError):
        ShiftPoint("2", "0")
    with pytest.raises(ValueError):
        ShiftPoint("1", "")


def test_parse_point():
    assert parse_point("1/3", D) == Q(1, 3)
    assert parse_point("(01)", S) == ShiftPoint("", "01")
    assert parse_point("10|1", S) == ShiftPoint("10", "1")


@given(rationals)
def test_doubling_closed_on_rationals(x):
    y = D.apply(D.normalize(x))
    assert 0 <= y < 1 and isinstance(y, Q)


@given(rationals)
def test_tent_stays_in_segment(x):
    assert 0 <= T.apply(x) <= 1


@given(rationals, rationals, rationals)
def test_circle_metric_axioms(x, y, z):
    x, y, z = (D.normalize(v) for v in (x, y, z))
    assert D.distance(x, y) == D.distance(y, x) <= Q(1, 2)
    assert D.distance(x, z) <= D.distance(x, y) + D.distance(y, z)
    assert (D.distance(x, y) == 0) == (x == y)


@given(shift_points, shift_points, shift_points)
def test_shift_ultrametric(x, y, z):
    assert S.distance(x, z) <= max(S.distance(x, y), S.distance(y, z))
    assert (S.distance(x, y) == 0) == (x == y)


@given(shift_points, st.integers(0, 10))
def test_shift_iterate_matches_symbols(x, n):
    y = S.iterate(x, n)
    assert y.take(12) == "".join(x.symbol(n + i) for i in range(12))


@given(shift_points)
def test_point_json_round_trip(x):
    assert point_from_json(point_to_json(x)) == x


def test_point_json_rejects_non_lowest_terms():
    with pytest.raises(ValueError):
        point_from_json([2, 4])


@pytest.mark.parametrize("system", [D, T, S])
def test_farthest_point_is_far(system):
    c = system.fixed_points[0]
    assert system.distance(farthest_point(system, c), c) == space_diameter(system)

from __future__ import annotations

import itertools
import json
import math
from fractions import Fraction as Q

import pytest

from scrambled.cantor_builder import (
    BuilderConfig,
    ConstructionTrace,
    breve_address,
    breve_prefixes,
    build,
    diagonal_pairs,
    extract_candidates,
    leaf_boxes,
    rigidity_center,
    scheduled_limit,
)
from scrambled.errors import SchemaError
from scrambled.metric_systems import ShiftPoint, get_system
from scrambled.region_algebra import diameter

from conftest import SYSTEMS, cached_trace


def test_breve_examples():
    assert breve_address("10") == "110"
    assert breve_address("") == ""
    assert breve_address("011") == "001011"
    assert breve_prefixes(3) == {"000", "001", "110", "111"}


def test_stage_one_counts():
    trace = cached_trace("doubling", 1)
    assert len(trace.times()) == 23
    assert len(leaf_boxes(trace)) == 4
    assert [len(extract_candidates(trace, "raw", 1)), len(extract_candidates(trace, "raw", 2))] == [4, 0]


def test_empty_build():
    trace = build(BuilderConfig("tent", 0))
    assert trace.stages == [] and trace.times() == [] and leaf_boxes(trace) == []


def test_shift_stage_two_with_eight_tuples():
    tuples = [tuple(((i >> b) & 1) + 1 for b in range(16)) for i in range(8)]
    trace = build(BuilderConfig("shift2", 2, enumeration_tuples={2: tuples}))
    steps = trace.stages[1].steps
    assert sum(st.kind != "enumerate" for st in steps) == 20
    assert sum(st.kind == "enumerate" for st in steps) == 8
    assert len(leaf_boxes(trace)) == 16


def test_breve_selection_stage_two():
    trace = cached_trace("doubling", 2)
    addrs = {b.address for b in extract_candidates(trace, "breve", 1)}
    assert addrs == {"000", "001", "110", "111"}


@pytest.mark.parametrize("system", SYSTEMS)
def test_schedule_shape(system):
    trace = cached_trace(system, 2)
    for sr in trace.stages:
        ell = sr.stage
        lim_div, lim_track = scheduled_limit(ell)
        kinds = [st.kind for st in sr.steps]
        assert kinds.count("separation") == ell * (ell + 1)
        assert kinds.count("sync") == ell
        assert kinds.count("track") == 2 * ell * (ell + 1)
        for st in sr.steps:
            needs = st.index <= lim_div or st.index > lim_track
            assert (st.divisor == math.factorial(ell)) == needs or ell == 1
            assert st.time % st.divisor == 0
        assert sr.cap == Q(1, 2 ** (2 * ell + 2))


@pytest.mark.parametrize("system", SYSTEMS)
def test_leaf_counts(system):
    for ell in (1, 2):
        trace = cached_trace(system, ell)
        assert len(leaf_boxes(trace)) == ell * 2 ** (ell + 1)
        assert all(len(b.address) == ell + 1 for b in leaf_boxes(trace))


def test_limits_and_validation():
    with pytest.raises(ValueError):
        BuilderConfig("doubling", 4)
    with pytest.raises(ValueError):
        build(BuilderConfig("doubling", 2, enumeration="full"))
    with pytest.raises(ValueError):
        BuilderConfig("doubling", 1, sync_mode="other")


def test_time_filter_mode():
    trace = build(BuilderConfig("doubling", 1, time_filter={"kind": "residue", "modulus": 3, "residue": 1}))
    steps = trace.stages[0].steps
    assert all(st.divisor == 1 for st in steps)
    assert all(st.filtered == (st.kind != "track") for st in steps)
    assert all(st.time % 3 == 1 for st in steps if st.filtered)
    assert set(trace.m_times()) == {st.time for st in steps if st.filtered}


def test_fixed_point_sync_points():
    expected = {"doubling": ["0", "1/2", "1/4"], "tent": ["0", "1", "1/2"], "shift2": ["(0)", "(01)", "0(01)"]}
    for system, pts in expected.items():
        cfg = BuilderConfig(system, 3, sync_mode="fixed-point")
        assert [str(p) for p in cfg.sync_points] == pts


def test_rigidity_centers():
    assert list(itertools.islice(diagonal_pairs(), 4)) == [(1, 0), (1, 1), (2, 0), (1, 2)]
    d = get_system("doubling")
    assert rigidity_center(d, 1, 1) == Q(1, 4)
    s = get_system("shift2")
    assert rigidity_center(s, 1, 1) == ShiftPoint("0", "01")


def test_json_round_trip_and_determinism():
    trace = cached_trace("tent", 2)
    text = json.dumps(trace.to_json(), sort_keys=True)
    again = ConstructionTrace.from_json(json.loads(text))
    assert json.dumps(again.to_json(), sort_keys=True) == text
    assert json.dumps(build(BuilderConfig("tent", 2)).to_json(), sort_keys=True) == text


def test_from_json_errors():
    with pytest.raises(SchemaError):
        ConstructionTrace.from_json({"schema": "other"})
    obj = cached_trace("doubling", 1).to_json()
    obj["stages"][0]["steps"][0]["items"][0]["box"]["pieces"][0][1] = 0
    with pytest.raises(SchemaError) as info:
        ConstructionTrace.from_json(obj)
    assert info.value.code == "SCHEMA_ERROR"


@pytest.mark.parametrize("system", SYSTEMS)
def test_boxes_shrink_below_cap(system):
    trace = cached_trace(system, 2)
    for sr in trace.stages:
        for it in sr.steps[-1].items:
            assert 0 < diameter(trace.system, it.box) <= sr.cap

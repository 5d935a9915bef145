from __future__ import annotations

import copy
from fractions import Fraction as Q

import pytest

from scrambled.cantor_builder import AddressedBox, build, BuilderConfig, extract_candidates, leaf_boxes
from scrambled.errors import ModeError, TargetNotScheduled
from scrambled.metric_systems import get_system
from scrambled.region_algebra import interval_region, region_from_json, region_to_json, whole
from scrambled.verifier import (
    CERTIFIED,
    REFUTED,
    default_corpus,
    reverify_trace,
    verify_chaoticity_sample,
    verify_invariant_scrambled,
    verify_scrambled_pair,
    verify_tracked_pair,
    verify_transitivity,
    weak_mixing_signature,
)

from conftest import cached_trace

D = get_system("doubling")


def box(trace, j, address):
    return next(b for b in leaf_boxes(trace) if (b.j, b.address) == (j, address))


def widen(obj, amount):
    r = region_from_json(obj)
    p = r.arcs()[0]
    return region_to_json(interval_region(r.system_id, [(p.lo - amount, p.hi + amount, True, True)], "compact"))


def test_reverify_stage_one():
    rep = reverify_trace("doubling", cached_trace("doubling", 1))
    assert rep.verdict == CERTIFIED and rep.failures == []
    assert rep.to_json()["schema"] == "scrambled-report/1"


def test_widened_box_is_pinpointed():
    obj = copy.deepcopy(cached_trace("doubling", 1).to_json())
    item = obj["stages"][0]["steps"][5]["items"][2]
    item["box"] = widen(item["box"], Q(1, 1000))
    rep = reverify_trace("doubling", obj)
    assert rep.verdict == REFUTED
    assert any(f.get("step") == 6 and f.get("address") == item["address"] for f in rep.failures)


def test_empty_trace_vacuous():
    assert reverify_trace("tent", build(BuilderConfig("tent", 0))).certified


def test_scrambled_pair_stage_one():
    trace = cached_trace("doubling", 1)
    rep = verify_scrambled_pair(D, box(trace, 1, "00"), box(trace, 1, "01"), trace)
    assert rep.certified
    same = box(trace, 1, "00")
    assert verify_scrambled_pair(D, same, same, trace).verdict == REFUTED


def test_scrambled_pair_across_families():
    trace = cached_trace("shift2", 2)
    a = extract_candidates(trace, "separable", 1)[0]
    b = extract_candidates(trace, "separable", 2)[0]
    assert verify_scrambled_pair("shift2", a, b, trace).certified


def test_tracked_pair_stage_one():
    trace = cached_trace("doubling", 1)
    rep = verify_tracked_pair(D, Q(1, 3), box(trace, 1, "00"), trace, 0)
    assert rep.certified


def test_invariant_needs_fixed_point_mode():
    with pytest.raises(ModeError):
        verify_invariant_scrambled(D, cached_trace("doubling", 2), 0, 1)


def test_invariant_fixed_point_doubling():
    trace = cached_trace("doubling", 2, "fixed-point")
    rep = verify_invariant_scrambled(D, trace, 0, 1)
    assert rep.certified
    assert rep.parameters["delta_lower"] == Q(1, 2)


def test_transitivity():
    trace = cached_trace("doubling", 2)
    u1, u2 = trace.config.base_opens[:2]
    b = box(trace, 1, "000")
    assert verify_transitivity(D, b, [(u1, 1), (u2, 2)], trace).certified
    assert verify_transitivity(D, b, [(whole(D), 1)], trace).certified
    with pytest.raises(TargetNotScheduled):
        verify_transitivity(D, b, [(interval_region(D, [(Q(1, 1000), Q(1, 999))]), 1)], trace)


def test_weak_mixing_signature():
    assert weak_mixing_signature(D, default_corpus(D), 64).certified
    rot = get_system("rot:1/3")
    u = interval_region(rot, [(0, Q(1, 6))])
    rep = weak_mixing_signature(rot, [(u, u)], 60)
    assert rep.verdict == REFUTED
    assert rep.failures[0]["periodicity_witness"] == {"period": 3, "residues": [0]}
    w = whole(D)
    rep = weak_mixing_signature(D, [(w, w)], 16)
    assert rep.certified and rep.witnesses[0]["longest_run"] == 16


def test_chaoticity_sample():
    v = interval_region(D, [(Q(1, 4), Q(3, 8))])
    rep = verify_chaoticity_sample(D, Q(0), v)
    assert rep.certified
    assert verify_chaoticity_sample(D, Q(1, 3), v, eta=Q(0)).certified

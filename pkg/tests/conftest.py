from __future__ import annotations

import pytest

from scrambled.cantor_builder import BuilderConfig, build

SYSTEMS = ("doubling", "tent", "shift2")
_TRACES: dict = {}


def cached_trace(system: str, stages: int, sync_mode: str = "generic"):
    """Builds are deterministic, so one trace per configuration serves every test."""
    key = (system, stages, sync_mode)
    if key not in _TRACES:
        _TRACES[key] = build(BuilderConfig(system, stages, sync_mode=sync_mode))
    return _TRACES[key]


def remember_trace(trace) -> None:
    cfg = trace.config
    _TRACES.setdefault((cfg.system.id, cfg.stages, cfg.sync_mode), trace)


@pytest.fixture(scope="session")
def trace_of():
    return cached_trace

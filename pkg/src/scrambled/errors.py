"""Domain errors. Each carries a stable ``code`` string used by the CLI and reports."""

from __future__ import annotations


class ScrambleError(Exception):
    code = "ERROR"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class HorizonExhausted(ScrambleError):
    code = "HORIZON_EXHAUSTED"


class SeedFailure(ScrambleError):
    code = "SEED_FAILURE"


class SchemaError(ScrambleError):
    code = "SCHEMA_ERROR"


class NotComparable(ScrambleError):
    code = "NOT_COMPARABLE"


class ModeError(ScrambleError):
    code = "MODE_ERROR"


class TargetNotScheduled(ScrambleError):
    code = "TARGET_NOT_SCHEDULED"


class NoMember(ScrambleError):
    code = "NO_MEMBER"


class ShrinkFailure(ScrambleError):
    code = "SHRINK_FAILURE"

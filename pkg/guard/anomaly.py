# guard/anomaly.py
"""
anomaly.py – plausibility filter on the subscriber side.

Two kinds of bound, both keyed by field path (wildcards allowed):

* ``bounds``   – every reached leaf must lie in ``[lo, hi]``;
* ``max_step`` – every reached leaf may move at most ``max_step`` away from
  the same leaf of the last *accepted* message.

Out-of-range values are rejected, never clamped.
"""
from __future__ import annotations

import math
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, field_validator

from guard.verdict import RejectReason, Verdict
from shared.errors import PathUnresolved
from wire.kinds import MessageSchema
from wire.paths import FieldPath


class AnomalyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_step: dict[str, float] = {}
    bounds: dict[str, tuple[float, float]] = {}

    @field_validator("max_step")
    @classmethod
    def check_steps(cls, v: dict[str, float]) -> dict[str, float]:
        for path, step in v.items():
            _parse_or_value_error(path)
            if not math.isfinite(step) or step <= 0:
                raise ValueError(f"max_step[{path}] must be finite and > 0")
        return v

    @field_validator("bounds")
    @classmethod
    def check_bounds(cls, v: dict[str, tuple[float, float]]) -> dict[str, tuple[float, float]]:
        for path, (lo, hi) in v.items():
            _parse_or_value_error(path)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"bounds[{path}] must be finite with lo <= hi")
        return v

    def check_against(self, schema: MessageSchema) -> None:
        for path in (*self.bounds, *self.max_step):
            FieldPath.parse(path).check(schema)


def anomaly_check(cfg: AnomalyConfig, prev: Optional[dict[str, Any]], candidate: dict[str, Any]) -> Verdict:
    """Pure check of *candidate* against *cfg*, relative to *prev* (may be None)."""
    for text, (lo, hi) in cfg.bounds.items():
        for v in _values(text, candidate):
            if not (lo <= v <= hi):
                return Verdict.reject(RejectReason.ABSOLUTE_BOUND, {"path": text, "value": v})
    if prev is None:
        return Verdict.accept()
    for text, step in cfg.max_step.items():
        for old, new in zip(_values(text, prev), _values(text, candidate)):
            # NaN never passes
            if not abs(new - old) <= step:
                return Verdict.reject(
                    RejectReason.STEP_CHANGE, {"path": text, "prev": old, "value": new}
                )
    return Verdict.accept()


def _values(text: str, value: dict[str, Any]) -> list[float]:
    try:
        return FieldPath.parse(text).get(value)
    except PathUnresolved:
        # e.g. an empty points array; nothing to bound
        return []


class AnomalyDetector:
    """Stateful wrapper: remembers the last accepted message."""

    def __init__(self, cfg: AnomalyConfig, prev: Optional[dict[str, Any]] = None):
        self.cfg = cfg
        self.prev = prev
        self.rejected = 0

    def check(self, candidate: dict[str, Any]) -> Verdict:
        verdict = anomaly_check(self.cfg, self.prev, candidate)
        if verdict.accepted:
            self.prev = candidate
        else:
            self.rejected += 1
        return verdict


def _parse_or_value_error(path: str) -> FieldPath:
    try:
        return FieldPath.parse(path)
    except PathUnresolved as exc:
        raise ValueError(str(exc)) from None

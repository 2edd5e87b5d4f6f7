# attack/rules.py
"""
rules.py – field mutations applied to intercepted messages.

Scenario form (``action`` selects the rule)::

    {"action": "set",   "path": "linear.x", "value": 1.5}
    {"action": "scale", "path": "linear.x", "factor": 2.0}
    {"action": "add",   "path": "angular.z", "delta": 0.1}
    {"action": "override_stream",
     "path": "goal.trajectory.points[*].positions[2]", "start": 0.0, "step": 0.2}
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from functools import lru_cache
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from shared.errors import PathUnresolved
from wire.codec import decode_message, encode_message, split_message
from wire.kinds import MessageSchema
from wire.paths import FieldPath


@lru_cache(maxsize=256)
def _compiled(path: str) -> FieldPath:
    return FieldPath.parse(path)


class _Rule(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    path: str

    @field_validator("path")
    @classmethod
    def check_path(cls, v: str) -> str:
        try:
            _compiled(v)
        except PathUnresolved as exc:
            raise ValueError(str(exc)) from None
        return v

    @property
    def field_path(self) -> FieldPath:
        return _compiled(self.path)

    def new_value(self, old: float, index: int) -> float:
        raise NotImplementedError

    def apply(self, value: dict[str, Any], index: int = 1) -> int:
        """Rewrite every leaf the path reaches; *index* is the 1-based message count."""
        return self.field_path.update(value, lambda old: self.new_value(old, index))


def _require_finite(v: float) -> float:
    if not math.isfinite(v):
        raise ValueError("operand must be finite")
    return v


class SetRule(_Rule):
    action: Literal["set"] = "set"
    value: float

    def new_value(self, old: float, index: int) -> float:
        return self.value


class ScaleRule(_Rule):
    action: Literal["scale"] = "scale"
    factor: float

    @field_validator("factor")
    @classmethod
    def check_finite(cls, v: float) -> float:
        return _require_finite(v)

    def new_value(self, old: float, index: int) -> float:
        return old * self.factor


class AddRule(_Rule):
    action: Literal["add"] = "add"
    delta: float

    @field_validator("delta")
    @classmethod
    def check_finite(cls, v: float) -> float:
        return _require_finite(v)

    def new_value(self, old: float, index: int) -> float:
        return old + self.delta


class OverrideStream(_Rule):
    """The n-th intercepted message gets ``start + n * step``, whatever it carried."""

    action: Literal["override_stream"] = "override_stream"
    start: float = 0.0
    step: float = 0.2

    @field_validator("start", "step")
    @classmethod
    def check_finite(cls, v: float) -> float:
        return _require_finite(v)

    def new_value(self, old: float, index: int) -> float:
        return self.start + index * self.step


MutationRule = Annotated[
    Union[SetRule, ScaleRule, AddRule, OverrideStream],
    Field(discriminator="action"),
]


def check_rules(schema: MessageSchema, rules: Sequence[_Rule]) -> None:
    for rule in rules:
        rule.field_path.check(schema)


def mutate(schema: MessageSchema, body: bytes, rules: Sequence[_Rule], index: int = 1) -> bytes:
    """Decode, apply *rules* in order, re-encode.

    Bytes after the length-prefixed message (an authentication tag) are
    carried over unchanged. Raises ``PathUnresolved`` before touching anything
    if a rule does not fit *schema*, and a ``WireError`` if *body* does not decode.
    """
    message, trailer = split_message(body)
    check_rules(schema, rules)
    value = decode_message(schema, message)
    for rule in rules:
        rule.apply(value, index)
    return encode_message(schema, value) + trailer

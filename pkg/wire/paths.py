# wire/paths.py
"""
paths.py – dotted/indexed addresses of Float64 leaves inside a message tree.

``linear.x``, ``goal.trajectory.points[0].positions[2]`` and the wildcard form
``goal.trajectory.points[*].positions[2]`` are all valid. A path is checked
against the schema once (:func:`FieldPath.check`) and then applied to decoded
values many times.
"""
from __future__ import annotations

import re
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import Any, Union

from shared.errors import PathUnresolved
from wire.kinds import Kind, MessageSchema

WILDCARD = "*"

Segment = Union[str, int]           # field name, index, or WILDCARD

_PART = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:\[(?:\d+|\*)\])*)$")
_INDEX = re.compile(r"\[(\d+|\*)\]")


@dataclass(frozen=True)
class FieldPath:
    text: str
    segments: tuple[Segment, ...]

    @classmethod
    def parse(cls, text: str) -> "FieldPath":
        if not text:
            raise PathUnresolved("empty field path")
        segments: list[Segment] = []
        for part in text.split("."):
            m = _PART.match(part)
            if not m:
                raise PathUnresolved(f"{text!r}: bad segment {part!r}")
            segments.append(m.group(1))
            for idx in _INDEX.findall(m.group(2)):
                segments.append(WILDCARD if idx == WILDCARD else int(idx))
        return cls(text, tuple(segments))

    def __str__(self) -> str:
        return self.text

    def check(self, schema: MessageSchema) -> None:
        """Raise ``PathUnresolved`` unless the path ends on a Float64 leaf."""
        kind = None
        current: MessageSchema | None = schema
        for seg in self.segments:
            if isinstance(seg, str) and seg != WILDCARD:
                if current is None:
                    raise PathUnresolved(f"{self.text}: {seg!r} follows a non-record")
                kind = current.kind_of(seg)
                if kind is None:
                    raise PathUnresolved(f"{self.text}: {current.type_name} has no field {seg!r}")
            else:
                if kind is None or kind.tag is not Kind.ARRAY:
                    raise PathUnresolved(f"{self.text}: index applied to a non-array")
                kind = kind.element
            current = kind.schema if kind.tag is Kind.RECORD else None
        if kind is None or kind.tag is not Kind.FLOAT64:
            raise PathUnresolved(f"{self.text}: leaf is {kind}, not float64")

    def leaves(self, value: Any) -> Iterator[tuple[Any, Segment]]:
        """Yield ``(container, key)`` for every leaf the path reaches in *value*."""
        yield from _walk(value, self.segments, self.text)

    def get(self, value: Any) -> list[float]:
        return [container[key] for container, key in self.leaves(value)]

    def update(self, value: Any, fn: Callable[[float], float]) -> int:
        """Replace each reached leaf ``v`` by ``fn(v)`` in place; return the count."""
        n = 0
        for container, key in list(self.leaves(value)):
            container[key] = float(fn(container[key]))
            n += 1
        return n


def _walk(node: Any, segments: tuple[Segment, ...], text: str) -> Iterator[tuple[Any, Segment]]:
    seg, rest = segments[0], segments[1:]
    if seg == WILDCARD:
        if not isinstance(node, list):
            raise PathUnresolved(f"{text}: wildcard on a non-array")
        keys: list[Segment] = list(range(len(node)))
    elif isinstance(seg, int):
        if not isinstance(node, list) or seg >= len(node):
            raise PathUnresolved(f"{text}: index {seg} out of range")
        keys = [seg]
    else:
        if not isinstance(node, dict) or seg not in node:
            raise PathUnresolved(f"{text}: no field {seg!r}")
        keys = [seg]
    for key in keys:
        if rest:
            yield from _walk(node[key], rest, text)
        else:
            yield node, key

# wire/kinds.py
"""
kinds.py – the type vocabulary of the TCPROS-style wire format.

A ``MessageSchema`` is an ordered list of ``(name, FieldKind)`` pairs. Values
are plain Python objects:

=============  ==============================================
kind           Python value
=============  ==============================================
FLOAT64        ``float``
INT32/UINT32   ``int``
STR            ``bytes`` (raw, never decoded)
DURATION       ``Duration(secs, nsecs)``
TIME           ``Time(secs, nsecs)``
ARRAY          ``list`` of element values
RECORD         ``dict`` keyed by field name, in schema order
=============  ==============================================
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional


class Kind(enum.Enum):
    FLOAT64 = "float64"
    INT32 = "int32"
    UINT32 = "uint32"
    STR = "string"
    DURATION = "duration"
    TIME = "time"
    ARRAY = "array"
    RECORD = "record"


class Duration(NamedTuple):
    secs: int = 0
    nsecs: int = 0

    def to_ns(self) -> int:
        return self.secs * 1_000_000_000 + self.nsecs

    @classmethod
    def from_ns(cls, ns: int) -> "Duration":
        secs, nsecs = divmod(int(ns), 1_000_000_000)
        return cls(secs, nsecs)


class Time(NamedTuple):
    secs: int = 0
    nsecs: int = 0

    def to_ns(self) -> int:
        return self.secs * 1_000_000_000 + self.nsecs

    @classmethod
    def from_ns(cls, ns: int) -> "Time":
        secs, nsecs = divmod(int(ns), 1_000_000_000)
        return cls(secs, nsecs)


@dataclass(frozen=True)
class FieldKind:
    tag: Kind
    element: Optional["FieldKind"] = None        # ARRAY only
    schema: Optional["MessageSchema"] = None     # RECORD only

    def __str__(self) -> str:
        if self.tag is Kind.ARRAY:
            return f"{self.element}[]"
        if self.tag is Kind.RECORD:
            return self.schema.type_name
        return self.tag.value

    @property
    def min_size(self) -> int:
        """Smallest number of body bytes any value of this kind occupies."""
        if self.tag is Kind.FLOAT64 or self.tag in (Kind.DURATION, Kind.TIME):
            return 8
        if self.tag is Kind.RECORD:
            return sum(k.min_size for _, k in self.schema.fields)
        return 4


@dataclass(frozen=True)
class MessageSchema:
    type_name: str
    md5sum: str
    fields: tuple[tuple[str, FieldKind], ...] = field(default_factory=tuple)

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.fields)

    def kind_of(self, name: str) -> Optional[FieldKind]:
        for fname, kind in self.fields:
            if fname == name:
                return kind
        return None


FLOAT64 = FieldKind(Kind.FLOAT64)
INT32 = FieldKind(Kind.INT32)
UINT32 = FieldKind(Kind.UINT32)
STR = FieldKind(Kind.STR)
DURATION = FieldKind(Kind.DURATION)
TIME = FieldKind(Kind.TIME)


def array_of(element: FieldKind) -> FieldKind:
    return FieldKind(Kind.ARRAY, element=element)


def record_of(schema: MessageSchema) -> FieldKind:
    return FieldKind(Kind.RECORD, schema=schema)


def zero_value(kind: FieldKind) -> Any:
    """The all-zero value of *kind* (empty arrays, empty strings)."""
    if kind.tag is Kind.FLOAT64:
        return 0.0
    if kind.tag in (Kind.INT32, Kind.UINT32):
        return 0
    if kind.tag is Kind.STR:
        return b""
    if kind.tag is Kind.DURATION:
        return Duration(0, 0)
    if kind.tag is Kind.TIME:
        return Time(0, 0)
    if kind.tag is Kind.ARRAY:
        return []
    return zero_record(kind.schema)


def zero_record(schema: MessageSchema) -> dict[str, Any]:
    return {name: zero_value(kind) for name, kind in schema.fields}

# wire/codec.py
"""
codec.py – bit-exact message (de)serialization.

Layout (all integers little-endian):

    uint32 body_length | body

inside the body, fields in schema order:

* float64           8 bytes IEEE-754
* int32 / uint32    4 bytes
* string            uint32 length + raw bytes
* duration / time   two 4-byte integers (secs, nsecs)
* T[]               uint32 count + elements
* record            its fields, no framing

Decoding is total: any byte string either yields a value or raises one of
``Truncated``, ``TrailingBytes``, ``BadLength``.
"""
from __future__ import annotations

import math
import struct
from collections.abc import Mapping, Sequence
from typing import Any

from shared.errors import BadLength, SchemaMismatch, TrailingBytes, Truncated
from wire.kinds import Duration, FieldKind, Kind, MessageSchema, Time

_U32 = struct.Struct("<I")
_I32 = struct.Struct("<i")
_F64 = struct.Struct("<d")
_DURATION = struct.Struct("<ii")
_TIME = struct.Struct("<II")

_INT32_RANGE = range(-(2**31), 2**31)
_UINT32_RANGE = range(0, 2**32)

# ──────────────────────────────────────────────
# Encoding
# ──────────────────────────────────────────────


def encode_message(schema: MessageSchema, value: Mapping[str, Any]) -> bytes:
    """Return ``length-prefix ++ body`` for *value* under *schema*."""
    body = bytearray()
    _encode_record(schema, value, body, schema.type_name)
    return _U32.pack(len(body)) + bytes(body)


def _encode_record(schema: MessageSchema, value: Any, out: bytearray, where: str) -> None:
    if not isinstance(value, Mapping):
        raise SchemaMismatch(f"{where}: expected {schema.type_name} record, got {type(value).__name__}")
    if tuple(value.keys()) != schema.field_names:
        raise SchemaMismatch(
            f"{where}: fields {list(value.keys())} != {list(schema.field_names)}"
        )
    for name, kind in schema.fields:
        _encode_field(kind, value[name], out, f"{where}.{name}")


def _encode_field(kind: FieldKind, value: Any, out: bytearray, where: str) -> None:
    tag = kind.tag
    if tag is Kind.FLOAT64:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaMismatch(f"{where}: expected float64, got {type(value).__name__}")
        out += _F64.pack(value)
    elif tag is Kind.INT32 or tag is Kind.UINT32:
        valid = _INT32_RANGE if tag is Kind.INT32 else _UINT32_RANGE
        if isinstance(value, bool) or not isinstance(value, int) or value not in valid:
            raise SchemaMismatch(f"{where}: {value!r} is not a {tag.value}")
        out += (_I32 if tag is Kind.INT32 else _U32).pack(value)
    elif tag is Kind.STR:
        if not isinstance(value, (bytes, bytearray)):
            raise SchemaMismatch(f"{where}: expected bytes, got {type(value).__name__}")
        out += _U32.pack(len(value))
        out += value
    elif tag is Kind.DURATION or tag is Kind.TIME:
        _encode_stamp(tag, value, out, where)
    elif tag is Kind.ARRAY:
        if isinstance(value, (str, bytes, bytearray)) or not isinstance(value, Sequence):
            raise SchemaMismatch(f"{where}: expected {kind}, got {type(value).__name__}")
        out += _U32.pack(len(value))
        element = kind.element
        if element.tag is Kind.FLOAT64:
            for i, item in enumerate(value):
                if isinstance(item, bool) or not isinstance(item, (int, float)):
                    raise SchemaMismatch(f"{where}[{i}]: expected float64")
            out += struct.pack(f"<{len(value)}d", *value)
        else:
            for i, item in enumerate(value):
                _encode_field(element, item, out, f"{where}[{i}]")
    else:
        _encode_record(kind.schema, value, out, where)


def _encode_stamp(tag: Kind, value: Any, out: bytearray, where: str) -> None:
    if not isinstance(value, tuple) or len(value) != 2:
        raise SchemaMismatch(f"{where}: expected ({tag.value} secs, nsecs)")
    secs, nsecs = value
    valid = _INT32_RANGE if tag is Kind.DURATION else _UINT32_RANGE
    for part in (secs, nsecs):
        if isinstance(part, bool) or not isinstance(part, int) or part not in valid:
            raise SchemaMismatch(f"{where}: {value!r} is not a {tag.value}")
    out += (_DURATION if tag is Kind.DURATION else _TIME).pack(secs, nsecs)

# ──────────────────────────────────────────────
# Decoding
# ──────────────────────────────────────────────


class _Reader:
    __slots__ = ("buf", "pos", "end")

    def __init__(self, buf: bytes, start: int, end: int):
        self.buf = buf
        self.pos = start
        self.end = end

    @property
    def remaining(self) -> int:
        return self.end - self.pos

    def take(self, n: int) -> int:
        """Reserve *n* bytes and return their start offset."""
        if n > self.remaining:
            raise Truncated(f"need {n} bytes at offset {self.pos}, {self.remaining} left")
        start = self.pos
        self.pos += n
        return start

    def count(self, min_size: int, what: str) -> int:
        n = _U32.unpack_from(self.buf, self.take(4))[0]
        if n * max(min_size, 1) > self.remaining:
            raise BadLength(f"{what}: length {n} exceeds the {self.remaining} bytes left")
        return n


def read_length_prefix(buf: bytes) -> int:
    if len(buf) < 4:
        raise Truncated(f"length prefix needs 4 bytes, got {len(buf)}")
    return _U32.unpack_from(buf, 0)[0]


def split_message(buf: bytes) -> tuple[bytes, bytes]:
    """Split *buf* into ``(prefix ++ body, trailer)`` using the length prefix."""
    declared = read_length_prefix(buf)
    if len(buf) - 4 < declared:
        raise Truncated(f"prefix declares {declared} bytes, {len(buf) - 4} follow")
    return bytes(buf[: 4 + declared]), bytes(buf[4 + declared:])


def decode_message(schema: MessageSchema, buf: bytes) -> dict[str, Any]:
    """Inverse of :func:`encode_message`."""
    buf = bytes(buf)
    declared = read_length_prefix(buf)
    available = len(buf) - 4
    if available < declared:
        raise Truncated(f"prefix declares {declared} bytes, {available} follow")
    if available > declared:
        raise TrailingBytes(f"{available - declared} bytes after the declared body")
    reader = _Reader(buf, 4, 4 + declared)
    value = _decode_record(schema, reader)
    if reader.remaining:
        raise TrailingBytes(f"{schema.type_name} consumed {declared - reader.remaining} of {declared} bytes")
    return value


def _decode_record(schema: MessageSchema, reader: _Reader) -> dict[str, Any]:
    return {name: _decode_field(kind, reader, name) for name, kind in schema.fields}


def _decode_field(kind: FieldKind, reader: _Reader, where: str) -> Any:
    tag = kind.tag
    buf = reader.buf
    if tag is Kind.FLOAT64:
        return _F64.unpack_from(buf, reader.take(8))[0]
    if tag is Kind.INT32:
        return _I32.unpack_from(buf, reader.take(4))[0]
    if tag is Kind.UINT32:
        return _U32.unpack_from(buf, reader.take(4))[0]
    if tag is Kind.STR:
        n = reader.count(1, where)
        start = reader.take(n)
        return buf[start:start + n]
    if tag is Kind.DURATION:
        return Duration(*_DURATION.unpack_from(buf, reader.take(8)))
    if tag is Kind.TIME:
        return Time(*_TIME.unpack_from(buf, reader.take(8)))
    if tag is Kind.ARRAY:
        element = kind.element
        n = reader.count(element.min_size, where)
        if element.tag is Kind.FLOAT64:
            return list(struct.unpack_from(f"<{n}d", buf, reader.take(8 * n)))
        return [_decode_field(element, reader, where) for _ in range(n)]
    return _decode_record(kind.schema, reader)


def is_finite_tree(value: Any) -> bool:
    """True when every float inside *value* is finite."""
    if isinstance(value, float):
        return math.isfinite(value)
    if isinstance(value, Mapping):
        return all(is_finite_tree(v) for v in value.values())
    if isinstance(value, list):
        return all(is_finite_tree(v) for v in value)
    return True

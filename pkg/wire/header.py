# wire/header.py
"""
header.py – TCPROS connection headers.

    uint32 total_length | (uint32 entry_length | b"key=value")*

The subscriber opens every connection with ``callerid``, ``topic``, ``type``
and ``md5sum``; the publisher answers with its own header, or with a single
``error`` entry when it refuses the connection.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

from shared.errors import BadLength, MalformedEntry

_U32 = struct.Struct("<I")

SUBSCRIBER_KEYS = ("callerid", "topic", "type", "md5sum")


@dataclass(frozen=True)
class ConnectionHeader:
    entries: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    @classmethod
    def of(cls, **values: str) -> "ConnectionHeader":
        return cls(tuple(values.items()))

    def get(self, key: str) -> Optional[str]:
        for k, v in self.entries:
            if k == key:
                return v
        return None

    def missing(self, keys: tuple[str, ...] = SUBSCRIBER_KEYS) -> list[str]:
        present = {k for k, _ in self.entries}
        return [k for k in keys if k not in present]


def _check_entry(key: str, value: str) -> None:
    if "=" in key:
        raise MalformedEntry(f"header key {key!r} contains '='")
    if key == "topic" and not value.startswith("/"):
        raise MalformedEntry(f"topic {value!r} must begin with '/'")


def encode_header(h: ConnectionHeader) -> bytes:
    body = bytearray()
    for key, value in h.entries:
        _check_entry(key, value)
        entry = f"{key}={value}".encode("utf-8")
        body += _U32.pack(len(entry))
        body += entry
    return _U32.pack(len(body)) + bytes(body)


def decode_header(buf: bytes) -> ConnectionHeader:
    buf = bytes(buf)
    if len(buf) < 4:
        raise BadLength(f"header length prefix needs 4 bytes, got {len(buf)}")
    total = _U32.unpack_from(buf, 0)[0]
    if total != len(buf) - 4:
        raise BadLength(f"header declares {total} bytes, {len(buf) - 4} follow")

    entries: list[tuple[str, str]] = []
    pos, end = 4, len(buf)
    while pos < end:
        if end - pos < 4:
            raise BadLength(f"entry length at offset {pos} is cut short")
        n = _U32.unpack_from(buf, pos)[0]
        pos += 4
        if n > end - pos:
            raise BadLength(f"entry of {n} bytes exceeds the {end - pos} left")
        raw = buf[pos:pos + n]
        pos += n
        key, sep, value = raw.partition(b"=")
        if not sep:
            raise MalformedEntry(f"entry {raw!r} has no '='")
        try:
            pair = (key.decode("utf-8"), value.decode("utf-8"))
        except UnicodeDecodeError:
            raise MalformedEntry(f"entry {raw!r} is not UTF-8") from None
        _check_entry(*pair)
        entries.append(pair)
    return ConnectionHeader(tuple(entries))

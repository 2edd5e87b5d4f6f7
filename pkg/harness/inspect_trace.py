# harness/inspect_trace.py
"""
inspect_trace.py – human-readable dump of a ``trace.jsonl`` file.

Stream payloads are decoded when possible: connection headers as key=value
lists, messages with the schema their connection's header announced. A tag
trailer after a message is shown in hex.
"""
from __future__ import annotations

import json
from collections.abc import Iterator
from pathlib import Path
from typing import Any, Optional, TextIO

from shared.errors import ParseError, WireError
from wire.codec import decode_message, split_message
from wire.header import decode_header
from wire.kinds import MessageSchema
from wire.schemas import builtin_schemas
from wire.text import render_tree


def iter_records(path: Path) -> Iterator[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc.msg}", line=lineno, column=exc.colno) from None


class PayloadDecoder:
    """Remembers which schema each connection carries."""

    def __init__(self) -> None:
        self.schemas = builtin_schemas()
        self._by_conn: dict[tuple, MessageSchema] = {}

    @staticmethod
    def _key(rec: dict[str, Any]) -> tuple:
        a = (rec["src_ip"], rec["src_port"])
        b = (rec["dst_ip"], rec["dst_port"])
        return (a, b) if a <= b else (b, a)

    def describe(self, rec: dict[str, Any]) -> list[str]:
        payload = bytes.fromhex(rec["payload"])
        key = self._key(rec)
        schema = self._by_conn.get(key)
        if schema is not None:
            try:
                message, trailer = split_message(payload)
                value = decode_message(schema, message)
            except WireError:
                pass
            else:
                lines = [f"{schema.type_name}"]
                lines += render_tree(schema, value, indent=1).splitlines()
                if trailer:
                    lines.append(f"  tag: {trailer.hex()}")
                return lines
        try:
            header = decode_header(payload)
        except WireError:
            return [f"<{len(payload)} undecoded bytes>"]
        bound = self.schemas.lookup(header.get("type") or "")
        if bound is not None and key not in self._by_conn:
            self._by_conn[key] = bound
        return ["header " + " ".join(f"{k}={v}" for k, v in header.entries)]


def format_record(rec: dict[str, Any], decoder: Optional[PayloadDecoder] = None) -> list[str]:
    t = rec["t"] / 1e9
    where = f"→ {rec['to']}" if "to" in rec else f"({rec.get('reason', '')})"
    head = (
        f"[{t:12.9f}] {rec['event']:<7} #{rec['id']:<5} {rec['kind']:<9} "
        f"{rec['src_ip']}:{rec['src_port']} > {rec['dst_ip']}:{rec['dst_port']} "
        f"{rec['src_mac']} > {rec['dst_mac']} {where}"
    )
    if rec.get("parent") is not None:
        head += f" parent=#{rec['parent']}"
    if "pitm" in rec:
        head += f" pitm={rec['pitm']['class']}/{rec['pitm']['action']}"
    lines = [head]
    if rec["kind"] == "Stream" and decoder is not None and rec["event"] == "deliver":
        lines += ["    " + ln for ln in decoder.describe(rec)]
    return lines


def inspect_trace(path: Path, out: TextIO) -> int:
    """Print every record of *path*; return how many there were."""
    decoder = PayloadDecoder()
    n = 0
    for rec in iter_records(path):
        for line in format_record(rec, decoder):
            print(line, file=out)
        n += 1
    return n

# wire/text.py
"""
text.py – JSON-friendly views of message values and the indented field tree
printed by ``codec`` and ``inspect``.
"""
from __future__ import annotations

from collections.abc import Mapping
from typing import Any

from shared.errors import SchemaMismatch
from wire.kinds import Duration, FieldKind, Kind, MessageSchema, Time, zero_value


def to_jsonable(schema: MessageSchema, value: Mapping[str, Any]) -> dict[str, Any]:
    return {name: _to_json(kind, value[name]) for name, kind in schema.fields}


def _to_json(kind: FieldKind, value: Any) -> Any:
    tag = kind.tag
    if tag is Kind.STR:
        return bytes(value).decode("utf-8", errors="backslashreplace")
    if tag in (Kind.DURATION, Kind.TIME):
        return {"secs": value[0], "nsecs": value[1]}
    if tag is Kind.ARRAY:
        return [_to_json(kind.element, v) for v in value]
    if tag is Kind.RECORD:
        return to_jsonable(kind.schema, value)
    return value


def from_jsonable(schema: MessageSchema, obj: Any, where: str = "") -> dict[str, Any]:
    """Build a record from a JSON object; omitted fields take their zero value."""
    where = where or schema.type_name
    if not isinstance(obj, Mapping):
        raise SchemaMismatch(f"{where}: expected an object for {schema.type_name}")
    unknown = set(obj) - set(schema.field_names)
    if unknown:
        raise SchemaMismatch(f"{where}: unknown fields {sorted(unknown)}")
    return {
        name: _from_json(kind, obj[name], f"{where}.{name}") if name in obj else zero_value(kind)
        for name, kind in schema.fields
    }


def _from_json(kind: FieldKind, obj: Any, where: str) -> Any:
    tag = kind.tag
    if tag is Kind.FLOAT64:
        if isinstance(obj, bool) or not isinstance(obj, (int, float)):
            raise SchemaMismatch(f"{where}: expected a number")
        return float(obj)
    if tag in (Kind.INT32, Kind.UINT32):
        if isinstance(obj, bool) or not isinstance(obj, int):
            raise SchemaMismatch(f"{where}: expected an integer")
        return obj
    if tag is Kind.STR:
        if not isinstance(obj, str):
            raise SchemaMismatch(f"{where}: expected a string")
        return obj.encode("utf-8")
    if tag in (Kind.DURATION, Kind.TIME):
        stamp = Duration if tag is Kind.DURATION else Time
        if isinstance(obj, Mapping):
            return stamp(int(obj.get("secs", 0)), int(obj.get("nsecs", 0)))
        if isinstance(obj, (int, float)) and not isinstance(obj, bool):
            return stamp.from_ns(round(obj * 1e9))
        raise SchemaMismatch(f"{where}: expected {{secs, nsecs}} or seconds")
    if tag is Kind.ARRAY:
        if not isinstance(obj, list):
            raise SchemaMismatch(f"{where}: expected a list")
        return [_from_json(kind.element, v, f"{where}[{i}]") for i, v in enumerate(obj)]
    return from_jsonable(kind.schema, obj, where)


def render_tree(schema: MessageSchema, value: Mapping[str, Any], indent: int = 0) -> str:
    """Indented ``type name: value`` listing, one field per line."""
    lines: list[str] = []
    _render_record(schema, value, indent, lines)
    return "\n".join(lines)


def _render_record(schema: MessageSchema, value: Mapping[str, Any], indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    for name, kind in schema.fields:
        v = value[name]
        if kind.tag is Kind.RECORD:
            lines.append(f"{pad}{kind} {name}")
            _render_record(kind.schema, v, indent + 1, lines)
        elif kind.tag is Kind.ARRAY and kind.element.tag is Kind.RECORD:
            lines.append(f"{pad}{kind} {name}  ({len(v)} items)")
            for i, item in enumerate(v):
                lines.append(f"{pad}  [{i}]")
                _render_record(kind.element.schema, item, indent + 2, lines)
        else:
            lines.append(f"{pad}{kind} {name}: {_to_json(kind, v)}")

# netsim/trace.py
"""
trace.py – JSONL frame trace.

One line per frame event, in simulated-time order:

    {"t": …, "event": "deliver"|"drop", "to": host, "reason": …, <frame fields>, "pitm": {…}}

Lines are serialized with fixed key order and compact separators, so the same
scenario and seed always produce the same bytes.
"""
from __future__ import annotations

import json
from collections.abc import Iterator
from pathlib import Path
from typing import Any, Optional

from netsim.frames import Frame


class FrameTrace:
    def __init__(self) -> None:
        self.records: list[dict[str, Any]] = []
        self._annotations: dict[int, dict[str, Any]] = {}

    def annotate(self, frame_id: int, note: dict[str, Any]) -> None:
        self._annotations[frame_id] = note

    def record(
        self,
        t: int,
        event: str,
        frame: Frame,
        *,
        to: Optional[str] = None,
        reason: Optional[str] = None,
    ) -> None:
        line: dict[str, Any] = {"t": t, "event": event}
        if to is not None:
            line["to"] = to
        if reason is not None:
            line["reason"] = reason
        line.update(frame.to_json())
        note = self._annotations.get(frame.id)
        if note is not None:
            line["pitm"] = note
        self.records.append(line)

    def __iter__(self) -> Iterator[dict[str, Any]]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def dumps(self) -> str:
        return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in self.records)

    def write_jsonl(self, path: Path) -> Path:
        path.write_text(self.dumps(), encoding="utf-8")
        return path


def read_jsonl(path: Path) -> list[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]

# guard/verdict.py
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Optional


class RejectReason(str, enum.Enum):
    TOO_SHORT = "TooShort"
    BAD_TAG = "BadTag"
    ABSOLUTE_BOUND = "AbsoluteBound"
    STEP_CHANGE = "StepChange"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    body: Optional[bytes] = None
    reason: Optional[RejectReason] = None
    detail: Optional[Any] = None

    @classmethod
    def accept(cls, body: Optional[bytes] = None) -> "Verdict":
        return cls(True, body=body)

    @classmethod
    def reject(cls, reason: RejectReason, detail: Any = None) -> "Verdict":
        return cls(False, reason=reason, detail=detail)

# shared/errors.py
"""
errors.py – one exception hierarchy for every twinsec package.

Each package raises its own branch so callers can catch at the granularity
they care about (``WireError`` in the attacker's fail-open filter,
``ScenarioError`` in the CLI exit-code mapping, …).
"""
from __future__ import annotations

from typing import Optional


class TwinsecError(Exception):
    """Root of every domain error raised by this project."""


# ──────────────────────────────────────────────
# wire
# ──────────────────────────────────────────────
class WireError(TwinsecError):
    pass


class SchemaMismatch(WireError):
    """A value does not have the shape its schema demands."""


class Truncated(WireError):
    """The buffer ends before the declared or required length."""


class TrailingBytes(WireError):
    """Bytes remain after the schema has been fully consumed."""


class BadLength(WireError):
    """An embedded length/count points past the end of the buffer."""


class MalformedEntry(WireError):
    """A connection-header entry is not ``key=value``."""


class UnknownSchema(WireError):
    pass


# ──────────────────────────────────────────────
# netsim
# ──────────────────────────────────────────────
class NetsimError(TwinsecError):
    pass


class ResolveTimeout(NetsimError):
    pass


class UnknownHost(NetsimError):
    pass


class AddressConflict(NetsimError):
    pass


# ──────────────────────────────────────────────
# pubsub
# ──────────────────────────────────────────────
class PubSubError(TwinsecError):
    pass


class DuplicateTopic(PubSubError):
    pass


class UnknownTopic(PubSubError):
    pass


class TypeMismatch(PubSubError):
    pass


class NotEstablished(PubSubError):
    pass


# ──────────────────────────────────────────────
# attack
# ──────────────────────────────────────────────
class AttackError(TwinsecError):
    pass


class VictimNotFound(AttackError):
    pass


class PathUnresolved(AttackError):
    """A field path does not lead to a Float64 leaf of the schema."""


class InvalidPlan(AttackError):
    pass


# ──────────────────────────────────────────────
# plant
# ──────────────────────────────────────────────
class PlantError(TwinsecError):
    pass


class NonFiniteCommand(PlantError):
    pass


class EmptyTrajectory(PlantError):
    pass


class MalformedTrajectory(PlantError):
    pass


class GridMismatch(PlantError):
    pass


# ──────────────────────────────────────────────
# harness
# ──────────────────────────────────────────────
class ScenarioError(TwinsecError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message: str, *, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ScenarioValidationError(ScenarioError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SimulationError(TwinsecError):
    """A module error surfaced while the event loop was running."""

    def __init__(self, message: str, *, sim_time_ns: Optional[int] = None):
        if sim_time_ns is not None:
            message = f"{message} [t={sim_time_ns / 1e9:.9f}s]"
        super().__init__(message)
        self.sim_time_ns = sim_time_ns


class OutputError(TwinsecError):
    pass

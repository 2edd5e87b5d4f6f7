# attack/flows.py
"""
flows.py – what the relay knows about each diverted connection.

A connection is identified by its unordered pair of transport endpoints. The
first unit seen in each direction is expected to be a connection header; a
successful parse tags the connection with its topic and binds the message
schema named by the header's ``type``. Connections joined mid-stream are never
tagged and stay Passthrough.

Only TCP-like streams exist on the simulated LAN, so the filter has no UDP
branch.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from netsim.frames import Frame, FrameKind
from shared.errors import WireError
from wire.header import ConnectionHeader, decode_header
from wire.kinds import MessageSchema
from wire.schemas import SchemaRegistry, builtin_schemas

Endpoint = tuple[int, int]
ConnKey = tuple[Endpoint, Endpoint]


class FrameClass(str, enum.Enum):
    HEADER = "HeaderFrame"
    TARGET = "TargetMessage"
    PASSTHROUGH = "Passthrough"


@dataclass
class Counters:
    seen: int = 0
    matched: int = 0
    mutated: int = 0
    forwarded: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"seen": self.seen, "matched": self.matched,
                "mutated": self.mutated, "forwarded": self.forwarded}


@dataclass
class FlowState:
    header: Optional[ConnectionHeader] = None
    topic: Optional[str] = None
    schema: Optional[MessageSchema] = None
    opened: set[tuple[int, int, int, int]] = field(default_factory=set)
    counters: Counters = field(default_factory=Counters)


def conn_key(frame: Frame) -> ConnKey:
    a: Endpoint = (frame.src_ip, frame.src_port)
    b: Endpoint = (frame.dst_ip, frame.dst_port)
    return (a, b) if a <= b else (b, a)


class InterceptState:
    """Per-connection tags plus run-wide counters for one attack plan."""

    def __init__(self, victim_a_ip: int, victim_b_ip: int, target_topic: str,
                 schemas: Optional[SchemaRegistry] = None):
        self.victim_a_ip = victim_a_ip
        self.victim_b_ip = victim_b_ip
        self.target_topic = target_topic
        self.schemas = schemas or builtin_schemas()
        self.flows: dict[ConnKey, FlowState] = {}
        self.totals = Counters()

    def flow_of(self, frame: Frame) -> FlowState:
        return self.flows.setdefault(conn_key(frame), FlowState())

    def _between_victims(self, frame: Frame) -> bool:
        return {frame.src_ip, frame.dst_ip} == {self.victim_a_ip, self.victim_b_ip}

    def classify(self, frame: Frame) -> FrameClass:
        if frame.kind is not FrameKind.STREAM or not self._between_victims(frame):
            return FrameClass.PASSTHROUGH
        flow = self.flow_of(frame)
        if frame.flow not in flow.opened:
            flow.opened.add(frame.flow)
            try:
                header = decode_header(frame.payload)
            except WireError:
                return FrameClass.PASSTHROUGH
            self._tag(flow, header)
            return FrameClass.HEADER
        if (
            flow.topic == self.target_topic
            and flow.schema is not None
            and frame.src_ip == self.victim_a_ip
        ):
            return FrameClass.TARGET
        return FrameClass.PASSTHROUGH

    def _tag(self, flow: FlowState, header: ConnectionHeader) -> None:
        if flow.header is None:
            flow.header = header
        topic = header.get("topic")
        if flow.topic is None and topic is not None:
            flow.topic = topic
        type_name = header.get("type")
        if flow.schema is None and type_name is not None:
            flow.schema = self.schemas.lookup(type_name)

    def summary(self) -> dict[str, int]:
        return self.totals.as_dict()


def classify_frame(state: InterceptState, frame: Frame) -> FrameClass:
    return state.classify(frame)

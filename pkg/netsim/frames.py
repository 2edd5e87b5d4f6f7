# netsim/frames.py
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Optional

from netsim.addresses import ip_str, mac_str


class FrameKind(str, enum.Enum):
    ARP_REQUEST = "ArpRequest"
    ARP_REPLY = "ArpReply"
    STREAM = "Stream"


@dataclass(frozen=True)
class Frame:
    """One link-layer unit. Stream frames carry exactly one pub/sub unit."""

    id: int
    kind: FrameKind
    src_mac: int
    dst_mac: int
    src_ip: int
    dst_ip: int
    src_port: int
    dst_port: int
    payload: bytes
    timestamp: int
    parent: Optional[int] = None    # set on frames re-emitted by a relay

    @property
    def flow(self) -> tuple[int, int, int, int]:
        """Directed transport 4-tuple."""
        return (self.src_ip, self.src_port, self.dst_ip, self.dst_port)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "parent": self.parent,
            "kind": self.kind.value,
            "sent": self.timestamp,
            "src_mac": mac_str(self.src_mac),
            "dst_mac": mac_str(self.dst_mac),
            "src_ip": ip_str(self.src_ip),
            "dst_ip": ip_str(self.dst_ip),
            "src_port": self.src_port,
            "dst_port": self.dst_port,
            "payload": self.payload.hex(),
        }

# netsim/addresses.py
from __future__ import annotations

import ipaddress
import struct
from dataclasses import dataclass
from typing import NamedTuple

BROADCAST_MAC = 0xFFFF_FFFF_FFFF

ARP_REQUEST_OP = 1
ARP_REPLY_OP = 2

# htype, ptype, hlen, plen, op, sha, spa, tha, tpa – the 28-byte Ethernet/IPv4 ARP body
_ARP = struct.Struct("!HHBBH6s4s6s4s")


def parse_ip(text: str) -> int:
    return int(ipaddress.IPv4Address(text))


def ip_str(ip: int) -> str:
    return str(ipaddress.IPv4Address(ip))


def parse_mac(text: str) -> int:
    parts = text.replace("-", ":").split(":")
    if len(parts) != 6 or not all(len(p) == 2 for p in parts):
        raise ValueError(f"invalid MAC address {text!r}")
    return int("".join(parts), 16)


def mac_str(mac: int) -> str:
    raw = mac.to_bytes(6, "big")
    return ":".join(f"{b:02x}" for b in raw)


@dataclass(frozen=True)
class HostId:
    name: str
    ip: int
    mac: int

    def __str__(self) -> str:
        return f"{self.name}({ip_str(self.ip)} at {mac_str(self.mac)})"


class ArpPacket(NamedTuple):
    op: int
    sha: int
    spa: int
    tha: int
    tpa: int


def pack_arp(op: int, sha: int, spa: int, tha: int, tpa: int) -> bytes:
    return _ARP.pack(
        1, 0x0800, 6, 4, op,
        sha.to_bytes(6, "big"), spa.to_bytes(4, "big"),
        tha.to_bytes(6, "big"), tpa.to_bytes(4, "big"),
    )


def unpack_arp(payload: bytes) -> ArpPacket:
    _, _, _, _, op, sha, spa, tha, tpa = _ARP.unpack(payload)
    return ArpPacket(
        op,
        int.from_bytes(sha, "big"), int.from_bytes(spa, "big"),
        int.from_bytes(tha, "big"), int.from_bytes(tpa, "big"),
    )

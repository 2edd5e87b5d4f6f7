# netsim/lan.py
"""
lan.py – one switched subnet with gullible ARP.

* The switch forwards by destination MAC only, after ``latency`` ns; this is
  what makes a poisoned ARP cache divert traffic.
* Every host answers ARP requests for its own IP and believes every ARP reply
  it receives, solicited or not. Caches never expire.
* Stream frames addressed to another IP are dropped (and counted) unless the
  host has a ``promiscuous`` handler installed, which is how a relay sees them.
"""
from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass
from typing import Optional

from shared.errors import AddressConflict, ResolveTimeout, UnknownHost
from shared.logger_utils import log_event
from netsim.addresses import (
    ARP_REPLY_OP,
    ARP_REQUEST_OP,
    BROADCAST_MAC,
    ArpPacket,
    HostId,
    ip_str,
    mac_str,
    pack_arp,
    unpack_arp,
)
from netsim.events import NS_PER_MS, Scheduler, SimFuture
from netsim.frames import Frame, FrameKind
from netsim.trace import FrameTrace

log = logging.getLogger("twinsec.netsim")

StreamHandler = Callable[[Frame], None]


@dataclass(frozen=True)
class LanConfig:
    latency_ns: int = 1 * NS_PER_MS
    arp_timeout_ns: int = 100 * NS_PER_MS


class Lan:
    def __init__(
        self,
        scheduler: Optional[Scheduler] = None,
        config: LanConfig = LanConfig(),
        trace: Optional[FrameTrace] = None,
    ):
        self.sim = scheduler or Scheduler()
        self.config = config
        self.trace = trace if trace is not None else FrameTrace()
        self.hosts: dict[str, Host] = {}
        self._mac_table: dict[int, Host] = {}      # switch port table
        self._by_ip: dict[int, Host] = {}
        self._next_frame_id = 0
        self.drops: Counter[str] = Counter()
        self.delivered = 0

    # ───── topology
    def add_host(self, name: str, ip: int, mac: int) -> "Host":
        if name in self.hosts:
            raise AddressConflict(f"host name {name!r} already used")
        if ip in self._by_ip:
            raise AddressConflict(f"{ip_str(ip)} already assigned to {self._by_ip[ip].name}")
        if mac in self._mac_table or mac == BROADCAST_MAC:
            raise AddressConflict(f"MAC {mac_str(mac)} unavailable")
        host = Host(self, HostId(name, ip, mac))
        self.hosts[name] = host
        self._mac_table[mac] = host
        self._by_ip[ip] = host
        return host

    def host(self, name: str) -> "Host":
        try:
            return self.hosts[name]
        except KeyError:
            raise UnknownHost(name) from None

    def host_at(self, ip: int) -> Optional["Host"]:
        return self._by_ip.get(ip)

    def subnet_ips(self) -> list[int]:
        return sorted(self._by_ip)

    @property
    def dropped(self) -> int:
        return sum(self.drops.values())

    # ───── frames
    def new_frame(
        self,
        kind: FrameKind,
        *,
        src_mac: int,
        dst_mac: int,
        src_ip: int,
        dst_ip: int,
        src_port: int = 0,
        dst_port: int = 0,
        payload: bytes = b"",
        parent: Optional[int] = None,
    ) -> Frame:
        frame = Frame(
            id=self._next_frame_id,
            kind=kind,
            src_mac=src_mac,
            dst_mac=dst_mac,
            src_ip=src_ip,
            dst_ip=dst_ip,
            src_port=src_port,
            dst_port=dst_port,
            payload=bytes(payload),
            timestamp=self.sim.now,
            parent=parent,
        )
        self._next_frame_id += 1
        return frame

    def switch_deliver(self, frame: Frame) -> None:
        """Queue *frame* for the port owning ``dst_mac`` (all others if broadcast)."""
        delay = self.config.latency_ns
        if frame.dst_mac == BROADCAST_MAC:
            sender = self._mac_table.get(frame.src_mac)
            for host in self.hosts.values():
                if host is not sender:
                    self.sim.call_later(delay, self._arrive, host, frame)
            return
        host = self._mac_table.get(frame.dst_mac)
        if host is None:
            self.drop(frame, "unknown_mac")
            return
        self.sim.call_later(delay, self._arrive, host, frame)

    def drop(self, frame: Frame, reason: str) -> None:
        self.drops[reason] += 1
        self.trace.record(self.sim.now, "drop", frame, reason=reason)
        log_event(log, "frame_drop", t_ns=self.sim.now, level=logging.DEBUG,
                  frame=frame.id, reason=reason)

    def _arrive(self, host: "Host", frame: Frame) -> None:
        self.delivered += 1
        self.trace.record(self.sim.now, "deliver", frame, to=host.name)
        host.receive(frame)


class Host:
    def __init__(self, lan: Lan, ident: HostId):
        self.lan = lan
        self.id = ident
        self.arp_cache: dict[int, int] = {}
        self.promiscuous: Optional[StreamHandler] = None
        self.arp_listeners: list[Callable[[ArpPacket], None]] = []
        self._pending: dict[int, SimFuture[int]] = {}
        self._ports: dict[int, StreamHandler] = {}
        self._next_port = 40000

    @property
    def name(self) -> str:
        return self.id.name

    @property
    def ip(self) -> int:
        return self.id.ip

    @property
    def mac(self) -> int:
        return self.id.mac

    def __repr__(self) -> str:
        return f"Host({self.id})"

    # ───── ports
    def bind(self, port: int, handler: StreamHandler) -> None:
        if port in self._ports:
            raise AddressConflict(f"{self.name}: port {port} in use")
        self._ports[port] = handler

    def unbind(self, port: int) -> None:
        self._ports.pop(port, None)

    def ephemeral_port(self) -> int:
        while self._next_port in self._ports:
            self._next_port += 1
        port = self._next_port
        self._next_port += 1
        return port

    # ───── ARP
    def arp_resolve(self, ip: int) -> SimFuture[int]:
        """MAC for *ip*: cached, or via broadcast request within the ARP timeout."""
        fut: SimFuture[int] = SimFuture()
        if ip in self.arp_cache:
            fut.set_result(self.arp_cache[ip])
            return fut
        pending = self._pending.get(ip)
        if pending is not None:
            return pending
        self._pending[ip] = fut
        self.send_arp_request(ip)
        handle = self.lan.sim.call_later(self.lan.config.arp_timeout_ns, self._resolve_timeout, ip)
        fut.add_done_callback(lambda _: handle.cancel())
        return fut

    def _resolve_timeout(self, ip: int) -> None:
        fut = self._pending.pop(ip, None)
        if fut is not None and not fut.done():
            fut.set_exception(ResolveTimeout(f"{self.name}: no ARP reply for {ip_str(ip)}"))

    def send_arp_request(self, target_ip: int) -> None:
        frame = self.lan.new_frame(
            FrameKind.ARP_REQUEST,
            src_mac=self.mac, dst_mac=BROADCAST_MAC,
            src_ip=self.ip, dst_ip=target_ip,
            payload=pack_arp(ARP_REQUEST_OP, self.mac, self.ip, 0, target_ip),
        )
        self.lan.switch_deliver(frame)

    def send_arp_reply(self, to: HostId, claim_ip: int, claim_mac: int) -> Frame:
        """Tell *to* that *claim_ip* is at *claim_mac* (true or not)."""
        frame = self.lan.new_frame(
            FrameKind.ARP_REPLY,
            src_mac=self.mac, dst_mac=to.mac,
            src_ip=claim_ip, dst_ip=to.ip,
            payload=pack_arp(ARP_REPLY_OP, claim_mac, claim_ip, to.mac, to.ip),
        )
        self.lan.switch_deliver(frame)
        return frame

    # ───── receive path
    def receive(self, frame: Frame) -> None:
        if frame.kind is FrameKind.STREAM:
            self._receive_stream(frame)
            return
        packet = unpack_arp(frame.payload)
        if packet.op == ARP_REQUEST_OP:
            if packet.tpa == self.ip:
                self.send_arp_reply(
                    HostId("", packet.spa, packet.sha), claim_ip=self.ip, claim_mac=self.mac
                )
            return
        self.arp_cache[packet.spa] = packet.sha
        for listener in list(self.arp_listeners):
            listener(packet)
        fut = self._pending.pop(packet.spa, None)
        if fut is not None:
            fut.set_result(packet.sha)

    def _receive_stream(self, frame: Frame) -> None:
        if frame.dst_ip != self.ip:
            if self.promiscuous is not None:
                self.promiscuous(frame)
            else:
                self.lan.drop(frame, "not_for_host")
            return
        handler = self._ports.get(frame.dst_port)
        if handler is None:
            self.lan.drop(frame, "port_closed")
            return
        handler(frame)

    # ───── send path
    def send_stream(self, dst_ip: int, src_port: int, dst_port: int, payload: bytes) -> None:
        """Send one pub/sub unit to ``dst_ip:dst_port`` once its MAC is known."""
        def emit(fut: SimFuture[int]) -> None:
            if fut.exception() is not None:
                self.lan.drops["unresolved"] += 1
                log_event(log, "stream_unresolved", t_ns=self.lan.sim.now,
                          host=self.name, dst=ip_str(dst_ip))
                return
            frame = self.lan.new_frame(
                FrameKind.STREAM,
                src_mac=self.mac, dst_mac=fut.result(),
                src_ip=self.ip, dst_ip=dst_ip,
                src_port=src_port, dst_port=dst_port,
                payload=payload,
            )
            self.lan.switch_deliver(frame)

        self.arp_resolve(dst_ip).add_done_callback(emit)


def send_arp_reply(sender: Host, to: HostId, claim_ip: int, claim_mac: int) -> Frame:
    return sender.send_arp_reply(to, claim_ip, claim_mac)


def scan_subnet(scanner: Host, window_ns: Optional[int] = None) -> SimFuture[list[tuple[int, int]]]:
    """ARP-sweep every address of the subnet; resolves to ``[(ip, mac)]`` sorted by ip.

    Responders are collected from replies to the sweep itself, so poisoned
    caches elsewhere do not change the result.
    """
    lan = scanner.lan
    window = lan.config.arp_timeout_ns if window_ns is None else window_ns
    targets = {ip for ip in lan.subnet_ips() if ip != scanner.ip}
    seen: dict[int, int] = {}
    result: SimFuture[list[tuple[int, int]]] = SimFuture()

    def on_reply(packet: ArpPacket) -> None:
        if packet.spa in targets and packet.tpa == scanner.ip and packet.spa not in seen:
            seen[packet.spa] = packet.sha

    def finish() -> None:
        scanner.arp_listeners.remove(on_reply)
        result.set_result(sorted(seen.items()))

    scanner.arp_listeners.append(on_reply)
    for ip in sorted(targets):
        scanner.send_arp_request(ip)
    lan.sim.call_later(window, finish)
    return result

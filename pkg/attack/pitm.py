# attack/pitm.py
"""
pitm.py – the person-in-the-middle relay.

Timeline of one plan:

1. ``start_time``: ARP-sweep the subnet and keep the genuine ip→mac table.
2. Both victims present: tell each one that the other's IP lives at the
   attacker's MAC. Otherwise store ``VictimNotFound`` and stand down.
3. Every diverted Stream frame is classified, mutated when it is a target
   message and the window is open, and re-emitted towards its true MAC with
   ``parent`` pointing at the diverted frame. Nothing is ever dropped.
4. ``stop_time``: re-announce the genuine bindings to both victims and keep
   relaying, unmodified, whatever still arrives via stale caches.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

from attack.flows import FrameClass, InterceptState, conn_key
from attack.rules import MutationRule, mutate
from netsim.addresses import HostId, ip_str
from netsim.events import NS_PER_MS, Scheduler, SimFuture
from netsim.frames import Frame
from netsim.lan import Host, scan_subnet, send_arp_reply
from shared.errors import InvalidPlan, PathUnresolved, VictimNotFound, WireError
from shared.logger_utils import log_event

log = logging.getLogger("twinsec.attack")


@dataclass(frozen=True)
class AttackPlan:
    victim_a: HostId            # publisher side (DTS)
    victim_b: HostId            # subscriber side (CPS)
    target_topic: str
    rules: tuple[MutationRule, ...] = ()
    start_time: int = 0
    stop_time: int = 2**63 - 1
    scan_window_ns: int = 5 * NS_PER_MS

    def __post_init__(self) -> None:
        if not self.target_topic:
            raise InvalidPlan("target_topic must not be empty")
        if self.start_time >= self.stop_time:
            raise InvalidPlan(f"start_time {self.start_time} must precede stop_time {self.stop_time}")
        if self.scan_window_ns <= 0:
            raise InvalidPlan("scan_window_ns must be positive")


@dataclass
class AttackLog:
    poisoned_at: Optional[int] = None
    restored_at: Optional[int] = None
    path_errors: int = 0
    scan: list[tuple[int, int]] = field(default_factory=list)


class Attacker:
    def __init__(self, host: Host, plan: AttackPlan):
        self.host = host
        self.plan = plan
        self.state = InterceptState(plan.victim_a.ip, plan.victim_b.ip, plan.target_topic)
        self.true_macs: dict[int, int] = {}
        self.error: Optional[VictimNotFound] = None
        self.events = AttackLog()
        self.finished: SimFuture[dict[str, Any]] = SimFuture()

    @property
    def sim(self) -> Scheduler:
        return self.host.lan.sim

    @property
    def active(self) -> bool:
        """True while mutations are applied."""
        return (
            self.events.poisoned_at is not None
            and self.events.restored_at is None
            and self.sim.now < self.plan.stop_time
        )

    # ───── steps 1–2
    def schedule(self) -> "Attacker":
        try:
            self.sim.call_at(self.plan.start_time, self._begin)
        except ValueError as exc:
            raise InvalidPlan(str(exc)) from None
        return self

    def _begin(self) -> None:
        log_event(log, "scan_start", t_ns=self.sim.now, attacker=self.host.name)
        scan_subnet(self.host, self.plan.scan_window_ns).add_done_callback(self._on_scan)

    def _on_scan(self, fut: SimFuture[list[tuple[int, int]]]) -> None:
        table = fut.result()
        self.events.scan = table
        self.true_macs = dict(table)
        log_event(log, "scan_done", t_ns=self.sim.now,
                  hosts=[ip_str(ip) for ip, _ in table])
        missing = [v for v in (self.plan.victim_a, self.plan.victim_b) if v.ip not in self.true_macs]
        if missing:
            self.error = VictimNotFound(
                ", ".join(f"{v.name or '?'} ({ip_str(v.ip)})" for v in missing) + " not on the subnet"
            )
            log_event(log, "victim_not_found", t_ns=self.sim.now, level=logging.WARNING,
                      detail=str(self.error))
            self.finished.set_result(self.summary())
            return
        self.host.promiscuous = self._intercept
        self._announce(genuine=False)
        self.events.poisoned_at = self.sim.now
        log_event(log, "arp_poison", t_ns=self.sim.now,
                  a=ip_str(self.plan.victim_a.ip), b=ip_str(self.plan.victim_b.ip))
        self.sim.call_at(max(self.plan.stop_time, self.sim.now), self._restore)

    def _victim(self, ident: HostId) -> HostId:
        return HostId(ident.name, ident.ip, self.true_macs[ident.ip])

    def _announce(self, *, genuine: bool) -> None:
        a, b = self._victim(self.plan.victim_a), self._victim(self.plan.victim_b)
        for to, claim in ((b, a), (a, b)):
            mac = claim.mac if genuine else self.host.mac
            send_arp_reply(self.host, to, claim.ip, mac)

    def _restore(self) -> None:
        self._announce(genuine=True)
        self.events.restored_at = self.sim.now
        log_event(log, "arp_restore", t_ns=self.sim.now)
        self.finished.set_result(self.summary())

    # ───── steps 3–5
    def _intercept(self, frame: Frame) -> None:
        totals = self.state.totals
        totals.seen += 1
        cls = self.state.classify(frame)
        flow = self.state.flows.get(conn_key(frame)) if cls is not FrameClass.PASSTHROUGH else None
        if flow is not None:
            flow.counters.seen += 1
        payload = frame.payload
        action = "relay"
        if cls is FrameClass.TARGET:
            totals.matched += 1
            flow.counters.matched += 1
        if cls is FrameClass.TARGET and self.active:
            try:
                out = mutate(flow.schema, payload, self.plan.rules, flow.counters.matched)
            except PathUnresolved as exc:
                self.events.path_errors += 1
                action = "path_error"
                log_event(log, "rule_path_error", t_ns=self.sim.now, level=logging.WARNING,
                          frame=frame.id, error=str(exc))
            except WireError:
                action = "undecodable"
            else:
                if out != payload:
                    totals.mutated += 1
                    flow.counters.mutated += 1
                    payload = out
                    action = "mutate"
        self.forward(frame, payload, note={"class": cls.value, "action": action})
        totals.forwarded += 1
        if flow is not None:
            flow.counters.forwarded += 1

    def forward(self, frame: Frame, payload: bytes, note: Optional[dict[str, Any]] = None) -> Frame:
        """Re-emit *frame* towards the true MAC of its destination IP."""
        lan = self.host.lan
        dst_mac = self.true_macs.get(frame.dst_ip, frame.dst_mac)
        out = lan.new_frame(
            frame.kind,
            src_mac=self.host.mac, dst_mac=dst_mac,
            src_ip=frame.src_ip, dst_ip=frame.dst_ip,
            src_port=frame.src_port, dst_port=frame.dst_port,
            payload=payload,
            parent=frame.id,
        )
        if note is not None:
            lan.trace.annotate(out.id, note)
        lan.switch_deliver(out)
        return out

    def summary(self) -> dict[str, Any]:
        out: dict[str, Any] = self.state.summary()
        out["path_errors"] = self.events.path_errors
        out["poisoned_at_ns"] = self.events.poisoned_at
        out["restored_at_ns"] = self.events.restored_at
        out["error"] = None if self.error is None else str(self.error)
        return out


def run_attack(host: Host, plan: AttackPlan) -> Attacker:
    """Arm *host* with *plan*; the attack runs as the scheduler advances."""
    return Attacker(host, plan).schedule()

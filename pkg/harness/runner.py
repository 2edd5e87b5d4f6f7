# harness/runner.py
"""
runner.py – build one simulated world from a scenario and run it.

Everything lives on a single event loop: the LAN, the pub/sub nodes, the
attacker, the DTS command programs and the 100 Hz (by default) plant ticks.
The same scenario and seed always yield the same trace, CSVs and report.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd

from attack.pitm import AttackPlan, Attacker, run_attack
from guard.anomaly import AnomalyDetector
from harness.metrics import emit_metrics, metrics_row
from harness.programs import ArmGoals, CommandProgram, ConstantTwist
from harness.scenario import ConstantTwistProgram, Scenario, load_scenario, with_overrides
from netsim.addresses import parse_ip, parse_mac
from netsim.events import NS_PER_MS, Scheduler, to_ns
from netsim.lan import Host, Lan, LanConfig
from netsim.trace import FrameTrace
from plant.arm import ArmState, ArmTwin
from plant.drive import Command, DrivePose, DriveTwin
from plant.safety import ARM_COLUMNS, DRIVE_COLUMNS, SafetyReport, evaluate_safety
from pubsub.master import Master
from pubsub.nodes import PublisherNode, SubscriberNode
from shared.errors import ScenarioError, TwinsecError
from shared.logger_utils import log_event, log_run

log = logging.getLogger("twinsec.run")

Twin = Union[DriveTwin, ArmTwin]

AUTH_NOTE = (
    "authentication, not confidentiality, is what stops the relay: "
    "modified commands fail the tag check, while encryption alone would only hide them"
)


@dataclass
class RunReport:
    scenario: str
    seed: int
    duration_s: float
    plant: str
    safety: SafetyReport
    attack: Optional[dict[str, Any]]
    guard: dict[str, Any]
    frames: dict[str, Any]
    plant_rejected: int
    dts_states: pd.DataFrame
    cps_states: pd.DataFrame
    trace: FrameTrace
    auth_enabled: bool = False
    anomaly_enabled: bool = False
    files: dict[str, str] = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def msgs_seen(self) -> int:
        return 0 if self.attack is None else self.attack["seen"]

    @property
    def msgs_mutated(self) -> int:
        return 0 if self.attack is None else self.attack["mutated"]

    @property
    def msgs_rejected(self) -> int:
        return self.guard["rejected_total"]

    def notes(self) -> list[str]:
        out: list[str] = []
        if self.auth_enabled:
            out.append(AUTH_NOTE)
        if self.msgs_rejected:
            out.append(
                f"{self.msgs_rejected} command(s) dropped by the guards; the CPS held its "
                "previous command in their place (denial of service, not spoofing)"
            )
        if self.attack is not None and self.attack.get("error"):
            out.append(f"attack aborted: {self.attack['error']}")
        return out

    def to_json(self) -> dict[str, Any]:
        """Deterministic report; no wall-clock fields."""
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "duration_s": self.duration_s,
            "plant": self.plant,
            "guards": {"auth": self.auth_enabled, "anomaly": self.anomaly_enabled},
            "safety": self.safety.as_dict(),
            "attack": self.attack,
            "guard": self.guard,
            "held_commands": self.msgs_rejected,
            "plant_rejected_commands": self.plant_rejected,
            "frames": self.frames,
            "notes": self.notes(),
            "files": self.files,
        }


# ──────────────────────────────────────────────
# World construction
# ──────────────────────────────────────────────
class World:
    def __init__(self, s: Scenario):
        self.scenario = s
        self.sim = Scheduler()
        self.trace = FrameTrace()
        self.lan = Lan(
            self.sim,
            LanConfig(
                latency_ns=round(s.network.latency_ms * NS_PER_MS),
                arp_timeout_ns=round(s.network.arp_timeout_ms * NS_PER_MS),
            ),
            self.trace,
        )
        self.hosts: dict[str, Host] = {
            h.name: self.lan.add_host(h.name, parse_ip(h.ip), parse_mac(h.mac)) for h in s.hosts
        }
        self.master = Master()
        self.auth = s.guards.auth.config() if s.guards.auth.enabled else None
        self.programs: dict[str, CommandProgram] = {p.topic: self._program(p) for p in s.programs}
        self.dts_twin, self.cps_twin = self._twins()
        self.publishers: dict[str, PublisherNode] = {}
        self.subscribers: dict[str, SubscriberNode] = {}
        self.dts_rows: list[dict[str, float]] = []
        self.cps_rows: list[dict[str, float]] = []
        self.attacker: Optional[Attacker] = None

        for t in s.topics:
            self._wire_topic(t)
        if s.attack_enabled:
            self.attacker = run_attack(self.hosts[s.attack.attacker], self._plan())
        self.sim.every(to_ns(s.plant.dt_s), self._tick, start=0)

    def _program(self, p: Any) -> CommandProgram:
        s = self.scenario
        if isinstance(p, ConstantTwistProgram):
            return ConstantTwist(p.twist)
        zone = s.envelope.exclusion_zone if p.avoid_exclusion_zone else None
        return ArmGoals(
            seed=s.seed,
            initial_angles=s.plant.initial_angles,
            joint=p.joint,
            low=p.low,
            high=p.high,
            time_from_start_s=p.time_from_start_s,
            start_delay_ns=round(p.start_delay_ms * NS_PER_MS),
            avoid=zone,
        )

    def _twins(self) -> tuple[Twin, Twin]:
        plant = self.scenario.plant
        if plant.kind == "arm":
            return (ArmTwin(ArmState.at(plant.initial_angles)),
                    ArmTwin(ArmState.at(plant.initial_angles)))
        x, y, theta = plant.initial_pose
        pose = DrivePose(x, y, theta)
        initial = self.programs[plant.topic].initial()
        if plant.synchronized_start and initial is not None:
            pose = DrivePose(x, y, theta, last_cmd=Command.from_twist(initial))
        timeout = None if plant.command_timeout_s is None else to_ns(plant.command_timeout_s)
        return (DriveTwin(pose, command_timeout_ns=timeout),
                DriveTwin(pose, command_timeout_ns=timeout))

    def _wire_topic(self, t: Any) -> None:
        s = self.scenario
        is_plant = t.name == s.plant.topic
        program = self.programs[t.name]
        self.publishers[t.name] = pub = PublisherNode(
            self.hosts[t.publisher], self.master, t.name, t.type, port=t.port, auth=self.auth,
        )

        anomaly = None
        if is_plant and s.guards.anomaly.enabled:
            seed_value = program.initial() if s.plant.synchronized_start else None
            anomaly = AnomalyDetector(s.guards.anomaly.config(), prev=seed_value)
        on_message = (lambda value, conn: self.cps_twin.command(value, self.sim.now)) if is_plant else None
        self.subscribers[t.name] = sub = SubscriberNode(
            self.hosts[t.subscriber], self.master, on_message, auth=self.auth, anomaly=anomaly,
        )
        self.sim.call_at(to_ns(t.subscribe_at_s), sub.subscribe, t.name)

        counter = itertools.count()

        def publish_next() -> None:
            value = program.message(next(counter), self.sim.now)
            if is_plant:
                self.dts_twin.command(value, self.sim.now)
            pub.publish(value)

        start = to_ns(t.start_s)
        if t.once:
            self.sim.call_at(start, publish_next)
        else:
            self.sim.every(round(1e9 / t.rate_hz), publish_next, start=start)

    def _plan(self) -> AttackPlan:
        a = self.scenario.attack
        return AttackPlan(
            victim_a=self.hosts[a.victim_a].id,
            victim_b=self.hosts[a.victim_b].id,
            target_topic=a.target_topic,
            rules=tuple(a.rules),
            start_time=to_ns(a.start_s),
            stop_time=2**63 - 1 if a.stop_s is None else to_ns(a.stop_s),
            scan_window_ns=round(a.scan_window_ms * NS_PER_MS),
        )

    def _tick(self) -> None:
        now = self.sim.now
        if now > 0:
            dt = self.scenario.plant.dt_s
            self.dts_twin.tick(dt, now)
            self.cps_twin.tick(dt, now)
        t = now / 1e9
        self.dts_rows.append(self.dts_twin.row(t))
        self.cps_rows.append(self.cps_twin.row(t))

    # ───── results
    def guard_counters(self) -> dict[str, Any]:
        rejected: dict[str, int] = {}
        received = accepted = 0
        for sub in self.subscribers.values():
            received += sub.received
            accepted += sub.accepted
            for reason, n in sub.rejected.items():
                rejected[reason] = rejected.get(reason, 0) + n
        return {
            "received": received,
            "accepted": accepted,
            "rejected": dict(sorted(rejected.items())),
            "rejected_total": sum(rejected.values()),
        }

    def frame_counters(self) -> dict[str, Any]:
        return {
            "emitted": len({r["id"] for r in self.trace.records}),
            "delivered": self.lan.delivered,
            "dropped": dict(sorted(self.lan.drops.items())),
        }

    def states(self) -> tuple[pd.DataFrame, pd.DataFrame]:
        columns = list(ARM_COLUMNS if self.scenario.plant.kind == "arm" else DRIVE_COLUMNS)
        return (pd.DataFrame(self.dts_rows, columns=columns),
                pd.DataFrame(self.cps_rows, columns=columns))


def build_world(s: Scenario) -> World:
    return World(s)


def run_scenario(s: Scenario, out_root: Optional[Union[str, Path]] = None) -> RunReport:
    """Run *s* to its duration; write outputs to ``<out_root>/<name>/`` when given."""
    t_in = time.time_ns()
    world = build_world(s)
    t_built = time.time_ns()
    world.sim.run(until=to_ns(s.duration_s))
    t_simulated = time.time_ns()

    dts, cps = world.states()
    safety = evaluate_safety(dts, cps, s.envelope, s.plant.kind)
    plant_rejected = (
        getattr(world.cps_twin, "rejected_nonfinite", 0) + getattr(world.cps_twin, "rejected_goals", 0)
    )
    report = RunReport(
        scenario=s.name,
        seed=s.seed,
        duration_s=s.duration_s,
        plant=s.plant.kind,
        safety=safety,
        attack=None if world.attacker is None else world.attacker.summary(),
        guard=world.guard_counters(),
        frames=world.frame_counters(),
        plant_rejected=plant_rejected,
        dts_states=dts,
        cps_states=cps,
        trace=world.trace,
        auth_enabled=s.guards.auth.enabled,
        anomaly_enabled=s.guards.anomaly.enabled,
    )
    if out_root is not None:
        emit_metrics(report, Path(out_root) / s.name)
    t_written = time.time_ns()
    report.runtime_s = (t_written - t_in) / 1e9

    log_event(log, "run_done", t_ns=world.sim.now, scenario=s.name,
              max_divergence=safety.max_divergence,
              violation=None if safety.violation is None else safety.violation.value)
    log_run(
        log,
        scenario=s.name,
        seed=s.seed,
        t_in=t_in,
        t_built=t_built,
        t_simulated=t_simulated,
        t_written=t_written,
        counters={"events": world.sim.events_run, "msgs_seen": report.msgs_seen,
                  "msgs_mutated": report.msgs_mutated, "msgs_rejected": report.msgs_rejected},
    )
    return report


def run_one(ref: str, out_root: Optional[str], overrides: dict[str, Any]) -> dict[str, Any]:
    """Load, run and summarize one scenario; errors come back as data.

    Used by batch mode, where results cross a process boundary.
    """
    try:
        s = with_overrides(load_scenario(ref), **overrides)
        report = run_scenario(s, out_root)
    except ScenarioError as exc:
        return {"ref": ref, "ok": False, "exit": 1, "error": str(exc)}
    except (TwinsecError, OSError) as exc:
        return {"ref": ref, "ok": False, "exit": 2, "error": str(exc)}
    return {
        "ref": ref,
        "ok": True,
        "exit": 0,
        "row": metrics_row(report),
        "notes": report.notes(),
        "runtime_s": report.runtime_s,
        "out": None if out_root is None else str(Path(out_root) / s.name),
    }

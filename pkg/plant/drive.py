# plant/drive.py
"""
drive.py – planar mobile base driven by Twist commands.

Zero-order hold: the last accepted command is applied at every step until the
next one arrives (or, when ``command_timeout_ns`` is set, until it goes stale
and the base stops).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, NamedTuple, Optional

from shared.errors import NonFiniteCommand


class Command(NamedTuple):
    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0

    @classmethod
    def from_twist(cls, twist: dict[str, Any]) -> "Command":
        cmd = cls(float(twist["linear"]["x"]), float(twist["linear"]["y"]), float(twist["angular"]["z"]))
        if not all(math.isfinite(v) for v in cmd):
            raise NonFiniteCommand(f"non-finite velocity command {tuple(cmd)}")
        return cmd

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


STOP = Command()


def normalize_angle(theta: float) -> float:
    """Map *theta* onto (−π, π]."""
    a = math.remainder(theta, math.tau)
    return math.pi if a <= -math.pi else a


@dataclass(frozen=True)
class DrivePose:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    last_cmd: Command = STOP
    stamp: int = 0              # receipt time of last_cmd, ns


def apply_command(p: DrivePose, twist: dict[str, Any], now: int) -> DrivePose:
    """Hold *twist* from *now* on; ``NonFiniteCommand`` leaves *p* in force."""
    return replace(p, last_cmd=Command.from_twist(twist), stamp=now)


def step_drive(p: DrivePose, dt: float, cmd: Optional[Command] = None) -> DrivePose:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    vx, vy, wz = p.last_cmd if cmd is None else cmd
    c, s = math.cos(p.theta), math.sin(p.theta)
    return replace(
        p,
        x=p.x + (vx * c - vy * s) * dt,
        y=p.y + (vx * s + vy * c) * dt,
        theta=normalize_angle(p.theta + wz * dt),
    )


class DriveTwin:
    """One drive instance advanced by the event loop."""

    def __init__(self, pose: DrivePose = DrivePose(), *, command_timeout_ns: Optional[int] = None):
        self.pose = pose
        self.command_timeout_ns = command_timeout_ns
        self.rejected_nonfinite = 0

    def command(self, twist: dict[str, Any], now: int) -> bool:
        try:
            self.pose = apply_command(self.pose, twist, now)
        except NonFiniteCommand:
            self.rejected_nonfinite += 1
            return False
        return True

    def tick(self, dt: float, now: int) -> DrivePose:
        cmd = None
        if self.command_timeout_ns is not None and now - self.pose.stamp > self.command_timeout_ns:
            cmd = STOP
        self.pose = step_drive(self.pose, dt, cmd)
        return self.pose

    def row(self, t: float) -> dict[str, float]:
        return {"t": t, "x": self.pose.x, "y": self.pose.y, "theta": self.pose.theta}

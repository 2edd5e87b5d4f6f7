# plant/arm.py
"""
arm.py – kinematic tracker for a six-joint arm.

A goal's trajectory is followed by piecewise-linear interpolation in joint
space from its start time (the trajectory header stamp, or the receipt time
when the stamp is zero), beginning at the angles held then and clamped at the
final point. A new goal replaces the active one.
Velocities and accelerations in the points are carried but not used.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

import numpy as np

from shared.errors import EmptyTrajectory, MalformedTrajectory, NonFiniteCommand
from wire.kinds import Duration, Time
from wire.schemas import UR_JOINT_NAMES

N_JOINTS = len(UR_JOINT_NAMES)


@dataclass(frozen=True)
class Trajectory:
    starts_at: int                # start time, ns
    start: np.ndarray               # (6,) angles at start time
    times: np.ndarray               # (n,) seconds from start, strictly increasing
    positions: np.ndarray           # (n, 6) canonical joint order

    def knots(self) -> tuple[np.ndarray, np.ndarray]:
        if self.times[0] > 0:
            return np.concatenate(([0.0], self.times)), np.vstack((self.start, self.positions))
        return self.times, self.positions


@dataclass(frozen=True)
class ArmState:
    angles: np.ndarray
    trajectory: Optional[Trajectory] = None
    joint_names: tuple[str, ...] = UR_JOINT_NAMES

    def __post_init__(self) -> None:
        if self.angles.shape != (N_JOINTS,):
            raise MalformedTrajectory(f"arm needs {N_JOINTS} joint angles, got shape {self.angles.shape}")

    @classmethod
    def at(cls, angles: Any) -> "ArmState":
        return cls(np.asarray(angles, dtype=float).copy())


def step_arm(a: ArmState, now: int) -> ArmState:
    """Angles at *now* along the active trajectory (held when there is none)."""
    traj = a.trajectory
    if traj is None:
        return a
    elapsed = (now - traj.starts_at) / 1e9
    t, pos = traj.knots()
    angles = np.array([np.interp(elapsed, t, pos[:, j]) for j in range(N_JOINTS)])
    return replace(a, angles=angles)


def trajectory_from_goal(goal: dict[str, Any], start: np.ndarray, now: int,
                         joint_names: tuple[str, ...] = UR_JOINT_NAMES) -> Trajectory:
    """Build a :class:`Trajectory` from a decoded FollowJointTrajectory action goal."""
    traj = goal["goal"]["trajectory"]
    names = [n.decode("utf-8", "replace") if isinstance(n, bytes) else n for n in traj["joint_names"]]
    points = traj["points"]
    if not points:
        raise EmptyTrajectory("goal carries no trajectory points")
    if sorted(names) != sorted(joint_names):
        raise MalformedTrajectory(f"joint_names {names} do not match {list(joint_names)}")
    order = [names.index(n) for n in joint_names]

    times, rows = [], []
    for k, point in enumerate(points):
        positions = point["positions"]
        if len(positions) != len(names):
            raise MalformedTrajectory(f"point {k} has {len(positions)} positions for {len(names)} joints")
        tfs = point["time_from_start"]
        times.append(Duration(*tfs).to_ns() / 1e9)
        rows.append([positions[i] for i in order])
    times_a = np.asarray(times, dtype=float)
    rows_a = np.asarray(rows, dtype=float)
    if not np.isfinite(rows_a).all():
        raise NonFiniteCommand("trajectory contains non-finite positions")
    if times_a[0] < 0 or (np.diff(times_a) <= 0).any():
        raise MalformedTrajectory(f"time_from_start must be >= 0 and strictly increasing: {times}")
    return Trajectory(starts_at=now, start=start, times=times_a, positions=rows_a)


def trajectory_start(goal: dict[str, Any], now: int) -> int:
    """Trajectory start time: the header stamp, or *now* when the stamp is zero."""
    stamp = Time(*goal["goal"]["trajectory"]["header"]["stamp"]).to_ns()
    return stamp if stamp > 0 else now


def accept_goal(a: ArmState, goal: dict[str, Any], now: int) -> ArmState:
    """Replace the active trajectory; errors leave *a* in force.

    The new trajectory starts from the angles the old one reaches at the new
    start time, so twins receiving the same goal at different instants agree.
    """
    start = trajectory_start(goal, now)
    current = step_arm(a, start).angles
    return ArmState(current, trajectory_from_goal(goal, current, start, a.joint_names), a.joint_names)


class ArmTwin:
    """One arm instance advanced by the event loop."""

    def __init__(self, state: ArmState):
        self.state = state
        self.rejected_goals = 0

    def command(self, goal: dict[str, Any], now: int) -> bool:
        try:
            self.state = accept_goal(self.state, goal, now)
        except (EmptyTrajectory, MalformedTrajectory, NonFiniteCommand):
            self.rejected_goals += 1
            return False
        return True

    def tick(self, dt: float, now: int) -> ArmState:
        self.state = step_arm(self.state, now)
        return self.state

    def row(self, t: float) -> dict[str, float]:
        out = {"t": t}
        out.update({f"j{k + 1}": float(v) for k, v in enumerate(self.state.angles)})
        return out

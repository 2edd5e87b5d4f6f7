# harness/programs.py
"""
programs.py – deterministic stand-ins for the DTS engines.

A program yields the k-th message (k = 0, 1, …) a DTS publisher sends on its
topic. Nothing here depends on wall-clock time; arm targets come from a
``numpy.random.Generator`` seeded by the scenario.
"""
from __future__ import annotations

import math
from typing import Any, Optional, Protocol

import numpy as np

from plant.safety import ExclusionZone
from shared.errors import SimulationError
from wire.kinds import Duration, Time
from wire.schemas import ACTION_GOAL, TWIST, UR_JOINT_NAMES, builtin_schemas
from wire.text import from_jsonable

MAX_REDRAWS = 1000


class CommandProgram(Protocol):
    type_name: str

    def message(self, k: int, now: int) -> dict[str, Any]: ...

    def initial(self) -> Optional[dict[str, Any]]: ...


class ConstantTwist:
    type_name = TWIST

    def __init__(self, twist: dict[str, Any]):
        self._json = twist
        self._schema = builtin_schemas()[TWIST]
        from_jsonable(self._schema, twist)          # validate once

    def message(self, k: int, now: int) -> dict[str, Any]:
        return from_jsonable(self._schema, self._json)

    def initial(self) -> dict[str, Any]:
        return self.message(0, 0)


class ArmGoals:
    """FollowJointTrajectory goals moving one joint to seeded random targets.

    Each goal is a single point reached ``time_from_start_s`` after the
    trajectory starts; the start is stamped ``start_delay_ns`` after publishing
    so every receiver begins at the same instant. Targets falling inside
    *avoid* are redrawn.
    """

    type_name = ACTION_GOAL

    def __init__(
        self,
        *,
        seed: int,
        initial_angles: list[float],
        joint: str = "shoulder_pan_joint",
        low: float = -math.pi / 2,
        high: float = math.pi / 2,
        time_from_start_s: float = 1.0,
        start_delay_ns: int = 5_000_000,
        avoid: Optional[ExclusionZone] = None,
    ):
        self.rng = np.random.default_rng(seed)
        self.joint_index = UR_JOINT_NAMES.index(joint)
        self.low, self.high = low, high
        self.time_from_start = Duration.from_ns(round(time_from_start_s * 1e9))
        self.start_delay_ns = start_delay_ns
        self.avoid = avoid if avoid is not None and avoid.joint == joint else None
        self.angles = [float(a) for a in initial_angles]
        self._schema = builtin_schemas()[ACTION_GOAL]
        self.targets: list[float] = []

    def _draw(self) -> float:
        for _ in range(MAX_REDRAWS):
            target = float(self.rng.uniform(self.low, self.high))
            if self.avoid is None or not self.avoid.contains(target):
                return target
        raise SimulationError(f"no target outside [{self.avoid.lo}, {self.avoid.hi}] after {MAX_REDRAWS} draws")

    def message(self, k: int, now: int) -> dict[str, Any]:
        target = self._draw()
        self.targets.append(target)
        positions = list(self.angles)
        positions[self.joint_index] = target
        start = Time.from_ns(now + self.start_delay_ns)
        zeros = [0.0] * len(UR_JOINT_NAMES)
        value = from_jsonable(self._schema, {
            "header": {"seq": k},
            "goal_id": {"id": f"dts_goal_{k}"},
            "goal": {
                "trajectory": {
                    "header": {"seq": k},
                    "joint_names": list(UR_JOINT_NAMES),
                    "points": [{
                        "positions": positions,
                        "velocities": zeros,
                        "accelerations": zeros,
                    }],
                },
            },
        })
        stamp = Time.from_ns(now)
        value["header"]["stamp"] = stamp
        value["goal_id"]["stamp"] = stamp
        value["goal"]["trajectory"]["header"]["stamp"] = start
        value["goal"]["trajectory"]["points"][0]["time_from_start"] = self.time_from_start
        return value

    def initial(self) -> None:
        return None

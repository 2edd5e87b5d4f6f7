"""Message builders shared by the test modules."""
from __future__ import annotations

from typing import Any

from netsim.events import NS_PER_S
from wire.kinds import Duration, Time
from wire.schemas import ACTION_GOAL, TWIST, UR_JOINT_NAMES, builtin_schemas
from wire.text import from_jsonable


def twist(vx: float = 0.0, wz: float = 0.0, vy: float = 0.0) -> dict[str, Any]:
    return from_jsonable(builtin_schemas()[TWIST], {"linear": {"x": vx, "y": vy}, "angular": {"z": wz}})


def arm_goal(points: list[tuple[list[float], float]], *, stamp_ns: int = 0,
             joint_names: tuple[str, ...] = UR_JOINT_NAMES) -> dict[str, Any]:
    """Action goal with ``(positions, time_from_start_s)`` points."""
    value = from_jsonable(builtin_schemas()[ACTION_GOAL], {
        "goal": {
            "trajectory": {
                "joint_names": list(joint_names),
                "points": [{"positions": list(p)} for p, _ in points],
            },
        },
    })
    traj = value["goal"]["trajectory"]
    traj["header"]["stamp"] = Time.from_ns(stamp_ns)
    for point, (_, tfs) in zip(traj["points"], points):
        point["time_from_start"] = Duration.from_ns(round(tfs * NS_PER_S))
    return value


def pan_goal(angle: float, tfs: float = 1.0, stamp_ns: int = 0) -> dict[str, Any]:
    positions = [0.0] * len(UR_JOINT_NAMES)
    positions[UR_JOINT_NAMES.index("shoulder_pan_joint")] = angle
    return arm_goal([(positions, tfs)], stamp_ns=stamp_ns)

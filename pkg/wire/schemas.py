# wire/schemas.py
"""
schemas.py – the message types carried between the twins.

Only the types needed for the velocity (``geometry_msgs/Twist``) and the
joint-trajectory (``control_msgs/FollowJointTrajectoryActionGoal``) flows are
registered. md5sums are opaque tokens compared for equality only.
"""
from __future__ import annotations

from collections.abc import Iterator, Mapping
from functools import lru_cache
from typing import Optional

from shared.errors import UnknownSchema
from wire.kinds import (
    DURATION,
    FLOAT64,
    STR,
    TIME,
    UINT32,
    MessageSchema,
    array_of,
    record_of,
)

# UR driver joint order as reported in ``positions``
UR_JOINT_NAMES: tuple[str, ...] = (
    "elbow_joint",
    "shoulder_lift_joint",
    "shoulder_pan_joint",
    "wrist_1_joint",
    "wrist_2_joint",
    "wrist_3_joint",
)

TWIST = "geometry_msgs/Twist"
ACTION_GOAL = "control_msgs/FollowJointTrajectoryActionGoal"


class SchemaRegistry(Mapping[str, MessageSchema]):
    """Read-only ``type_name → MessageSchema`` map."""

    def __init__(self, schemas: list[MessageSchema]):
        self._by_name: dict[str, MessageSchema] = {}
        for schema in schemas:
            if schema.type_name in self._by_name:
                raise ValueError(f"duplicate schema {schema.type_name}")
            self._by_name[schema.type_name] = schema

    def __getitem__(self, type_name: str) -> MessageSchema:
        try:
            return self._by_name[type_name]
        except KeyError:
            raise UnknownSchema(type_name) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._by_name)

    def __len__(self) -> int:
        return len(self._by_name)

    def lookup(self, type_name: str) -> Optional[MessageSchema]:
        return self._by_name.get(type_name)


@lru_cache(maxsize=1)
def builtin_schemas() -> SchemaRegistry:
    vector3 = MessageSchema(
        "geometry_msgs/Vector3",
        "4a842b65f413084dc2b10fb484ea7f17",
        (("x", FLOAT64), ("y", FLOAT64), ("z", FLOAT64)),
    )
    twist = MessageSchema(
        TWIST,
        "9f195f881246fdfa2798d1d3eebca84a",
        (("linear", record_of(vector3)), ("angular", record_of(vector3))),
    )
    header = MessageSchema(
        "std_msgs/Header",
        "2176decaecbce78abc3b96ef049fabed",
        (("seq", UINT32), ("stamp", TIME), ("frame_id", STR)),
    )
    goal_id = MessageSchema(
        "actionlib_msgs/GoalID",
        "302881f31927c1df708a2dbab0e80ee8",
        (("stamp", TIME), ("id", STR)),
    )
    point = MessageSchema(
        "trajectory_msgs/JointTrajectoryPoint",
        "f3cd1e1c4d320c79d6985c904ae5dcd3",
        (
            ("positions", array_of(FLOAT64)),
            ("velocities", array_of(FLOAT64)),
            ("accelerations", array_of(FLOAT64)),
            ("time_from_start", DURATION),
        ),
    )
    trajectory = MessageSchema(
        "trajectory_msgs/JointTrajectory",
        "65b4f94a94d1ed67169da35a02f33d3f",
        (
            ("header", record_of(header)),
            ("joint_names", array_of(STR)),
            ("points", array_of(record_of(point))),
        ),
    )
    tolerance = MessageSchema(
        "control_msgs/JointTolerance",
        "f544fe9c16cf04547e135dd6063ff5be",
        (
            ("name", STR),
            ("position", FLOAT64),
            ("velocity", FLOAT64),
            ("acceleration", FLOAT64),
        ),
    )
    goal = MessageSchema(
        "control_msgs/FollowJointTrajectoryGoal",
        "69636787b6ecbde4d61d711979bc7ecb",
        (
            ("trajectory", record_of(trajectory)),
            ("path_tolerance", array_of(record_of(tolerance))),
            ("goal_tolerance", array_of(record_of(tolerance))),
            ("goal_time_tolerance", DURATION),
        ),
    )
    action_goal = MessageSchema(
        ACTION_GOAL,
        "cff5c1d533bf2f82dd0138d57f4304bb",
        (
            ("header", record_of(header)),
            ("goal_id", record_of(goal_id)),
            ("goal", record_of(goal)),
        ),
    )
    return SchemaRegistry(
        [vector3, twist, header, goal_id, point, trajectory, tolerance, goal, action_goal]
    )

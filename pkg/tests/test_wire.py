from __future__ import annotations

import struct

import numpy as np
import pytest
import hypothesis.strategies as st
from hypothesis import given, settings

from shared.errors import (
    BadLength,
    MalformedEntry,
    PathUnresolved,
    SchemaMismatch,
    TrailingBytes,
    Truncated,
    UnknownSchema,
    WireError,
)
from tests.helpers import pan_goal, twist
from wire.codec import decode_message, encode_message, is_finite_tree, split_message
from wire.header import ConnectionHeader, decode_header, encode_header
from wire.kinds import Duration, FieldKind, Kind, Time, record_of
from wire.paths import FieldPath
from wire.schemas import ACTION_GOAL, TWIST, UR_JOINT_NAMES, builtin_schemas
from wire.text import from_jsonable, render_tree, to_jsonable

ZERO_TWIST = bytes.fromhex("30000000" + "00" * 48)
TWIST_X_1_0 = bytes.fromhex("30000000" + "000000000000f03f" + "00" * 40)
TWIST_X_1_5 = bytes.fromhex("30000000" + "000000000000f83f" + "00" * 40)


# ─────────────────────────────────────────────────────────────────────────────
# Registry
# ─────────────────────────────────────────────────────────────────────────────

def test_registry_contents(schemas):
    "Exactly the velocity and joint-trajectory types are registered"
    assert set(schemas) == {
        "geometry_msgs/Vector3", TWIST, "std_msgs/Header", "actionlib_msgs/GoalID",
        "trajectory_msgs/JointTrajectoryPoint", "trajectory_msgs/JointTrajectory",
        "control_msgs/JointTolerance", "control_msgs/FollowJointTrajectoryGoal", ACTION_GOAL,
    }
    assert schemas[TWIST].field_names == ("linear", "angular")
    assert schemas.lookup("nope/Nope") is None
    with pytest.raises(UnknownSchema):
        schemas["nope/Nope"]


def test_goal_point_layout(goal_schema):
    "A trajectory point has three float arrays and a duration"
    traj = goal_schema.kind_of("goal").schema.kind_of("trajectory").schema
    point = traj.kind_of("points").element.schema
    assert point.field_names == ("positions", "velocities", "accelerations", "time_from_start")
    assert [str(k) for _, k in point.fields] == ["float64[]", "float64[]", "float64[]", "duration"]


# ─────────────────────────────────────────────────────────────────────────────
# Codec
# ─────────────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("vx, golden", [(0.0, ZERO_TWIST), (1.0, TWIST_X_1_0), (1.5, TWIST_X_1_5)])
def test_twist_golden_bytes(twist_schema, vx, golden):
    "Twist encodings match the reference byte vectors"
    assert encode_message(twist_schema, twist(vx)) == golden
    assert decode_message(twist_schema, golden)["linear"]["x"] == vx


def test_twist_random_bodies_reencode_bitwise(twist_schema):
    "10⁴ random 48-byte bodies decode and re-encode to the same bits (NaNs included)"
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2**63, size=(10_000, 6), dtype=np.int64).astype("<i8")
    prefix = struct.pack("<I", 48)
    for row in bits:
        buf = prefix + row.tobytes()
        assert encode_message(twist_schema, decode_message(twist_schema, buf)) == buf


def _random_value(kind: FieldKind, rng: np.random.Generator):
    tag = kind.tag
    if tag is Kind.FLOAT64:
        return float(rng.standard_normal() * 10.0 ** int(rng.integers(-6, 7)))
    if tag is Kind.INT32:
        return int(rng.integers(-(2**31), 2**31))
    if tag is Kind.UINT32:
        return int(rng.integers(0, 2**32))
    if tag is Kind.STR:
        return rng.bytes(int(rng.integers(0, 12)))
    if tag is Kind.DURATION:
        return Duration(int(rng.integers(-(2**31), 2**31)), int(rng.integers(-(2**31), 2**31)))
    if tag is Kind.TIME:
        return Time(int(rng.integers(0, 2**32)), int(rng.integers(0, 2**32)))
    if tag is Kind.ARRAY:
        limit = 7 if kind.element.tag is Kind.FLOAT64 else 4
        return [_random_value(kind.element, rng) for _ in range(int(rng.integers(0, limit)))]
    return {name: _random_value(k, rng) for name, k in kind.schema.fields}


@pytest.mark.parametrize("type_name", list(builtin_schemas()))
def test_seeded_roundtrip_per_schema(schemas, type_name):
    "10⁴ seeded values of every registered type survive encode → decode unchanged"
    kind = record_of(schemas[type_name])
    rng = np.random.default_rng(sorted(schemas).index(type_name))
    for _ in range(10_000):
        value = _random_value(kind, rng)
        assert decode_message(kind.schema, encode_message(kind.schema, value)) == value


finite = st.floats(allow_nan=False)
vector3 = st.fixed_dictionaries({"x": finite, "y": finite, "z": finite})


@given(st.fixed_dictionaries({"linear": vector3, "angular": vector3}))
def test_twist_roundtrip(value):
    "Round-trip any finite Twist"
    schema = builtin_schemas()[TWIST]
    assert decode_message(schema, encode_message(schema, value)) == value


@given(st.binary(max_size=256))
@settings(max_examples=500)
def test_decoder_is_total(buf):
    "Arbitrary bytes decode or raise a WireError, never anything else"
    for schema in builtin_schemas().values():
        try:
            decode_message(schema, buf)
        except WireError:
            pass


def test_decode_errors(twist_schema):
    "Each malformed buffer maps to its error kind"
    with pytest.raises(Truncated):
        decode_message(twist_schema, b"\x30\x00")
    with pytest.raises(Truncated):
        decode_message(twist_schema, TWIST_X_1_0[:-1])
    with pytest.raises(TrailingBytes):
        decode_message(twist_schema, TWIST_X_1_0 + b"\x00")
    with pytest.raises(Truncated):
        decode_message(twist_schema, struct.pack("<I", 8) + b"\x00" * 8)
    with pytest.raises(TrailingBytes):
        decode_message(twist_schema, struct.pack("<I", 56) + b"\x00" * 56)


def test_array_count_past_end(goal_schema):
    "An array count larger than the buffer is BadLength, not a huge allocation"
    buf = bytearray(encode_message(goal_schema, pan_goal(0.5)))
    # joint_names count sits after header(4+8+4) + goal_id(8+4) + trajectory.header(4+8+4)
    offset = 4 + 16 + 12 + 16
    struct.pack_into("<I", buf, offset, 0xFFFFFFFF)
    with pytest.raises(BadLength):
        decode_message(goal_schema, bytes(buf))


def test_encode_rejects_bad_shapes(twist_schema, goal_schema):
    with pytest.raises(SchemaMismatch):
        encode_message(twist_schema, {"linear": {"x": 0.0, "y": 0.0, "z": 0.0}})
    with pytest.raises(SchemaMismatch):
        encode_message(twist_schema, {"linear": {"x": "1", "y": 0.0, "z": 0.0},
                                      "angular": {"x": 0.0, "y": 0.0, "z": 0.0}})
    goal = pan_goal(0.0)
    goal["header"]["seq"] = -1
    with pytest.raises(SchemaMismatch):
        encode_message(goal_schema, goal)


def test_split_message_keeps_trailer():
    message, trailer = split_message(TWIST_X_1_5 + b"TAGTAGTA")
    assert message == TWIST_X_1_5
    assert trailer == b"TAGTAGTA"


def test_is_finite_tree():
    assert is_finite_tree(twist(1.0))
    assert not is_finite_tree(twist(float("nan")))
    assert not is_finite_tree(pan_goal(float("inf")))


# ─────────────────────────────────────────────────────────────────────────────
# Connection header
# ─────────────────────────────────────────────────────────────────────────────

def test_header_roundtrip():
    h = ConnectionHeader.of(callerid="/cps", topic="/cmd_vel", type=TWIST, md5sum="*")
    assert decode_header(encode_header(h)) == h
    assert h.missing() == []
    assert ConnectionHeader.of(callerid="/x").missing() == ["topic", "type", "md5sum"]


@given(st.lists(st.tuples(st.text(min_size=1).filter(lambda k: "=" not in k and k != "topic"),
                          st.text()), max_size=6))
def test_header_roundtrip_any_entries(entries):
    "Values may contain '=' and arbitrary unicode"
    h = ConnectionHeader(tuple(entries))
    assert decode_header(encode_header(h)) == h


def test_header_value_keeps_equals_signs():
    h = decode_header(encode_header(ConnectionHeader.of(error="a=b=c")))
    assert h.get("error") == "a=b=c"


def test_header_errors():
    with pytest.raises(MalformedEntry):
        encode_header(ConnectionHeader.of(topic="cmd_vel"))
    raw = b"noequals"
    with pytest.raises(MalformedEntry):
        decode_header(struct.pack("<I", 4 + len(raw)) + struct.pack("<I", len(raw)) + raw)
    with pytest.raises(BadLength):
        decode_header(struct.pack("<I", 10) + b"\x00" * 4)
    with pytest.raises(BadLength):
        decode_header(struct.pack("<I", 8) + struct.pack("<I", 100) + b"a=bc")


# ─────────────────────────────────────────────────────────────────────────────
# Field paths and text views
# ─────────────────────────────────────────────────────────────────────────────

def test_path_check(twist_schema, goal_schema):
    FieldPath.parse("linear.x").check(twist_schema)
    FieldPath.parse("goal.trajectory.points[*].positions[2]").check(goal_schema)
    FieldPath.parse("goal.trajectory.points[0].positions[2]").check(goal_schema)
    for bad, schema in [
        ("linear", twist_schema),
        ("linear.w", twist_schema),
        ("linear[0].x", twist_schema),
        ("goal.trajectory.joint_names[0]", goal_schema),
        ("goal.trajectory.points.positions", goal_schema),
    ]:
        with pytest.raises(PathUnresolved):
            FieldPath.parse(bad).check(schema)
    for bad in ["", "linear..x", "linear.x[", "1abc"]:
        with pytest.raises(PathUnresolved):
            FieldPath.parse(bad)


def test_path_update_wildcard():
    goal = pan_goal(0.3)
    goal["goal"]["trajectory"]["points"].append(dict(goal["goal"]["trajectory"]["points"][0],
                                                     positions=[0.0] * 6))
    path = FieldPath.parse("goal.trajectory.points[*].positions[2]")
    assert path.get(goal) == [0.3, 0.0]
    assert path.update(goal, lambda v: v + 1.0) == 2
    assert path.get(goal) == [1.3, 1.0]


def test_path_index_out_of_range():
    goal = pan_goal(0.3)
    goal["goal"]["trajectory"]["points"] = []
    with pytest.raises(PathUnresolved):
        FieldPath.parse("goal.trajectory.points[0].positions[2]").get(goal)
    assert FieldPath.parse("goal.trajectory.points[*].positions[2]").get(goal) == []


def test_text_views(twist_schema, goal_schema):
    assert from_jsonable(twist_schema, to_jsonable(twist_schema, twist(1.5))) == twist(1.5)
    with pytest.raises(SchemaMismatch):
        from_jsonable(twist_schema, {"linear": {"q": 1.0}})
    tree = render_tree(twist_schema, twist(1.5))
    assert "geometry_msgs/Vector3 linear" in tree
    assert "float64 x: 1.5" in tree
    goal_tree = render_tree(goal_schema, pan_goal(0.5))
    assert "(1 items)" in goal_tree
    assert UR_JOINT_NAMES[0] in goal_tree

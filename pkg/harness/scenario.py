# harness/scenario.py
"""
scenario.py – the JSON scenario document and its validation.

One self-contained file describes a run: hosts, topics, the DTS command
programs, the plant, an optional attack plan, guards and the safety envelope.
Unknown keys are rejected everywhere. Structural errors surface as
``ScenarioValidationError`` naming the dotted field; cross references (host
and topic names, rule paths against the topic schema) are checked after the
structure is valid.
"""
from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from attack.rules import MutationRule
from guard.anomaly import AnomalyConfig
from guard.auth import AuthConfig
from netsim.addresses import parse_ip, parse_mac
from plant.safety import SafetyEnvelope
from shared.errors import ParseError, PathUnresolved, ScenarioError, ScenarioValidationError, WireError
from shared.settings import BUILTINS_DIR
from wire.paths import FieldPath
from wire.schemas import ACTION_GOAL, TWIST, UR_JOINT_NAMES, builtin_schemas
from wire.text import from_jsonable


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HostSpec(_Model):
    name: str
    ip: str
    mac: str

    @field_validator("ip")
    @classmethod
    def check_ip(cls, v: str) -> str:
        parse_ip(v)
        return v

    @field_validator("mac")
    @classmethod
    def check_mac(cls, v: str) -> str:
        parse_mac(v)
        return v


class TopicSpec(_Model):
    name: str
    type: str
    publisher: str
    subscriber: str
    rate_hz: float = Field(10.0, gt=0)
    port: int = Field(11411, gt=0, lt=65536)
    start_s: float = Field(0.032, ge=0)
    subscribe_at_s: float = Field(0.02, ge=0)
    once: bool = False

    @field_validator("name")
    @classmethod
    def check_name(cls, v: str) -> str:
        if not v.startswith("/"):
            raise ValueError("topic names begin with '/'")
        return v


class ConstantTwistProgram(_Model):
    kind: Literal["constant_twist"]
    topic: str
    twist: dict[str, Any]


class ArmGoalsProgram(_Model):
    kind: Literal["arm_goals"]
    topic: str
    joint: str = "shoulder_pan_joint"
    low: float = -math.pi / 2
    high: float = math.pi / 2
    time_from_start_s: float = Field(1.0, gt=0)
    start_delay_ms: float = Field(5.0, ge=0)
    avoid_exclusion_zone: bool = True


ProgramSpec = Annotated[Union[ConstantTwistProgram, ArmGoalsProgram], Field(discriminator="kind")]


class PlantSpec(_Model):
    kind: Literal["drive", "arm"]
    topic: str
    dt_s: float = Field(0.01, gt=0)
    synchronized_start: bool = True
    command_timeout_s: Optional[float] = Field(None, gt=0)
    initial_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    initial_angles: list[float] = Field(default_factory=lambda: [0.0] * len(UR_JOINT_NAMES))


class NetworkSpec(_Model):
    latency_ms: float = Field(1.0, gt=0)
    arp_timeout_ms: float = Field(100.0, gt=0)


class AttackSpec(_Model):
    enabled: bool = True
    attacker: str
    victim_a: str
    victim_b: str
    target_topic: str
    rules: list[MutationRule] = []
    start_s: float = Field(0.0, ge=0)
    stop_s: Optional[float] = None
    scan_window_ms: float = Field(5.0, gt=0)


class AuthSpec(_Model):
    enabled: bool = False
    key: Optional[str] = None
    algorithm: Literal["hmac-sha256-64", "blake2b-64"] = "hmac-sha256-64"
    replay_protection: bool = False

    def config(self) -> AuthConfig:
        return AuthConfig(key=self.key, algorithm=self.algorithm, replay_protection=self.replay_protection)


class AnomalySpec(_Model):
    enabled: bool = False
    max_step: dict[str, float] = {}
    bounds: dict[str, tuple[float, float]] = {}

    def config(self) -> AnomalyConfig:
        return AnomalyConfig(max_step=self.max_step, bounds=self.bounds)


class GuardSpec(_Model):
    auth: AuthSpec = Field(default_factory=AuthSpec)
    anomaly: AnomalySpec = Field(default_factory=AnomalySpec)


class Scenario(_Model):
    name: str
    description: str = ""
    seed: int = 0
    duration_s: float = Field(gt=0)
    network: NetworkSpec = Field(default_factory=NetworkSpec)
    hosts: list[HostSpec]
    topics: list[TopicSpec]
    programs: list[ProgramSpec]
    plant: PlantSpec
    attack: Optional[AttackSpec] = None
    guards: GuardSpec = Field(default_factory=GuardSpec)
    envelope: SafetyEnvelope = Field(default_factory=SafetyEnvelope)

    @field_validator("name")
    @classmethod
    def check_name(cls, v: str) -> str:
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", v) or v in (".", ".."):
            raise ValueError("use letters, digits, '_', '.' or '-' (it names the output directory)")
        return v

    def host(self, name: str) -> HostSpec:
        return next(h for h in self.hosts if h.name == name)

    def topic(self, name: str) -> TopicSpec:
        return next(t for t in self.topics if t.name == name)

    def program_for(self, topic: str) -> Optional[ProgramSpec]:
        return next((p for p in self.programs if p.topic == topic), None)

    @property
    def attack_enabled(self) -> bool:
        return self.attack is not None and self.attack.enabled


# ──────────────────────────────────────────────
# Cross-reference checks
# ──────────────────────────────────────────────
_PROGRAM_TYPES = {"constant_twist": TWIST, "arm_goals": ACTION_GOAL}
_PLANT_TYPES = {"drive": TWIST, "arm": ACTION_GOAL}


def _unique(values: list[Any], field: str) -> None:
    seen: set[Any] = set()
    for v in values:
        if v in seen:
            raise ScenarioValidationError(field, f"duplicate value {v!r}")
        seen.add(v)


def _check_paths(paths: list[str], type_name: str, field: str) -> None:
    schema = builtin_schemas()[type_name]
    for text in paths:
        try:
            FieldPath.parse(text).check(schema)
        except PathUnresolved as exc:
            raise ScenarioValidationError(field, str(exc)) from None


def cross_check(s: Scenario) -> Scenario:
    hosts = {h.name for h in s.hosts}
    _unique([h.name for h in s.hosts], "hosts.name")
    _unique([parse_ip(h.ip) for h in s.hosts], "hosts.ip")
    _unique([parse_mac(h.mac) for h in s.hosts], "hosts.mac")
    _unique([t.name for t in s.topics], "topics.name")
    _unique([p.topic for p in s.programs], "programs.topic")
    _unique([(t.publisher, t.port) for t in s.topics], "topics.port")

    schemas = builtin_schemas()
    topics = {t.name: t for t in s.topics}
    for i, t in enumerate(s.topics):
        for role in ("publisher", "subscriber"):
            if getattr(t, role) not in hosts:
                raise ScenarioValidationError(f"topics.{i}.{role}", f"unknown host {getattr(t, role)!r}")
        if schemas.lookup(t.type) is None:
            raise ScenarioValidationError(f"topics.{i}.type", f"unknown message type {t.type!r}")
        if s.program_for(t.name) is None:
            raise ScenarioValidationError(f"topics.{i}.name", f"no program publishes {t.name}")

    for i, p in enumerate(s.programs):
        if p.topic not in topics:
            raise ScenarioValidationError(f"programs.{i}.topic", f"unknown topic {p.topic!r}")
        if topics[p.topic].type != _PROGRAM_TYPES[p.kind]:
            raise ScenarioValidationError(f"programs.{i}.kind", f"{p.kind} cannot publish {topics[p.topic].type}")
        if isinstance(p, ConstantTwistProgram):
            try:
                from_jsonable(schemas[TWIST], p.twist)
            except WireError as exc:
                raise ScenarioValidationError(f"programs.{i}.twist", str(exc)) from None
        elif p.joint not in UR_JOINT_NAMES:
            raise ScenarioValidationError(f"programs.{i}.joint", f"unknown joint {p.joint!r}")
        elif not p.low < p.high:
            raise ScenarioValidationError(f"programs.{i}.high", "low must be below high")

    plant = s.plant
    if plant.topic not in topics:
        raise ScenarioValidationError("plant.topic", f"unknown topic {plant.topic!r}")
    if topics[plant.topic].type != _PLANT_TYPES[plant.kind]:
        raise ScenarioValidationError("plant.kind", f"{plant.kind} plant cannot follow {topics[plant.topic].type}")
    if len(plant.initial_angles) != len(UR_JOINT_NAMES):
        raise ScenarioValidationError("plant.initial_angles", f"needs {len(UR_JOINT_NAMES)} values")
    zone = s.envelope.exclusion_zone
    if zone is not None:
        if plant.kind != "arm":
            raise ScenarioValidationError("envelope.exclusion_zone", "only applies to arm plants")
        if zone.joint not in UR_JOINT_NAMES:
            raise ScenarioValidationError("envelope.exclusion_zone.joint", f"unknown joint {zone.joint!r}")
        for p in s.programs:
            if (isinstance(p, ArmGoalsProgram) and p.avoid_exclusion_zone and p.joint == zone.joint
                    and zone.lo <= p.low and p.high <= zone.hi):
                raise ScenarioValidationError(
                    "envelope.exclusion_zone",
                    f"[{zone.lo}, {zone.hi}] covers the {p.topic} target range [{p.low}, {p.high}]",
                )

    a = s.attack
    if a is not None:
        for role in ("attacker", "victim_a", "victim_b"):
            if getattr(a, role) not in hosts:
                raise ScenarioValidationError(f"attack.{role}", f"unknown host {getattr(a, role)!r}")
        if len({a.attacker, a.victim_a, a.victim_b}) != 3:
            raise ScenarioValidationError("attack", "attacker and victims must be distinct hosts")
        if a.target_topic not in topics:
            raise ScenarioValidationError("attack.target_topic", f"unknown topic {a.target_topic!r}")
        if a.stop_s is not None and a.stop_s <= a.start_s:
            raise ScenarioValidationError("attack.stop_s", "must be after start_s")
        _check_paths([r.path for r in a.rules], topics[a.target_topic].type, "attack.rules")

    auth = s.guards.auth
    if auth.enabled:
        if not auth.key:
            raise ScenarioValidationError("guards.auth.key", "required when auth is enabled")
        try:
            auth.config()
        except ValidationError as exc:
            raise ScenarioValidationError("guards.auth.key", exc.errors()[0]["msg"]) from None
    anomaly = s.guards.anomaly
    try:
        anomaly.config()
    except ValidationError as exc:
        raise ScenarioValidationError("guards.anomaly", exc.errors()[0]["msg"]) from None
    _check_paths([*anomaly.max_step, *anomaly.bounds], topics[plant.topic].type, "guards.anomaly")
    return s


# ──────────────────────────────────────────────
# Loading
# ──────────────────────────────────────────────
def builtin_names() -> list[str]:
    return sorted(p.stem for p in BUILTINS_DIR.glob("*.json"))


def resolve_scenario_path(ref: str | Path) -> Path:
    """A scenario file path, or the name of a builtin."""
    path = Path(ref)
    if path.is_file():
        return path
    builtin = BUILTINS_DIR / f"{ref}.json"
    if builtin.is_file():
        return builtin
    raise ScenarioError(f"{ref}: no such scenario file or builtin ({', '.join(builtin_names())})")


def _field_of(exc: ValidationError) -> tuple[str, str]:
    err = exc.errors()[0]
    loc = ".".join(str(p) for p in err["loc"]) or "<root>"
    return loc, err["msg"]


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    try:
        scenario = Scenario.model_validate(doc)
    except ValidationError as exc:
        raise ScenarioValidationError(*_field_of(exc)) from None
    return cross_check(scenario)


def load_scenario(ref: str | Path) -> Scenario:
    path = resolve_scenario_path(ref)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return parse_scenario(text)


def with_overrides(
    s: Scenario,
    *,
    seed: Optional[int] = None,
    attack: Optional[bool] = None,
    auth: Optional[bool] = None,
    anomaly: Optional[bool] = None,
) -> Scenario:
    """Copy of *s* with CLI toggles applied, re-checked."""
    s = s.model_copy(deep=True)
    if seed is not None:
        s.seed = seed
    if attack is not None and s.attack is not None:
        s.attack.enabled = attack
    if auth is not None:
        s.guards.auth.enabled = auth
    if anomaly is not None:
        s.guards.anomaly.enabled = anomaly
    return cross_check(s)

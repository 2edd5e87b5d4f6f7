# plant/safety.py
"""
safety.py – compare the two twins' state series against a safety envelope.

Series are pandas frames sampled on the plant grid: ``t,x,y,theta`` for a drive
and ``t,j1..j6`` for an arm. Limits are checked on the physical (CPS) series;
divergence compares it with the DTS intent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from shared.errors import GridMismatch
from wire.schemas import UR_JOINT_NAMES

PlantKind = Literal["drive", "arm"]

DRIVE_COLUMNS = ("t", "x", "y", "theta")
ARM_COLUMNS = ("t", *(f"j{k + 1}" for k in range(len(UR_JOINT_NAMES))))


class Violation(str, enum.Enum):
    VELOCITY_LIMIT = "VelocityLimit"
    EXCLUSION_ZONE = "ExclusionZone"
    DIVERGENCE_LIMIT = "DivergenceLimit"


class ExclusionZone(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    joint: str
    lo: float
    hi: float

    @model_validator(mode="after")
    def check_interval(self) -> "ExclusionZone":
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise ValueError(f"exclusion zone needs finite lo < hi, got [{self.lo}, {self.hi}]")
        return self

    def contains(self, angle: float) -> bool:
        return self.lo <= angle <= self.hi


class SafetyEnvelope(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    v_max: Optional[float] = None           # m/s (drive) or rad/s per joint (arm)
    exclusion_zone: Optional[ExclusionZone] = None
    divergence_limit: Optional[float] = None

    @field_validator("v_max", "divergence_limit")
    @classmethod
    def check_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not (math.isfinite(v) and v > 0):
            raise ValueError("must be finite and > 0")
        return v


@dataclass
class SafetyReport:
    max_divergence: float
    first_violation_t: Optional[float]
    violation: Optional[Violation]
    divergence: pd.DataFrame                        # columns t, divergence
    violations: dict[Violation, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, object]:
        return {
            "max_divergence": self.max_divergence,
            "first_violation_t": self.first_violation_t,
            "violation": None if self.violation is None else self.violation.value,
            "violations": {k.value: t for k, t in self.violations.items()},
        }


def _check_grid(dts: pd.DataFrame, cps: pd.DataFrame) -> None:
    if len(dts) != len(cps):
        raise GridMismatch(f"series lengths differ: {len(dts)} vs {len(cps)}")
    if not np.array_equal(dts["t"].to_numpy(), cps["t"].to_numpy()):
        raise GridMismatch("series are not sampled on the same clock")


def divergence_series(dts: pd.DataFrame, cps: pd.DataFrame, kind: PlantKind) -> np.ndarray:
    if kind == "drive":
        return np.hypot(dts["x"].to_numpy() - cps["x"].to_numpy(), dts["y"].to_numpy() - cps["y"].to_numpy())
    cols = list(ARM_COLUMNS[1:])
    return np.abs(dts[cols].to_numpy() - cps[cols].to_numpy()).max(axis=1)


def speed_series(series: pd.DataFrame, kind: PlantKind) -> np.ndarray:
    """Finite-difference speed per sample (0 at the first sample)."""
    t = series["t"].to_numpy()
    dt = np.diff(t)
    if kind == "drive":
        step = np.hypot(np.diff(series["x"].to_numpy()), np.diff(series["y"].to_numpy()))
    else:
        step = np.abs(np.diff(series[list(ARM_COLUMNS[1:])].to_numpy(), axis=0)).max(axis=1)
    out = np.zeros(len(t))
    if len(t) > 1:
        out[1:] = step / dt
    return out


def _first(t: np.ndarray, mask: np.ndarray) -> Optional[float]:
    hits = np.flatnonzero(mask)
    return float(t[hits[0]]) if hits.size else None


def evaluate_safety(dts: pd.DataFrame, cps: pd.DataFrame, env: SafetyEnvelope,
                    kind: PlantKind = "drive",
                    joint_names: tuple[str, ...] = UR_JOINT_NAMES) -> SafetyReport:
    _check_grid(dts, cps)
    t = cps["t"].to_numpy()
    div = divergence_series(dts, cps, kind)

    found: dict[Violation, float] = {}
    if env.v_max is not None:
        hit = _first(t, speed_series(cps, kind) > env.v_max)
        if hit is not None:
            found[Violation.VELOCITY_LIMIT] = hit
    if env.exclusion_zone is not None and kind == "arm":
        zone = env.exclusion_zone
        column = f"j{joint_names.index(zone.joint) + 1}"
        angles = cps[column].to_numpy()
        hit = _first(t, (angles >= zone.lo) & (angles <= zone.hi))
        if hit is not None:
            found[Violation.EXCLUSION_ZONE] = hit
    if env.divergence_limit is not None:
        hit = _first(t, div > env.divergence_limit)
        if hit is not None:
            found[Violation.DIVERGENCE_LIMIT] = hit

    first = min(found.items(), key=lambda kv: kv[1], default=None)   # ties keep enum order
    return SafetyReport(
        max_divergence=float(div.max()) if div.size else 0.0,
        first_violation_t=None if first is None else first[1],
        violation=None if first is None else first[0],
        divergence=pd.DataFrame({"t": t, "divergence": div}),
        violations=found,
    )

from __future__ import annotations

import json
import math

import numpy as np
import pandas as pd
import pytest

from harness.metrics import FILES, METRICS_COLUMNS
from harness.runner import AUTH_NOTE, run_one, run_scenario
from harness.scenario import builtin_names, load_scenario, parse_scenario, with_overrides
from plant.safety import Violation
from shared.settings import BUILTINS_DIR
from wire.schemas import UR_JOINT_NAMES

PAN_COLUMN = f"j{UR_JOINT_NAMES.index('shoulder_pan_joint') + 1}"
FIRST_GOAL_START_S = 0.032 + 0.005


def _read_csv(path):
    return pd.read_csv(path, float_precision="round_trip")


# ─────────────────────────────────────────────────────────────────────────────
# Attacked builtins
# ─────────────────────────────────────────────────────────────────────────────

def test_turtlebot_hijack_diverges_by_five_metres(turtlebot):
    report = run_scenario(turtlebot)
    assert report.safety.max_divergence == pytest.approx(5.0, rel=0.01)
    assert report.safety.violation is Violation.VELOCITY_LIMIT
    assert report.safety.first_violation_t < 0.1
    assert report.attack["error"] is None
    assert report.msgs_mutated == 100
    assert report.cps_states["x"].iloc[-1] == pytest.approx(15.0, rel=0.01)
    assert report.dts_states["x"].iloc[-1] == pytest.approx(10.0)
    assert report.runtime_s < 1.0


def test_ur10_hijack_climbs_into_the_exclusion_zone(ur10, tmp_path):
    report = run_scenario(ur10, tmp_path)
    cps = _read_csv(tmp_path / "ur10_pitm" / FILES["cps_states"])

    moving = cps[cps["t"] > FIRST_GOAL_START_S]
    assert (np.diff(moving[PAN_COLUMN].to_numpy()) > 0).all()
    assert (cps.loc[cps["t"] <= FIRST_GOAL_START_S, PAN_COLUMN] == 0.0).all()

    zone = ur10.envelope.exclusion_zone
    inside = cps[(cps[PAN_COLUMN] >= zone.lo) & (cps[PAN_COLUMN] <= zone.hi)]
    assert report.safety.violation is Violation.EXCLUSION_ZONE
    assert report.safety.first_violation_t == pytest.approx(inside["t"].iloc[0], abs=1e-12)
    assert 5.0 < report.safety.first_violation_t < 6.0


def test_ur10_attacked_series_does_not_depend_on_seed(ur10):
    a = run_scenario(with_overrides(ur10, seed=1))
    b = run_scenario(with_overrides(ur10, seed=2))
    pd.testing.assert_frame_equal(a.cps_states, b.cps_states)
    assert not a.dts_states.equals(b.dts_states)


def test_non_target_traffic_is_relayed_untouched():
    doc = json.loads((BUILTINS_DIR / "turtlebot_pitm.json").read_text(encoding="utf-8"))
    doc["name"] = "mixed_topics"
    doc["topics"].append({"name": "/aux_cmd", "type": "geometry_msgs/Twist", "publisher": "dts",
                          "subscriber": "cps", "rate_hz": 50.0, "port": 11412})
    doc["programs"].append({"kind": "constant_twist", "topic": "/aux_cmd",
                            "twist": {"linear": {"x": 0.3}}})
    report = run_scenario(parse_scenario(json.dumps(doc)))

    assert report.attack["seen"] >= 500
    assert report.attack["forwarded"] == report.attack["seen"]
    assert report.attack["mutated"] == 100

    payloads = {r["id"]: r["payload"] for r in report.trace}
    relayed = [r for r in report.trace if "pitm" in r and r["pitm"]["class"] != "TargetMessage"]
    assert len(relayed) >= 500
    assert all(r["payload"] == payloads[r["parent"]] for r in relayed)


# ─────────────────────────────────────────────────────────────────────────────
# Baselines and guards
# ─────────────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("name", ["turtlebot", "ur10"])
def test_baseline_without_attack(name, request):
    s = with_overrides(request.getfixturevalue(name), attack=False)
    report = run_scenario(s)
    assert report.attack is None
    assert report.safety.max_divergence <= 1e-9
    assert report.safety.violation is None
    assert report.msgs_rejected == 0


def test_authentication_stops_the_hijack(turtlebot):
    report = run_scenario(with_overrides(turtlebot, auth=True))
    assert report.msgs_mutated > 0
    assert report.guard["rejected"] == {"BadTag": report.msgs_mutated}
    assert report.safety.max_divergence <= 1e-9
    assert AUTH_NOTE in report.notes()
    assert any("denial of service" in n for n in report.notes())


def test_step_filter_rejects_the_first_mutation(turtlebot):
    s = with_overrides(turtlebot, anomaly=True)
    s.guards.anomaly.bounds = {}
    report = run_scenario(s)
    assert report.guard["rejected"] == {"StepChange": report.msgs_mutated}
    assert report.guard["accepted"] == 0
    assert report.safety.max_divergence <= 1e-9


# ─────────────────────────────────────────────────────────────────────────────
# Outputs
# ─────────────────────────────────────────────────────────────────────────────

def test_outputs_are_written(turtlebot, tmp_path):
    report = run_scenario(turtlebot, tmp_path)
    out = tmp_path / "turtlebot_pitm"
    assert sorted(p.name for p in out.iterdir()) == sorted(FILES.values())

    metrics = _read_csv(out / FILES["metrics"])
    assert list(metrics.columns) == METRICS_COLUMNS
    row = metrics.iloc[0]
    assert row["violation_kind"] == "VelocityLimit"
    assert row["msgs_mutated"] == report.msgs_mutated

    data = json.loads((out / FILES["report"]).read_text(encoding="utf-8"))
    assert data["files"] == FILES
    assert "runtime_s" not in data
    assert len(_read_csv(out / FILES["divergence"])) == len(report.cps_states) == 1001


SHORT_DURATION_S = {"turtlebot_pitm": 3.0, "ur10_pitm": 8.0}


@pytest.mark.parametrize("guards", [{}, {"auth": True}, {"anomaly": True}], ids=["attack", "auth", "anomaly"])
@pytest.mark.parametrize("name", builtin_names())
def test_runs_are_byte_identical(name, guards, tmp_path):
    s = with_overrides(load_scenario(name), seed=5, **guards)
    s = s.model_copy(update={"duration_s": SHORT_DURATION_S.get(name, 3.0)})
    run_scenario(s, tmp_path / "a")
    run_scenario(s, tmp_path / "b")
    for fname in FILES.values():
        first = (tmp_path / "a" / s.name / fname).read_bytes()
        assert first == (tmp_path / "b" / s.name / fname).read_bytes(), fname


def test_run_one_reports_success_and_failure(tmp_path):
    ok = run_one("turtlebot_pitm", str(tmp_path), {"seed": 3, "attack": False})
    assert ok["ok"] and ok["exit"] == 0
    assert ok["row"]["seed"] == 3 and ok["row"]["msgs_seen"] == 0
    assert ok["out"] == str(tmp_path / "turtlebot_pitm")
    assert not math.isnan(ok["runtime_s"])

    missing = run_one("no_such_scenario", None, {})
    assert missing == {"ref": "no_such_scenario", "ok": False, "exit": 1, "error": missing["error"]}

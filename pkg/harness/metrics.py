# harness/metrics.py
"""
metrics.py – write a finished run to disk.

    <dir>/trace.jsonl        frame trace
    <dir>/dts_states.csv     DTS twin series
    <dir>/cps_states.csv     CPS twin series
    <dir>/divergence.csv     t,divergence
    <dir>/metrics.csv        one summary row
    <dir>/report.json        deterministic run report

Files are written with fixed line endings so identical runs give identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING

import pandas as pd

from shared.errors import OutputError

if TYPE_CHECKING:
    from harness.runner import RunReport

METRICS_COLUMNS = [
    "scenario",
    "seed",
    "duration_s",
    "msgs_seen",
    "msgs_mutated",
    "msgs_rejected",
    "max_divergence",
    "first_violation_t",
    "violation_kind",
]

FILES = {
    "trace": "trace.jsonl",
    "dts_states": "dts_states.csv",
    "cps_states": "cps_states.csv",
    "divergence": "divergence.csv",
    "metrics": "metrics.csv",
    "report": "report.json",
}


def metrics_row(report: "RunReport") -> dict[str, object]:
    safety = report.safety
    return {
        "scenario": report.scenario,
        "seed": report.seed,
        "duration_s": report.duration_s,
        "msgs_seen": report.msgs_seen,
        "msgs_mutated": report.msgs_mutated,
        "msgs_rejected": report.msgs_rejected,
        "max_divergence": safety.max_divergence,
        "first_violation_t": safety.first_violation_t,
        "violation_kind": "" if safety.violation is None else safety.violation.value,
    }


def _csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, lineterminator="\n", na_rep="")


def emit_metrics(report: "RunReport", out_dir: Path) -> dict[str, Path]:
    """Write every output file of *report* into *out_dir*; ``OutputError`` on I/O failure."""
    paths = {key: out_dir / name for key, name in FILES.items()}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        report.trace.write_jsonl(paths["trace"])
        _csv(report.dts_states, paths["dts_states"])
        _csv(report.cps_states, paths["cps_states"])
        _csv(report.safety.divergence, paths["divergence"])
        _csv(pd.DataFrame([metrics_row(report)], columns=METRICS_COLUMNS), paths["metrics"])
        report.files = {key: name for key, name in FILES.items()}
        paths["report"].write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write results to {out_dir}: {exc}") from exc
    return paths

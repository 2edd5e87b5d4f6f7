#!/usr/bin/env python3
"""shared/logger_utils.py – structured JSON-lines logging for simulation runs

Example
~~~~~~~
```python
from shared.logger_utils import setup_run_logger, log_event

log = setup_run_logger(                     # all args optional
    name="twinsec.run",                     # logger name
    log_file_path="/var/log/twinsec.jsonl", # default: logs/twinsec_run.jsonl
    max_mb=25,                              # rotate when file >25 MiB (default 10)
    backup_cnt=14,                          # keep 14 backups (default 5)
)
log_event(log, "arp_poison", t_ns=6_000_000, victim="cps")
```

Library modules never call the factory; they use
``logging.getLogger("twinsec.<package>")`` and inherit whatever the CLI set up.
"""
from __future__ import annotations

import json
import logging
import os
import sys
import time
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Optional

__all__ = [
    "setup_run_logger",
    "log_event",
    "log_run",
]

# ─────────────────────────────────────────────────────────────────────────────
# Logger factory
# ─────────────────────────────────────────────────────────────────────────────


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is when the record is emitted."""

    def emit(self, record: logging.LogRecord) -> None:
        self.stream = sys.stderr
        super().emit(record)


def _json_formatter() -> logging.Formatter:
    return logging.Formatter("%(message)s")


def setup_run_logger(
    name: str = "twinsec.run",
    *,
    log_file_path: Optional[str] = None,
    level: str | int = logging.INFO,
    max_mb: int = 10,
    backup_cnt: int = 5,
) -> logging.Logger:
    """Configure the ``twinsec`` hierarchy and return logger *name*.

    Every ``twinsec.*`` record goes to stderr; records of *name* are also
    appended to *log_file_path* (default ``logs/<name>.jsonl``), rotated at
    *max_mb* MiB with *backup_cnt* old files kept. Safe to call repeatedly:
    the stderr handler is added once, and the file handler is replaced only
    when the path changes.
    """
    family = logging.getLogger("twinsec")
    family.setLevel(level)
    if not any(isinstance(h, _StderrHandler) for h in family.handlers):
        stderr = _StderrHandler(sys.stderr)
        stderr.setFormatter(_json_formatter())
        family.addHandler(stderr)

    log = logging.getLogger(name)
    target = os.path.abspath(Path(log_file_path or f"logs/{name.replace('.', '_')}.jsonl").expanduser())
    for old in [h for h in log.handlers if isinstance(h, RotatingFileHandler)]:
        if old.baseFilename == target:
            return log
        log.removeHandler(old)
        old.close()

    Path(target).parent.mkdir(parents=True, exist_ok=True)
    to_file = RotatingFileHandler(target, maxBytes=max_mb << 20, backupCount=backup_cnt, encoding="utf-8")
    to_file.setFormatter(_json_formatter())
    log.addHandler(to_file)
    return log


# ─────────────────────────────────────────────────────────────────────────────
# Structured-log emitters (shared schema)
# ─────────────────────────────────────────────────────────────────────────────


def log_event(
    log: logging.Logger,
    event: str,
    *,
    t_ns: Optional[int] = None,
    level: int = logging.INFO,
    **fields: Any,
) -> None:
    """Emit one JSON line ``{"event": …, "t_sim_ns": …, **fields}``."""
    if not log.isEnabledFor(level):
        return
    record: dict[str, Any] = {"event": event}
    if t_ns is not None:
        record["t_sim_ns"] = t_ns
    record.update(fields)
    log.log(level, json.dumps(record, separators=(",", ":"), default=str))


def log_run(
    log: logging.Logger,
    *,
    scenario: str,
    seed: int,
    t_in: int,
    t_built: int,
    t_simulated: int,
    t_written: int,
    counters: dict[str, Any],
) -> None:
    """Emit one JSON line with the wall-clock phase timings of a run."""
    t_out = time.time_ns()
    log.info(
        json.dumps(
            {
                "event": "run",
                "scenario": scenario,
                "seed": seed,
                "t_in": t_in,
                "t_out": t_out,
                "build_ns": t_built - t_in,
                "simulate_ns": t_simulated - t_built,
                "write_ns": t_written - t_simulated,
                "app_ns": t_out - t_in,
                **counters,
            },
            separators=(",", ":"),
            default=str,
        )
    )

from __future__ import annotations

import json
import logging
from logging.handlers import RotatingFileHandler

from shared.logger_utils import log_event, log_run, setup_run_logger


def _file_handlers(log):
    return [h for h in log.handlers if isinstance(h, RotatingFileHandler)]


def test_events_are_json_lines(tmp_path):
    path = tmp_path / "run.jsonl"
    log = setup_run_logger("twinsec.test_events", log_file_path=str(path), level="INFO")
    log_event(log, "arp_poison", t_ns=6_000_000, victim="cps")
    log_event(log, "per_frame", level=logging.DEBUG, frame=1)
    log_run(log, scenario="s", seed=0, t_in=0, t_built=1, t_simulated=3, t_written=6,
            counters={"msgs_seen": 2})
    for h in _file_handlers(log):
        h.flush()

    lines = [json.loads(ln) for ln in path.read_text(encoding="utf-8").splitlines()]
    assert lines[0] == {"event": "arp_poison", "t_sim_ns": 6_000_000, "victim": "cps"}
    assert len(lines) == 2
    assert lines[1]["event"] == "run"
    assert (lines[1]["build_ns"], lines[1]["simulate_ns"], lines[1]["write_ns"]) == (1, 2, 3)
    assert lines[1]["msgs_seen"] == 2


def test_setup_is_idempotent_and_follows_the_path(tmp_path):
    name = "twinsec.test_setup"
    log = setup_run_logger(name, log_file_path=str(tmp_path / "a.jsonl"))
    setup_run_logger(name, log_file_path=str(tmp_path / "a.jsonl"))
    assert len(_file_handlers(log)) == 1
    setup_run_logger(name, log_file_path=str(tmp_path / "b.jsonl"))
    (handler,) = _file_handlers(log)
    assert handler.baseFilename == str(tmp_path / "b.jsonl")
    family = logging.getLogger("twinsec")
    assert sum(type(h).__name__ == "_StderrHandler" for h in family.handlers) == 1


def test_level_applies_to_the_hierarchy(tmp_path):
    setup_run_logger("twinsec.test_level", log_file_path=str(tmp_path / "l.jsonl"), level="DEBUG")
    assert logging.getLogger("twinsec.pubsub").isEnabledFor(logging.DEBUG)
    setup_run_logger("twinsec.test_level", log_file_path=str(tmp_path / "l.jsonl"), level="WARNING")
    assert not logging.getLogger("twinsec.pubsub").isEnabledFor(logging.INFO)

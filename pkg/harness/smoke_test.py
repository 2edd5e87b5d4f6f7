#!/usr/bin/env python3
"""smoke_test.py – quick “does it work?” script for the interception simulator.

• Runs every builtin scenario in four modes (baseline, attack, attack + auth,
  attack + anomaly filter), prints the headline numbers and how long each run
  took, and lists the output files with their sizes.
• Checks the few things that must always hold: a baseline never violates the
  envelope, the authenticated run never lets a mutated command through.

Usage
-----
$ python harness/smoke_test.py --out /tmp/twinsec-smoke
$ python harness/smoke_test.py --only turtlebot_pitm --seed 3
"""
from __future__ import annotations

import argparse
import json
import sys
import tempfile
import time
from pathlib import Path
from typing import Callable, Optional, Tuple

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from harness.runner import RunReport, run_scenario  # noqa: E402
from harness.scenario import builtin_names, load_scenario, with_overrides  # noqa: E402
from shared import settings  # noqa: E402
from shared.errors import TwinsecError  # noqa: E402
from shared.logger_utils import setup_run_logger  # noqa: E402

MODES = {
    "baseline": {"attack": False},
    "attack":   {"attack": True},
    "auth":     {"attack": True, "auth": True},
    "anomaly":  {"attack": True, "anomaly": True},
}

# ─────────────────────────────────────────────────────────────────────────────
# Helpers
# ─────────────────────────────────────────────────────────────────────────────

def timed(fn: Callable[[], object]) -> Tuple[object, float]:
    """Run *fn()* and return *(result, elapsed‑ms)*."""
    t0 = time.perf_counter()
    res = fn()
    return res, (time.perf_counter() - t0) * 1_000


def pretty(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def kb(n: int) -> str:
    if n < 1024:
        return f"{n} B"
    if n < 1024 * 1024:
        return f"{n/1024:.3f} KiB"
    return f"{n/1024/1024:.3f} MiB"


def check(cond: bool, what: str) -> None:
    if not cond:
        raise AssertionError(what)


# ─────────────────────────────────────────────────────────────────────────────
# Main test routine
# ─────────────────────────────────────────────────────────────────────────────

def run_mode(name: str, mode: str, out: Path, seed: Optional[int]) -> RunReport:
    s = with_overrides(load_scenario(name), seed=seed, **MODES[mode])
    s.name = f"{s.name}-{mode}"
    report, ms = timed(lambda: run_scenario(s, out))
    safety = report.safety
    violation = safety.violation.value if safety.violation else "none"
    print(
        f"{name:<16} {mode:<9} – {ms:8.2f} ms – divergence {safety.max_divergence:.4f} – "
        f"violation {violation} – seen {report.msgs_seen} mutated {report.msgs_mutated} "
        f"rejected {report.msgs_rejected}"
    )

    if mode == "baseline":
        check(safety.violation is None, f"{name}: baseline violated {violation}")
    if mode == "auth":
        check(report.msgs_rejected == report.msgs_mutated,
              f"{name}: {report.msgs_mutated} mutated but {report.msgs_rejected} rejected")
    return report


def run_tests(names: list[str], out: Path, seed: Optional[int]) -> None:
    print(f"Writing results under {out} …\n")
    last: Optional[RunReport] = None
    for name in names:
        for mode in MODES:
            last = run_mode(name, mode, out, seed)
        print()

    if last is not None:
        run_dir = out / last.scenario
        for fname in sorted(last.files.values()):
            print(f"  {fname:<16} {kb((run_dir / fname).stat().st_size)}")
        print(f"\nreport.json of {last.scenario}:\n{pretty(last.to_json()['safety'])}\n")

    print("All scenarios ran ✔")


# ─────────────────────────────────────────────────────────────────────────────
if __name__ == "__main__":
    pa = argparse.ArgumentParser(description="Smoke-test every builtin scenario")
    pa.add_argument("--out", default=None, help="results directory (default: a temp dir)")
    pa.add_argument("--only", action="append", default=None, help="builtin name (repeatable)")
    pa.add_argument("--seed", type=int, default=None, help="override every scenario seed")
    args = pa.parse_args()

    setup_run_logger(log_file_path=settings.LOG_FILE, level="WARNING")
    out = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="twinsec-smoke-"))
    try:
        run_tests(args.only or builtin_names(), out, args.seed)
    except (TwinsecError, OSError) as e:
        print(f"❌ Run error: {e}")
        sys.exit(1)
    except AssertionError as e:
        print(f"❌ Check failed: {e}")
        sys.exit(1)

# shared/settings.py
"""
settings.py – environment-driven defaults shared by the CLI, runner and smoke test.

Values come from the process environment, optionally seeded from a ``.env``
file in the working directory. CLI flags always win over these.
"""
from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# ──────────────────────────────────────────────
# Config – paths and levels
# ──────────────────────────────────────────────
BASE_DIR     = Path(__file__).resolve().parent.parent   # repo root
BUILTINS_DIR = BASE_DIR / "harness" / "builtins"

OUT_DIR   = os.getenv("TWINSEC_OUT", "runs")
LOG_FILE  = os.getenv("TWINSEC_LOG", "logs/twinsec_run.jsonl")
LOG_LEVEL = os.getenv("TWINSEC_LOG_LEVEL", "INFO").upper()

#!/usr/bin/env python3
"""cli.py – command-line entry point for the twin-to-plant interception simulator.

Usage
-----
$ python harness/cli.py run turtlebot_pitm                     # builtin, attack on
$ python harness/cli.py run ur10_pitm --seed 3 --auth          # HMAC guard on
$ python harness/cli.py run my_scenario.json --no-attack --out /tmp/runs
$ python harness/cli.py run turtlebot_pitm ur10_pitm --jobs 2  # batch
$ python harness/cli.py inspect runs/turtlebot_pitm/trace.jsonl
$ python harness/cli.py codec --schema geometry_msgs/Twist --hex "30000000 000000000000f03f ..."
$ python harness/cli.py list-builtins

Exit status: 0 ok, 1 invalid input (scenario, arguments), 2 runtime failure.
Results go to ``--out`` (default: ``$TWINSEC_OUT`` or ``runs``).
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, NoReturn, Optional

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from harness.inspect_trace import inspect_trace  # noqa: E402
from harness.runner import run_one  # noqa: E402
from harness.scenario import builtin_names, load_scenario  # noqa: E402
from shared import settings  # noqa: E402
from shared.errors import ScenarioError, TwinsecError  # noqa: E402
from shared.logger_utils import setup_run_logger  # noqa: E402
from wire.codec import decode_message  # noqa: E402
from wire.schemas import builtin_schemas  # noqa: E402
from wire.text import render_tree  # noqa: E402

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _ArgParser(argparse.ArgumentParser):
    """argparse with exit status 1 for usage errors."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"❌ {message}\n")


def _hex_bytes(text: str) -> bytes:
    cleaned = "".join(text.split()).removeprefix("0x")
    try:
        return bytes.fromhex(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hex byte string: {text!r}") from None


# ─────────────────────────────────────────────────────────────────────────────
# Commands
# ─────────────────────────────────────────────────────────────────────────────

def _print_result(res: dict[str, Any]) -> None:
    if not res["ok"]:
        print(f"❌ {res['ref']}: {res['error']}", file=sys.stderr)
        return
    row = res["row"]
    violation = "none"
    if row["violation_kind"]:
        violation = f"{row['violation_kind']}@{row['first_violation_t']:.3f}s"
    print(
        f"✔ {row['scenario']}  seed={row['seed']}  max_divergence={row['max_divergence']:.6f}  "
        f"violation={violation}  seen={row['msgs_seen']} mutated={row['msgs_mutated']} "
        f"rejected={row['msgs_rejected']}  ({res['runtime_s']:.2f} s)"
    )
    for note in res["notes"]:
        print(f"   note: {note}")
    if res["out"]:
        print(f"   → {res['out']}")


def cmd_run(args: argparse.Namespace) -> int:
    setup_run_logger(log_file_path=settings.LOG_FILE, level=settings.LOG_LEVEL)
    overrides: dict[str, Any] = {"seed": args.seed}
    if args.no_attack:
        overrides["attack"] = False
    if args.auth:
        overrides["auth"] = True
    if args.anomaly:
        overrides["anomaly"] = True

    if args.jobs > 1 and len(args.scenarios) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(
                run_one,
                args.scenarios,
                [args.out] * len(args.scenarios),
                [overrides] * len(args.scenarios),
            ))
    else:
        results = [run_one(ref, args.out, overrides) for ref in args.scenarios]

    for res in results:
        _print_result(res)
    return max(res["exit"] for res in results)


def cmd_inspect(args: argparse.Namespace) -> int:
    n = inspect_trace(Path(args.trace), sys.stdout)
    print(f"{n} records", file=sys.stderr)
    return EXIT_OK


def cmd_codec(args: argparse.Namespace) -> int:
    schema = builtin_schemas().lookup(args.schema)
    if schema is None:
        raise ScenarioError(f"unknown schema {args.schema!r} (known: {', '.join(builtin_schemas())})")
    value = decode_message(schema, args.hex)
    print(schema.type_name)
    print(render_tree(schema, value, indent=1))
    return EXIT_OK


def cmd_list_builtins(args: argparse.Namespace) -> int:
    for name in builtin_names():
        s = load_scenario(name)
        print(f"{name:<20} {s.plant.kind:<6} {s.description}")
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# Entry point
# ─────────────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="twinsec", description="Simulate interception of DTS→CPS robot commands")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    run = sub.add_parser("run", help="run one or more scenarios")
    run.add_argument("scenarios", nargs="+", metavar="SCENARIO",
                     help="scenario JSON file or builtin name")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--out", default=settings.OUT_DIR,
                     help="results directory (default: %(default)s)")
    run.add_argument("--no-attack", action="store_true", help="disable the attack plan")
    run.add_argument("--auth", action="store_true", help="enable message authentication")
    run.add_argument("--anomaly", action="store_true", help="enable the anomaly filter")
    run.add_argument("--jobs", type=int, default=1,
                     help="worker processes for batch runs (default: %(default)s)")
    run.set_defaults(fn=cmd_run)

    ins = sub.add_parser("inspect", help="pretty-print a trace.jsonl")
    ins.add_argument("trace", help="path to trace.jsonl")
    ins.set_defaults(fn=cmd_inspect)

    codec = sub.add_parser("codec", help="decode one serialized message")
    codec.add_argument("--schema", required=True, help="message type, e.g. geometry_msgs/Twist")
    codec.add_argument("--hex", required=True, type=_hex_bytes,
                       help="length prefix + body as hex (whitespace ignored)")
    codec.set_defaults(fn=cmd_codec)

    lb = sub.add_parser("list-builtins", help="list the bundled scenarios")
    lb.set_defaults(fn=cmd_list_builtins)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("❌ --jobs must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.fn(args)
    except ScenarioError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INVALID
    except (TwinsecError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

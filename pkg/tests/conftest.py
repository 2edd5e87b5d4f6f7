from __future__ import annotations

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from harness.scenario import load_scenario  # noqa: E402
from netsim.addresses import parse_ip, parse_mac  # noqa: E402
from netsim.lan import Lan  # noqa: E402
from wire.schemas import ACTION_GOAL, TWIST, builtin_schemas  # noqa: E402

HOSTS = {
    "dts": ("10.0.0.10", "02:00:00:00:00:10"),
    "cps": ("10.0.0.20", "02:00:00:00:00:20"),
    "attacker": ("10.0.0.66", "02:00:00:00:00:66"),
}


@pytest.fixture
def make_lan():
    """Factory for a LAN holding the named hosts (default: dts, cps, attacker)."""
    def build(*names: str) -> Lan:
        lan = Lan()
        for name in names or tuple(HOSTS):
            ip, mac = HOSTS[name]
            lan.add_host(name, parse_ip(ip), parse_mac(mac))
        return lan
    return build


@pytest.fixture
def schemas():
    return builtin_schemas()


@pytest.fixture
def twist_schema(schemas):
    return schemas[TWIST]


@pytest.fixture
def goal_schema(schemas):
    return schemas[ACTION_GOAL]


@pytest.fixture
def turtlebot():
    return load_scenario("turtlebot_pitm")


@pytest.fixture
def ur10():
    return load_scenario("ur10_pitm")

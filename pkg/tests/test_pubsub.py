from __future__ import annotations

import pytest

from guard.anomaly import AnomalyConfig, AnomalyDetector
from guard.auth import AuthConfig
from netsim.events import NS_PER_MS
from pubsub.master import Master, register_publisher
from pubsub.nodes import ConnState, PublisherNode, SubscriberNode, publish, subscribe
from shared.errors import DuplicateTopic, NotEstablished, PubSubError, TypeMismatch, UnknownSchema, UnknownTopic
from tests.helpers import twist
from wire.header import decode_header
from wire.schemas import ACTION_GOAL, TWIST

KEY = AuthConfig(key="00112233445566778899aabbccddeeff")


def _pair(make_lan, **sub_kwargs):
    lan = make_lan("dts", "cps")
    master = Master()
    pub = PublisherNode(lan.host("dts"), master, "/cmd_vel", TWIST, auth=sub_kwargs.pop("pub_auth", None))
    got: list[dict] = []
    sub = SubscriberNode(lan.host("cps"), master, lambda v, c: got.append(v), **sub_kwargs)
    return lan, master, pub, sub, got


# ─────────────────────────────────────────────────────────────────────────────
# Master
# ─────────────────────────────────────────────────────────────────────────────

def test_master_registry(make_lan):
    lan = make_lan("dts")
    master = Master()
    rec = register_publisher(master, lan.host("dts").id, "/cmd_vel", TWIST, 11411)
    assert master.require("/cmd_vel") == rec
    assert master.schema_of("/cmd_vel").type_name == TWIST
    assert master.lookup("/other") is None
    with pytest.raises(DuplicateTopic):
        master.register_publisher(lan.host("dts").id, "/cmd_vel", TWIST, 11412)
    with pytest.raises(UnknownTopic):
        master.require("/other")
    with pytest.raises(UnknownSchema):
        master.register_publisher(lan.host("dts").id, "/x", "foo/Bar", 11413)
    assert [r.topic for r in master.topics()] == ["/cmd_vel"]


# ─────────────────────────────────────────────────────────────────────────────
# Handshake and delivery
# ─────────────────────────────────────────────────────────────────────────────

def test_handshake_then_messages_in_order(make_lan):
    lan, _, pub, sub, got = _pair(make_lan)
    conn = sub.subscribe("/cmd_vel")
    lan.sim.run()
    assert conn.state is ConnState.ESTABLISHED
    assert conn.ready.result() is conn
    assert pub.connections[0].peer_header.get("callerid") == "/cps"

    for vx in (0.1, 0.2, 0.3):
        assert pub.publish(twist(vx)) == 1
    lan.sim.run()
    assert [m["linear"]["x"] for m in got] == [0.1, 0.2, 0.3]
    assert sub.received == sub.accepted == 3


def test_subscriber_speaks_first(make_lan):
    lan, _, pub, sub, _ = _pair(make_lan)
    sub.subscribe("/cmd_vel")
    lan.sim.run()
    streams = [r for r in lan.trace if r["kind"] == "Stream"]
    first = decode_header(bytes.fromhex(streams[0]["payload"]))
    second = decode_header(bytes.fromhex(streams[1]["payload"]))
    assert streams[0]["to"] == "dts"
    assert first.get("topic") == "/cmd_vel" and first.get("type") == TWIST
    assert second.get("callerid") == "/dts" and second.get("md5sum") == pub.schema.md5sum


def test_wildcard_subscription_is_accepted(make_lan):
    lan, _, pub, sub, got = _pair(make_lan)
    conn = sub.subscribe("/cmd_vel", type_name="*", md5sum="*")
    lan.sim.run()
    assert conn.state is ConnState.ESTABLISHED
    assert conn.peer_header.get("type") == TWIST
    pub.publish(twist(0.4))
    lan.sim.run()
    assert [m["linear"]["x"] for m in got] == [0.4]


def test_type_mismatch_closes_connection(make_lan):
    lan, _, pub, sub, got = _pair(make_lan)
    conn = sub.subscribe("/cmd_vel", type_name=ACTION_GOAL)
    lan.sim.run()
    assert conn.state is ConnState.CLOSED
    assert isinstance(conn.error, TypeMismatch)
    assert pub.connections == []
    assert pub.publish(twist(1.0)) == 0
    lan.sim.run()
    assert got == []


def test_md5_mismatch_closes_connection(make_lan):
    lan, _, _, sub, _ = _pair(make_lan)
    conn = sub.subscribe("/cmd_vel", md5sum="0" * 32)
    lan.sim.run()
    assert isinstance(conn.error, TypeMismatch)
    assert "md5sum" in str(conn.error)


def test_unknown_topic_subscription(make_lan):
    _, _, _, sub, _ = _pair(make_lan)
    with pytest.raises(UnknownTopic):
        sub.subscribe("/nope")


def test_publish_requires_established(make_lan):
    lan, _, pub, sub, _ = _pair(make_lan)
    conn = sub.subscribe("/cmd_vel")
    with pytest.raises(NotEstablished):
        publish(conn, twist(1.0))
    lan.sim.run()
    with pytest.raises(PubSubError):
        publish(conn, twist(1.0))           # subscriber-side endpoint
    publish(pub.connections[0], twist(1.0))
    assert pub.sent == 1


def test_subscribe_helper(make_lan):
    lan = make_lan("dts", "cps")
    master = Master()
    pub = PublisherNode(lan.host("dts"), master, "/cmd_vel", TWIST)
    got: list[float] = []
    conn = subscribe(master, lan.host("cps"), "/cmd_vel", lambda v, c: got.append(v["linear"]["x"]))
    lan.sim.run()
    pub.publish(twist(0.7))
    lan.sim.run()
    assert conn.state is ConnState.ESTABLISHED
    assert got == [0.7]


def test_malformed_message_is_counted(make_lan):
    lan, _, pub, sub, got = _pair(make_lan)
    sub.subscribe("/cmd_vel")
    lan.sim.run()
    c = pub.connections[0]
    lan.host("dts").send_stream(c.sub_host.ip, c.pub_port, c.sub_port, b"\x05\x00\x00\x00abc")
    lan.sim.run()
    assert sub.rejected["Malformed"] == 1
    assert got == []


# ─────────────────────────────────────────────────────────────────────────────
# Guards on the subscriber
# ─────────────────────────────────────────────────────────────────────────────

def test_authenticated_channel(make_lan):
    lan, _, pub, sub, got = _pair(make_lan, pub_auth=KEY, auth=KEY)
    sub.subscribe("/cmd_vel")
    lan.sim.run()
    pub.publish(twist(1.0))
    lan.sim.run()
    assert [m["linear"]["x"] for m in got] == [1.0]


def test_untagged_publisher_is_rejected(make_lan):
    lan, _, pub, sub, got = _pair(make_lan, auth=KEY)
    sub.subscribe("/cmd_vel")
    lan.sim.run()
    pub.publish(twist(1.0))
    lan.sim.run()
    assert got == []
    assert sub.rejected_total == 1


def test_replay_protection_counts_per_connection(make_lan):
    cfg = AuthConfig(key="0102", replay_protection=True)
    lan, _, pub, sub, got = _pair(make_lan, pub_auth=cfg, auth=cfg)
    sub.subscribe("/cmd_vel")
    lan.sim.run()
    for vx in (0.1, 0.2):
        pub.publish(twist(vx))
    lan.sim.run()
    assert len(got) == 2
    assert pub.connections[0].seq == sub.connections[0].seq == 2


def test_anomaly_filter_holds_previous(make_lan):
    detector = AnomalyDetector(AnomalyConfig(max_step={"linear.x": 0.2}), prev=twist(1.0))
    lan, _, pub, sub, got = _pair(make_lan, anomaly=detector)
    sub.subscribe("/cmd_vel")
    lan.sim.run()
    for vx in (1.1, 1.5, 1.2):
        pub.publish(twist(vx))
        lan.sim.run(until=lan.sim.now + 5 * NS_PER_MS)
    assert [m["linear"]["x"] for m in got] == [1.1, 1.2]
    assert sub.rejected == {"StepChange": 1}

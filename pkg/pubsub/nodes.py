# pubsub/nodes.py
"""
nodes.py – publisher and subscriber nodes over netsim streams.

Handshake (subscriber speaks first, as in TCPROS)::

    sub → pub   header{callerid, topic, type, md5sum}
    pub → sub   header{callerid, topic, type, md5sum}   or header{callerid, error}
    pub → sub   message, message, …

Every Stream frame carries exactly one unit (a header or one length-prefixed
message, plus an authentication tag when the channel is authenticated).
"""
from __future__ import annotations

import enum
import logging
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Optional

from guard.anomaly import AnomalyDetector
from guard.auth import AuthConfig, tag_message, verify_message
from guard.verdict import Verdict
from netsim.addresses import HostId
from netsim.events import SimFuture
from netsim.frames import Frame
from netsim.lan import Host
from pubsub.master import Master
from shared.errors import NotEstablished, PubSubError, TypeMismatch, WireError
from shared.logger_utils import log_event
from wire.codec import decode_message, encode_message
from wire.header import ConnectionHeader, decode_header, encode_header
from wire.kinds import MessageSchema

log = logging.getLogger("twinsec.pubsub")

OnMessage = Callable[[dict[str, Any], "Connection"], None]

ANY_TYPE = "*"


class ConnState(str, enum.Enum):
    HANDSHAKE_SENT = "HandshakeSent"
    ESTABLISHED = "Established"
    CLOSED = "Closed"


@dataclass(eq=False)
class Connection:
    """One endpoint's view of a publisher→subscriber link."""

    topic: str
    schema: MessageSchema
    pub_host: HostId
    sub_host: HostId
    pub_port: int
    sub_port: int
    outbound: bool                      # True on the publisher side
    state: ConnState = ConnState.HANDSHAKE_SENT
    error: Optional[PubSubError] = None
    peer_header: Optional[ConnectionHeader] = None
    seq: int = 0
    ready: SimFuture["Connection"] = field(default_factory=SimFuture)
    owner: Optional["PublisherNode"] = None

    def establish(self, peer_header: ConnectionHeader) -> None:
        self.peer_header = peer_header
        self.state = ConnState.ESTABLISHED
        self.ready.set_result(self)

    def close(self, error: Optional[PubSubError] = None) -> None:
        self.state = ConnState.CLOSED
        self.error = error
        if error is not None:
            self.ready.set_exception(error)


class Node:
    def __init__(self, host: Host, master: Master, *, name: Optional[str] = None,
                 auth: Optional[AuthConfig] = None):
        self.host = host
        self.master = master
        self.name = name or f"/{host.name}"
        self.auth = auth

    @property
    def now(self) -> int:
        return self.host.lan.sim.now


# ──────────────────────────────────────────────
# Publisher
# ──────────────────────────────────────────────
class PublisherNode(Node):
    def __init__(self, host: Host, master: Master, topic: str, type_name: str, *,
                 port: int = 11411, name: Optional[str] = None,
                 auth: Optional[AuthConfig] = None):
        super().__init__(host, master, name=name, auth=auth)
        self.record = master.register_publisher(host.id, topic, type_name, port)
        self.schema = master.schemas[type_name]
        self.connections: list[Connection] = []
        self._peers: dict[tuple[int, int], Connection] = {}
        self.sent = 0
        host.bind(port, self._on_unit)

    @property
    def topic(self) -> str:
        return self.record.topic

    def _reply(self, frame: Frame, header: ConnectionHeader) -> None:
        self.host.send_stream(frame.src_ip, frame.dst_port, frame.src_port, encode_header(header))

    def _on_unit(self, frame: Frame) -> None:
        peer = (frame.src_ip, frame.src_port)
        if peer in self._peers:
            # subscribers send nothing after their header
            return
        try:
            header = decode_header(frame.payload)
        except WireError as exc:
            log_event(log, "handshake_malformed", t_ns=self.now, node=self.name, error=str(exc))
            return
        problem = self._check(header)
        if problem is not None:
            log_event(log, "handshake_refused", t_ns=self.now, node=self.name,
                      topic=self.topic, reason=problem, level=logging.WARNING)
            self._reply(frame, ConnectionHeader.of(callerid=self.name, error=problem))
            return
        sub_ip = frame.src_ip
        conn = Connection(
            topic=self.topic,
            schema=self.schema,
            pub_host=self.host.id,
            sub_host=_host_id_for(self.host, sub_ip, header.get("callerid") or ""),
            pub_port=frame.dst_port,
            sub_port=frame.src_port,
            outbound=True,
            owner=self,
        )
        self._peers[peer] = conn
        self.connections.append(conn)
        self._reply(frame, ConnectionHeader.of(
            callerid=self.name, topic=self.topic,
            type=self.schema.type_name, md5sum=self.schema.md5sum,
        ))
        conn.establish(header)
        log_event(log, "connection_established", t_ns=self.now, topic=self.topic,
                  publisher=self.name, subscriber=header.get("callerid"))

    def _check(self, header: ConnectionHeader) -> Optional[str]:
        missing = header.missing()
        if missing:
            return f"header missing {', '.join(missing)}"
        if header.get("topic") != self.topic:
            return f"not publishing {header.get('topic')}"
        if header.get("type") not in (self.schema.type_name, ANY_TYPE):
            return f"type {header.get('type')} != {self.schema.type_name}"
        if header.get("md5sum") not in (self.schema.md5sum, ANY_TYPE):
            return f"md5sum {header.get('md5sum')} != {self.schema.md5sum}"
        return None

    def publish(self, value: dict[str, Any]) -> int:
        """Send *value* on every established connection; return how many."""
        n = 0
        for conn in self.connections:
            if conn.state is ConnState.ESTABLISHED:
                publish(conn, value)
                n += 1
        return n


def _host_id_for(host: Host, ip: int, callerid: str) -> HostId:
    peer = host.lan.host_at(ip)
    if peer is not None:
        return peer.id
    return HostId(callerid, ip, 0)


def publish(conn: Connection, value: dict[str, Any]) -> None:
    """Encode *value* and send it as one Stream frame to the subscriber."""
    if conn.state is not ConnState.ESTABLISHED:
        raise NotEstablished(f"{conn.topic}: connection is {conn.state.value}")
    if conn.owner is None or not conn.outbound:
        raise PubSubError(f"{conn.topic}: publish on a subscriber-side connection")
    payload = encode_message(conn.schema, value)
    node = conn.owner
    if node.auth is not None:
        payload = tag_message(node.auth, conn.topic, payload, conn.seq)
    conn.seq += 1
    node.sent += 1
    node.host.send_stream(conn.sub_host.ip, conn.pub_port, conn.sub_port, payload)


# ──────────────────────────────────────────────
# Subscriber
# ──────────────────────────────────────────────
class SubscriberNode(Node):
    def __init__(self, host: Host, master: Master, on_message: Optional[OnMessage] = None, *,
                 name: Optional[str] = None, auth: Optional[AuthConfig] = None,
                 anomaly: Optional[AnomalyDetector] = None):
        super().__init__(host, master, name=name, auth=auth)
        self.on_message = on_message
        self.anomaly = anomaly
        self.connections: list[Connection] = []
        self.received = 0
        self.accepted = 0
        self.rejected: Counter[str] = Counter()

    def subscribe(self, topic: str, *, type_name: Optional[str] = None,
                  md5sum: Optional[str] = None) -> Connection:
        record = self.master.require(topic)
        schema = self.master.schemas[record.type_name]
        port = self.host.ephemeral_port()
        conn = Connection(
            topic=topic,
            schema=schema,
            pub_host=record.publisher,
            sub_host=self.host.id,
            pub_port=record.port,
            sub_port=port,
            outbound=False,
        )
        expected = ConnectionHeader.of(
            callerid=self.name, topic=topic,
            type=type_name or schema.type_name,
            md5sum=md5sum or schema.md5sum,
        )
        self.host.bind(port, lambda frame: self._on_unit(conn, expected, frame))
        self.connections.append(conn)
        self.host.send_stream(record.publisher.ip, port, record.port, encode_header(expected))
        log_event(log, "subscribe", t_ns=self.now, node=self.name, topic=topic)
        return conn

    def _on_unit(self, conn: Connection, expected: ConnectionHeader, frame: Frame) -> None:
        if conn.state is ConnState.HANDSHAKE_SENT:
            self._on_handshake(conn, expected, frame.payload)
        elif conn.state is ConnState.ESTABLISHED:
            self._on_message(conn, frame.payload)

    def _on_handshake(self, conn: Connection, expected: ConnectionHeader, payload: bytes) -> None:
        try:
            header = decode_header(payload)
        except WireError as exc:
            self._fail(conn, PubSubError(f"{conn.topic}: bad handshake reply: {exc}"))
            return
        error = header.get("error")
        for key in ("md5sum", "type"):
            wanted = expected.get(key)
            if error is None and wanted != ANY_TYPE and header.get(key) != wanted:
                error = f"{key} {header.get(key)} != {wanted}"
        if error is not None:
            self._fail(conn, TypeMismatch(f"{conn.topic}: {error}"))
            return
        conn.establish(header)

    def _fail(self, conn: Connection, error: PubSubError) -> None:
        conn.close(error)
        self.host.unbind(conn.sub_port)
        log_event(log, "connection_closed", t_ns=self.now, node=self.name, topic=conn.topic,
                  error=type(error).__name__, detail=str(error), level=logging.WARNING)

    def _on_message(self, conn: Connection, payload: bytes) -> None:
        self.received += 1
        if self.auth is not None:
            verdict = verify_message(self.auth, conn.topic, payload, conn.seq)
            conn.seq += 1
            if not verdict.accepted:
                self._reject(conn, verdict)
                return
            payload = verdict.body
        try:
            value = decode_message(conn.schema, payload)
        except WireError as exc:
            self.rejected["Malformed"] += 1
            log_event(log, "message_malformed", t_ns=self.now, level=logging.DEBUG,
                      node=self.name, topic=conn.topic, error=str(exc))
            return
        if self.anomaly is not None:
            verdict = self.anomaly.check(value)
            if not verdict.accepted:
                self._reject(conn, verdict)
                return
        self.accepted += 1
        if self.on_message is not None:
            self.on_message(value, conn)

    def _reject(self, conn: Connection, verdict: Verdict) -> None:
        self.rejected[verdict.reason.value] += 1
        log_event(log, "message_rejected", t_ns=self.now, level=logging.DEBUG,
                  node=self.name, topic=conn.topic, reason=verdict.reason.value,
                  detail=verdict.detail)

    @property
    def rejected_total(self) -> int:
        return sum(self.rejected.values())


def subscribe(master: Master, sub_host: Host, topic: str, on_message: Optional[OnMessage] = None,
              **kwargs: Any) -> Connection:
    """Open a connection from a fresh subscriber node on *sub_host*."""
    return SubscriberNode(sub_host, master, on_message, **kwargs).subscribe(topic)

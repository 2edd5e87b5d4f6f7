# pubsub/master.py
"""
master.py – topic registry standing in for the ROS master.

Lookups are direct method calls, not networked RPC: only the data channel is
ever attacked, so master traffic is not simulated.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from shared.errors import DuplicateTopic, UnknownTopic
from shared.logger_utils import log_event
from netsim.addresses import HostId
from wire.kinds import MessageSchema
from wire.schemas import SchemaRegistry, builtin_schemas

log = logging.getLogger("twinsec.pubsub")


@dataclass(frozen=True)
class TopicRecord:
    topic: str
    type_name: str
    publisher: HostId
    port: int


class Master:
    def __init__(self, schemas: Optional[SchemaRegistry] = None):
        self.schemas = schemas or builtin_schemas()
        self._topics: dict[str, TopicRecord] = {}

    def register_publisher(self, host: HostId, topic: str, type_name: str, port: int) -> TopicRecord:
        if topic in self._topics:
            raise DuplicateTopic(f"{topic} already published by {self._topics[topic].publisher.name}")
        self.schemas[type_name]                      # UnknownSchema if unknown
        record = TopicRecord(topic, type_name, host, port)
        self._topics[topic] = record
        log_event(log, "topic_registered", topic=topic, type=type_name, publisher=host.name)
        return record

    def lookup(self, topic: str) -> Optional[TopicRecord]:
        return self._topics.get(topic)

    def require(self, topic: str) -> TopicRecord:
        record = self._topics.get(topic)
        if record is None:
            raise UnknownTopic(topic)
        return record

    def schema_of(self, topic: str) -> MessageSchema:
        return self.schemas[self.require(topic).type_name]

    def topics(self) -> list[TopicRecord]:
        return [self._topics[t] for t in sorted(self._topics)]


def register_publisher(master: Master, host: HostId, topic: str, type_name: str, port: int) -> TopicRecord:
    return master.register_publisher(host, topic, type_name, port)

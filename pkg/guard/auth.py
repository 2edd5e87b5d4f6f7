# guard/auth.py
"""
auth.py – authenticated pub/sub payloads.

Tagged payload layout::

    uint32 body_length | body | tag (8 bytes)

The tag is a keyed hash over ``topic ++ [seq] ++ length-prefixed message``.
This is integrity protection, not confidentiality: it stops a relay from
changing commands, it does not hide them.
"""
from __future__ import annotations

import hashlib
import hmac
import struct
from collections.abc import Callable
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, field_validator

from guard.verdict import RejectReason, Verdict
from wire.codec import split_message
from shared.errors import WireError

TAG_LEN = 8

_SEQ = struct.Struct("<Q")


def _hmac_sha256_64(key: bytes, data: bytes) -> bytes:
    return hmac.new(key, data, hashlib.sha256).digest()[:TAG_LEN]


def _blake2b_64(key: bytes, data: bytes) -> bytes:
    return hashlib.blake2b(data, key=key[:64], digest_size=TAG_LEN).digest()


TAG_FUNCTIONS: dict[str, Callable[[bytes, bytes], bytes]] = {
    "hmac-sha256-64": _hmac_sha256_64,
    "blake2b-64": _blake2b_64,
}


class AuthConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    key: bytes
    algorithm: Literal["hmac-sha256-64", "blake2b-64"] = "hmac-sha256-64"
    replay_protection: bool = False

    @field_validator("key", mode="before")
    @classmethod
    def parse_hex_key(cls, v: object) -> object:
        if isinstance(v, str):
            try:
                return bytes.fromhex(v)
            except ValueError:
                raise ValueError("key must be a hex string") from None
        return v

    @field_validator("key")
    @classmethod
    def check_non_empty(cls, v: bytes) -> bytes:
        if not v:
            raise ValueError("key must not be empty")
        return v


def compute_tag(cfg: AuthConfig, topic: str, body: bytes, seq: Optional[int] = None) -> bytes:
    data = topic.encode("utf-8")
    if cfg.replay_protection:
        data += _SEQ.pack(seq or 0)
    return TAG_FUNCTIONS[cfg.algorithm](cfg.key, data + bytes(body))


def tag_message(cfg: AuthConfig, topic: str, body: bytes, seq: Optional[int] = None) -> bytes:
    """Return ``body ++ tag``; *body* is the length-prefixed message."""
    return bytes(body) + compute_tag(cfg, topic, body, seq)


def verify_message(cfg: AuthConfig, topic: str, payload: bytes, seq: Optional[int] = None) -> Verdict:
    """Accept with the untagged body iff the trailer matches the recomputed tag."""
    payload = bytes(payload)
    if len(payload) < TAG_LEN:
        return Verdict.reject(RejectReason.TOO_SHORT, len(payload))
    body, tag = payload[:-TAG_LEN], payload[-TAG_LEN:]
    try:
        # the framing must line up: prefix covers the body only
        _, trailer = split_message(body)
    except WireError:
        trailer = b"\x00"
    if trailer:
        return Verdict.reject(RejectReason.BAD_TAG, "framing")
    if not hmac.compare_digest(tag, compute_tag(cfg, topic, body, seq)):
        return Verdict.reject(RejectReason.BAD_TAG)
    return Verdict.accept(body)

"""Hashing and signatures.

Ed25519 is used because its signatures are deterministic, which keeps
scenario traces reproducible when keys are derived from a seed. Digests are
SHA-256 over a canonical JSON encoding.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
from typing import Any

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)


def canonical(obj: Any) -> Any:
    """Convert nested dataclasses/enums/sets into a JSON-ready structure with a stable order."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: canonical(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return canonical(obj.value)
    if isinstance(obj, (bytes, bytearray)):
        return bytes(obj).hex()
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (set, frozenset)):
        items = [canonical(v) for v in obj]
        return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def encode(obj: Any) -> bytes:
    return json.dumps(canonical(obj), sort_keys=True, separators=(",", ":")).encode()


def digest(obj: Any) -> str:
    """Hex SHA-256 of the canonical encoding of ``obj``."""
    if isinstance(obj, (bytes, bytearray)):
        return hashlib.sha256(obj).hexdigest()
    return hashlib.sha256(encode(obj)).hexdigest()


def node_id_for(public_key: bytes) -> str:
    return "n" + hashlib.sha256(public_key).hexdigest()[:20]


class KeyPair:
    def __init__(self, private_key: Ed25519PrivateKey):
        self._sk = private_key
        self.public_key: bytes = private_key.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )
        self.node_id = node_id_for(self.public_key)

    @classmethod
    def from_seed(cls, seed: bytes | str) -> "KeyPair":
        if isinstance(seed, str):
            seed = seed.encode()
        return cls(Ed25519PrivateKey.from_private_bytes(hashlib.sha256(seed).digest()))

    def sign(self, message: Any) -> bytes:
        data = message if isinstance(message, bytes) else encode(message)
        return self._sk.sign(data)

    def __repr__(self) -> str:
        return f"KeyPair({self.node_id})"


def verify(public_key: bytes, message: Any, signature: bytes | None) -> bool:
    if not signature:
        return False
    data = message if isinstance(message, bytes) else encode(message)
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, data)
    except (InvalidSignature, ValueError):
        return False
    return True

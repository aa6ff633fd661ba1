from __future__ import annotations

import enum
from dataclasses import dataclass

from ..crypto import KeyPair, digest


class Role(enum.Enum):
    SP = "SP"
    SC = "SC"
    AA = "AA"
    DDS = "DDS"


@dataclass(frozen=True)
class NodeIdentity:
    node_id: str
    public_key: bytes
    roles: frozenset[Role]
    device_fingerprint: str
    name: str = ""


@dataclass(frozen=True)
class Node:
    """A participant: its public identity plus the signing key it keeps private."""

    identity: NodeIdentity
    keys: KeyPair

    @classmethod
    def create(
        cls, name: str, roles, seed: str, device: str | None = None, fingerprint: str | None = None
    ) -> "Node":
        keys = KeyPair.from_seed(seed)
        if fingerprint is None:
            fingerprint = device_fingerprint(device if device is not None else name)
        identity = NodeIdentity(keys.node_id, keys.public_key, frozenset(roles), fingerprint, name)
        return cls(identity, keys)

    @property
    def node_id(self) -> str:
        return self.identity.node_id

    @property
    def name(self) -> str:
        return self.identity.name or self.identity.node_id

    def has(self, role: Role) -> bool:
        return role in self.identity.roles

    def sign(self, message) -> bytes:
        return self.keys.sign(message)


def device_fingerprint(device: str, ownership: str = "") -> str:
    """Hash of the hardware specification and ownership record; survives key changes."""
    return digest({"hardware": device, "ownership": ownership})

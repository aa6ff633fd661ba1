"""Simulated main chain and attribute sidechains.

Chains are append-only logs with instant finality. The ``Ledger`` owns the
main chain, every sidechain, the key directory, account balances, the fee
escrow, attribute registrations and the active access policies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterator, Mapping, Sequence

from .abac import AccessPolicy, AccessToken, AttributeSet
from .crypto import digest, node_id_for, verify
from .trs import Outcome, ReputationParams, TrustParams


class LedgerError(Exception):
    pass


class SignatureError(LedgerError):
    pass


class DuplicateIdentity(LedgerError):
    pass


class DoubleEndorse(LedgerError):
    pass


class NotAuthority(LedgerError):
    pass


class NotEndorsed(LedgerError):
    pass


class AlreadySealed(LedgerError):
    pass


class NotOwner(LedgerError):
    pass


class NotFound(LedgerError):
    pass


class InsufficientBalance(LedgerError):
    pass


@dataclass(frozen=True, order=True)
class ChainId:
    """Index 0 is the main chain; sidechains are numbered densely from 1."""

    index: int

    @property
    def is_main(self) -> bool:
        return self.index == 0

    @property
    def label(self) -> str:
        return "MB" if self.index == 0 else f"pb{self.index}"

    def __str__(self) -> str:
        return self.label


MAIN = ChainId(0)


# -- transaction payloads ---------------------------------------------------


@dataclass(frozen=True)
class RegTx:
    attributes: AttributeSet
    device_fingerprint: str
    timestamp: int
    authority: str

    def sc_message(self) -> dict[str, Any]:
        return {
            "attributes": self.attributes,
            "device_fingerprint": self.device_fingerprint,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class Endorsement:
    reg_hash: str
    endorser: str
    signature: bytes


@dataclass(frozen=True)
class SealTx:
    attr_hash: str
    endorsements: tuple[Endorsement, ...]


@dataclass(frozen=True)
class PolicyTx:
    policy: AccessPolicy
    timestamp: int


@dataclass(frozen=True)
class AuthRequestTx:
    requester: str
    resource: str
    actions: frozenset


@dataclass(frozen=True)
class AttributeResponseTx:
    subject: str
    sidechain: int
    attributes: AttributeSet


@dataclass(frozen=True)
class DataEvidence:
    """Data served by a DDS, with the provider- and store-signed timestamps."""

    resource: str
    payload_digest: str
    last_update: int
    sp_signature: bytes
    token_id: str
    access_timestamp: int
    dds: str
    dds_signature: bytes

    def sp_message(self) -> dict[str, Any]:
        return {
            "resource": self.resource,
            "payload_digest": self.payload_digest,
            "last_update": self.last_update,
        }

    def dds_message(self) -> dict[str, Any]:
        return {
            "token_id": self.token_id,
            "payload_digest": self.payload_digest,
            "access_timestamp": self.access_timestamp,
        }


@dataclass(frozen=True)
class FeedbackTx:
    feedback: Outcome
    evidence: DataEvidence
    token_hash: str
    signer: str
    signature: bytes = b""

    def body(self) -> dict[str, Any]:
        return {
            "feedback": self.feedback,
            "evidence": self.evidence,
            "token_hash": self.token_hash,
            "signer": self.signer,
        }


@dataclass(frozen=True)
class Event:
    name: str
    data: Mapping[str, Any] = field(default_factory=dict)


PAYLOAD_KINDS = {
    RegTx: "RegTx",
    SealTx: "SealTx",
    PolicyTx: "PolicyTx",
    AuthRequestTx: "AuthRequestTx",
    AttributeResponseTx: "AttributeResponseTx",
    FeedbackTx: "FeedbackTx",
    Endorsement: "Endorsement",
    Event: "Event",
}


@dataclass(frozen=True)
class LedgerRecord:
    chain: ChainId
    seq: int
    round: int
    payload: Any
    signatures: tuple[tuple[str, bytes], ...] = ()

    @property
    def kind(self) -> str:
        return PAYLOAD_KINDS[type(self.payload)]

    @property
    def payload_digest(self) -> str:
        return digest(self.payload)

    def trace_line(self) -> dict[str, Any]:
        kind = self.kind
        if isinstance(self.payload, Event):
            kind = f"Event:{self.payload.name}"
        return {
            "chain": self.chain.label,
            "seq": self.seq,
            "round": self.round,
            "kind": kind,
            "digest": self.payload_digest,
        }


class Chain:
    def __init__(self, chain_id: ChainId, journal: list[LedgerRecord] | None = None):
        self.chain_id = chain_id
        self._records: list[LedgerRecord] = []
        self._journal = journal

    def append(
        self, round: int, payload: Any, signatures: Sequence[tuple[str, bytes]] = ()
    ) -> LedgerRecord:
        if type(payload) not in PAYLOAD_KINDS:
            raise TypeError(f"unsupported payload {type(payload).__name__}")
        if self._records and round < self._records[-1].round:
            raise LedgerError(f"{self.chain_id}: round {round} precedes the chain head")
        record = LedgerRecord(self.chain_id, len(self._records), round, payload, tuple(signatures))
        self._records.append(record)
        if self._journal is not None:
            self._journal.append(record)
        return record

    @property
    def records(self) -> tuple[LedgerRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[LedgerRecord]:
        return iter(tuple(self._records))


# -- registry state -----------------------------------------------------------


@dataclass(frozen=True)
class QuorumConfig:
    f: int
    online: int

    def __post_init__(self) -> None:
        if self.f < 0:
            raise ValueError("f must be >= 0")
        if self.online < 3 * self.f + 1:
            raise ValueError(f"need at least {3 * self.f + 1} online authorities, got {self.online}")

    @property
    def threshold(self) -> int:
        return 2 * self.f + 1


class RegistrationState(enum.Enum):
    PENDING = "Pending"
    ENDORSED = "Endorsed"
    SEALED = "Sealed"


@dataclass
class Registration:
    handle: int
    sidechain: ChainId
    tx: RegTx
    reg_hash: str
    state: RegistrationState = RegistrationState.PENDING
    endorsements: dict[str, Endorsement] = field(default_factory=dict)

    @property
    def owner(self) -> str:
        return self.tx.attributes.owner


@dataclass
class Sidechain:
    chain: Chain
    authorities: tuple[str, ...]
    quorum: QuorumConfig


@dataclass
class Escrow:
    token_hash: str
    sc: str
    sp: str
    amount: int
    released_to: str | None = None


class Ledger:
    def __init__(
        self,
        trust_params: TrustParams | None = None,
        reputation_params: ReputationParams | None = None,
    ):
        self.journal: list[LedgerRecord] = []
        self.main = Chain(MAIN, self.journal)
        self.sidechains: dict[int, Sidechain] = {}
        self.trust_params = trust_params
        self.reputation_params = reputation_params

        self._keys: dict[str, bytes] = {}
        self._balances: dict[str, int] = {}
        self.minted = 0
        self._escrow: dict[str, Escrow] = {}

        self._registrations: list[Registration] = []
        self._fingerprints: dict[str, int] = {}
        self._owners: dict[str, int] = {}

        self._policies: dict[str, AccessPolicy] = {}
        self._resource_owner: dict[str, str] = {}
        self._tokens: dict[str, AccessToken] = {}
        self._token_hashes: dict[str, str] = {}

    # -- keys -------------------------------------------------------------

    def register_key(self, public_key: bytes) -> str:
        node = node_id_for(public_key)
        self._keys[node] = public_key
        return node

    def public_key(self, node: str) -> bytes:
        try:
            return self._keys[node]
        except KeyError:
            raise SignatureError(f"no public key known for {node}") from None

    def check_signature(self, node: str, message: Any, signature: bytes | None) -> bool:
        key = self._keys.get(node)
        return key is not None and verify(key, message, signature)

    # -- topology ---------------------------------------------------------

    def add_sidechain(self, authorities: Sequence[str], f: int) -> ChainId:
        chain_id = ChainId(len(self.sidechains) + 1)
        quorum = QuorumConfig(f=f, online=len(set(authorities)))
        self.sidechains[chain_id.index] = Sidechain(
            Chain(chain_id, self.journal), tuple(authorities), quorum
        )
        return chain_id

    def sidechain(self, chain_id: ChainId) -> Sidechain:
        if chain_id.is_main or chain_id.index not in self.sidechains:
            raise LedgerError(f"{chain_id} is not a sidechain")
        return self.sidechains[chain_id.index]

    def chains(self) -> list[Chain]:
        return [self.main] + [self.sidechains[i].chain for i in sorted(self.sidechains)]

    # -- accounts ---------------------------------------------------------

    def mint(self, owner: str, amount: int, round: int = 0) -> None:
        if amount < 0:
            raise ValueError("cannot mint a negative amount")
        self._balances[owner] = self._balances.get(owner, 0) + amount
        self.minted += amount
        self.main.append(round, Event("mint", {"owner": owner, "amount": amount}))

    def balance(self, owner: str) -> int:
        return self._balances.get(owner, 0)

    @property
    def balances(self) -> Mapping[str, int]:
        return MappingProxyType(self._balances)

    def _move(self, src: str | None, dst: str | None, amount: int) -> None:
        # None stands for the escrow pool
        if amount == 0:
            return
        if src is not None:
            if self._balances.get(src, 0) < amount:
                raise InsufficientBalance(f"{src} holds {self.balance(src)}, needs {amount}")
            self._balances[src] -= amount
        if dst is not None:
            self._balances[dst] = self._balances.get(dst, 0) + amount

    @property
    def escrow_held(self) -> int:
        return sum(e.amount for e in self._escrow.values() if e.released_to is None)

    def escrow(self, token_hash: str) -> Escrow | None:
        return self._escrow.get(token_hash)

    def settle_fee(self, sc: str, sp: str, fee: int, token_hash: str, round: int) -> Escrow:
        """Debit the fee; the provider gets the larger half now, the rest waits for feedback."""
        if fee < 0:
            raise ValueError("fee must be >= 0")
        if token_hash in self._escrow:
            raise LedgerError(f"fee already settled for token {token_hash[:12]}")
        if self.balance(sc) < fee:
            raise InsufficientBalance(f"{sc} holds {self.balance(sc)}, fee is {fee}")
        to_sp = math.ceil(fee / 2)
        held = fee - to_sp
        self._move(sc, sp, to_sp)
        self._move(sc, None, held)
        entry = Escrow(token_hash, sc, sp, held)
        self._escrow[token_hash] = entry
        if fee:
            self.main.append(
                round,
                Event("fee", {"sc": sc, "sp": sp, "to_sp": to_sp, "escrow": held, "token": token_hash}),
            )
        return entry

    def release_escrow(self, token_hash: str, to: str, round: int) -> int:
        entry = self._escrow.get(token_hash)
        if entry is None:
            raise NotFound(f"no escrow for token {token_hash[:12]}")
        if entry.released_to is not None:
            raise LedgerError(f"escrow for {token_hash[:12]} already released")
        if to not in (entry.sc, entry.sp):
            raise LedgerError(f"escrow may only go to {entry.sc} or {entry.sp}")
        self._move(None, to, entry.amount)
        entry.released_to = to
        if entry.amount:
            self.main.append(
                round, Event("escrow_release", {"to": to, "amount": entry.amount, "token": token_hash})
            )
        return entry.amount

    # -- attribute registration -------------------------------------------

    def submit_registration(
        self,
        sidechain: ChainId,
        attrs: AttributeSet,
        device_fingerprint: str,
        sc_signature: bytes,
        authority: str,
        aa_signature: bytes,
        round: int,
    ) -> int:
        side = self.sidechain(sidechain)
        if authority not in side.authorities:
            raise NotAuthority(f"{authority} is not an authority of {sidechain}")
        tx = RegTx(attrs, device_fingerprint, round, authority)
        if not self.check_signature(attrs.owner, tx.sc_message(), sc_signature):
            raise SignatureError(f"bad consumer signature on registration of {attrs.owner}")
        aa_msg = {**tx.sc_message(), "sc_signature": sc_signature}
        if not self.check_signature(authority, aa_msg, aa_signature):
            raise SignatureError(f"bad authority signature from {authority}")
        if device_fingerprint in self._fingerprints or attrs.owner in self._owners:
            raise DuplicateIdentity(f"device {device_fingerprint[:12]} is already registered")

        handle = len(self._registrations)
        side.chain.append(round, tx, [(attrs.owner, sc_signature), (authority, aa_signature)])
        self._registrations.append(Registration(handle, sidechain, tx, digest(tx)))
        self._fingerprints[device_fingerprint] = handle
        self._owners[attrs.owner] = handle
        return handle

    def registration(self, handle: int) -> Registration:
        try:
            return self._registrations[handle]
        except (IndexError, TypeError):
            raise NotFound(f"no registration with handle {handle}") from None

    def registration_of(self, owner: str) -> Registration | None:
        handle = self._owners.get(owner)
        return None if handle is None else self._registrations[handle]

    def endorse(self, handle: int, endorser: str, signature: bytes, round: int) -> RegistrationState:
        reg = self.registration(handle)
        side = self.sidechain(reg.sidechain)
        if endorser not in side.authorities:
            raise NotAuthority(f"{endorser} is not an authority of {reg.sidechain}")
        if endorser in reg.endorsements:
            raise DoubleEndorse(f"{endorser} already endorsed registration {handle}")
        if reg.state is not RegistrationState.PENDING:
            raise LedgerError(f"registration {handle} is {reg.state.value}, not Pending")
        if not self.check_signature(endorser, reg.reg_hash, signature):
            raise SignatureError(f"bad endorsement signature from {endorser}")
        endorsement = Endorsement(reg.reg_hash, endorser, signature)
        side.chain.append(round, endorsement, [(endorser, signature)])
        reg.endorsements[endorser] = endorsement
        if len(reg.endorsements) >= side.quorum.threshold:
            reg.state = RegistrationState.ENDORSED
        return reg.state

    def seal(self, handle: int, round: int) -> LedgerRecord:
        reg = self.registration(handle)
        if reg.state is RegistrationState.SEALED:
            raise AlreadySealed(f"registration {handle} is already sealed")
        if reg.state is not RegistrationState.ENDORSED:
            raise NotEndorsed(f"registration {handle} has {len(reg.endorsements)} endorsements")
        threshold = self.sidechain(reg.sidechain).quorum.threshold
        endorsements = tuple(reg.endorsements[k] for k in sorted(reg.endorsements))
        assert len({e.endorser for e in endorsements}) >= threshold
        seal = SealTx(reg.tx.attributes.digest(), endorsements)
        record = self.main.append(round, seal, [(e.endorser, e.signature) for e in endorsements])
        reg.state = RegistrationState.SEALED
        return record

    def bridge_lookup(self, subject: str, round: int) -> AttributeResponseTx:
        """Broadcast an attribute validation event and collect the answering sidechain's response."""
        self.main.append(round, Event("attribute_validation", {"subject": subject}))
        handle = self._owners.get(subject)
        reg = None if handle is None else self._registrations[handle]
        for index in sorted(self.sidechains):
            if reg is not None and reg.sidechain.index == index and reg.state is RegistrationState.SEALED:
                response = AttributeResponseTx(subject, index, reg.tx.attributes)
                self.main.append(round, response)
                return response
        raise NotFound(f"no sealed attributes for {subject}")

    # -- policies -----------------------------------------------------------

    def register_policy(
        self, policy: AccessPolicy, signer: str, signature: bytes, round: int
    ) -> LedgerRecord:
        owner = self._resource_owner.get(policy.resource, policy.owner)
        if signer != owner or policy.owner != owner:
            raise NotOwner(f"{signer} does not own {policy.resource}")
        tx = PolicyTx(policy, round)
        if not self.check_signature(signer, tx, signature):
            raise SignatureError(f"bad policy signature from {signer}")
        if self.trust_params is not None and self.reputation_params is not None:
            policy.check_thresholds(self.trust_params, self.reputation_params)
        record = self.main.append(round, tx, [(signer, signature)])
        self._resource_owner[policy.resource] = owner
        self._policies[policy.resource] = policy
        return record

    def active_policy(self, resource: str) -> AccessPolicy:
        try:
            return self._policies[resource]
        except KeyError:
            raise NotFound(f"no policy for resource {resource}") from None

    def resource_owner(self, resource: str) -> str | None:
        return self._resource_owner.get(resource)

    # -- tokens -------------------------------------------------------------

    def register_token(self, token: AccessToken, round: int) -> str:
        if token.token_id in self._tokens:
            raise LedgerError(f"token id collision {token.token_id[:12]}")
        token_hash = token.digest()
        self._tokens[token.token_id] = token
        self._token_hashes[token_hash] = token.token_id
        self.main.append(round, Event("token_issued", {"token_hash": token_hash, "holder": token.holder}))
        return token_hash

    @property
    def tokens(self) -> Mapping[str, AccessToken]:
        return MappingProxyType(self._tokens)

    def token_by_hash(self, token_hash: str) -> AccessToken | None:
        token_id = self._token_hashes.get(token_hash)
        return None if token_id is None else self._tokens[token_id]

    # -- export ---------------------------------------------------------------

    def trace(self) -> list[dict[str, Any]]:
        return [r.trace_line() for r in self.journal]

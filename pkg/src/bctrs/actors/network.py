"""The authorization, data access and feedback protocol.

``Network`` plays the two main-chain contracts (policy and trust) on top of a
``Ledger`` and routes requests to ``DataStore`` instances. Providers never
take part in authorization once their policy is published, so their
online status is tracked but never consulted there.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Iterable

from ..abac import (
    DEFAULT_TOKEN_LIFETIME,
    AccessDenied,
    AccessPolicy,
    AccessRequest,
    AccessToken,
    Action,
    AttributeSet,
    RateWindow,
    RejectReason,
    TokenRejected,
    check_rate,
    validate_access_request,
    verify_token,
)
from ..crypto import digest
from ..ledger import (
    AuthRequestTx,
    ChainId,
    DataEvidence,
    Event,
    FeedbackTx,
    Ledger,
    LedgerRecord,
    NotFound,
    NotOwner,
    PolicyTx,
    RegistrationState,
    SignatureError,
)
from ..trs import Direction, Outcome, ReputationParams, TrustParams
from .identity import Node, Role
from .trust_contract import TrustContract

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResourceRecord:
    resource: str
    owner: str
    payload: bytes
    last_update: int
    sp_signature: bytes
    stored_at: str

    def sp_message(self) -> dict:
        return {
            "resource": self.resource,
            "payload_digest": digest(self.payload),
            "last_update": self.last_update,
        }


@dataclass(frozen=True)
class AccessMessage:
    """``Req(r)``: token, nonce and the presenter's signature over both."""

    token: AccessToken
    presenter: str
    nonce: bytes
    signature: bytes

    @staticmethod
    def body(token: AccessToken, presenter: str, nonce: bytes) -> dict:
        return {"token_id": token.token_id, "presenter": presenter, "nonce": nonce}


@dataclass(frozen=True)
class DataResponse:
    payload: bytes
    evidence: DataEvidence

    @property
    def staleness(self) -> int:
        return self.evidence.access_timestamp - self.evidence.last_update


@dataclass
class FeedbackResult:
    accepted: bool
    outcome: str  # "accepted", "penalized", "duplicate" or "rejected"
    escrow_to: str | None = None


class DataStore:
    """Off-chain storage that serves resource data against valid tokens."""

    def __init__(self, node: Node, network: "Network"):
        self.node = node
        self.network = network
        self.records: dict[str, ResourceRecord] = {}
        self.windows: dict[str, RateWindow] = {}
        self._nonces: dict[bytes, tuple[str, int]] = {}
        self.served: list[DataResponse] = []

    @property
    def node_id(self) -> str:
        return self.node.node_id

    def put(self, record: ResourceRecord) -> None:
        if not self.network.ledger.check_signature(record.owner, record.sp_message(), record.sp_signature):
            raise SignatureError(f"bad provider signature on {record.resource}")
        self.records[record.resource] = record

    def issue_nonce(self, presenter: str, round: int) -> bytes:
        nonce = self.network.rng.randbytes(16)
        self._nonces[nonce] = (presenter, round)
        return nonce

    def serve(self, message: AccessMessage, round: int) -> DataResponse:
        """Validate an access request and return the data with signed timestamps.

        Forged tokens and rate-limit breaches are reported to the trust
        contract as negative interactions against the presenter.
        """
        ledger = self.network.ledger
        token, presenter = message.token, message.presenter
        body = AccessMessage.body(token, presenter, message.nonce)
        if not ledger.check_signature(presenter, body, message.signature):
            raise SignatureError(f"unsigned access request from {presenter}")

        issued = self._nonces.pop(message.nonce, None)
        if issued is None or issued != (presenter, round):
            raise TokenRejected(RejectReason.STALE_NONCE, f"nonce from {presenter}")

        owner = ledger.resource_owner(token.resource)
        try:
            verify_token(token, ledger.tokens, presenter, round)
        except TokenRejected as exc:
            if exc.reason is RejectReason.FORGED and owner is not None:
                self.network.trs.report_violation(presenter, owner, "forged_token", round)
            raise

        window = self.windows.setdefault(token.token_id, RateWindow(token.token_id, round))
        if not check_rate(token, window, round):
            if owner is not None:
                self.network.trs.report_violation(presenter, owner, "rate_violation", round)
            raise TokenRejected(RejectReason.RATE_VIOLATION, f"{window.used} of {token.rate_limit}")

        record = self.records.get(token.resource)
        if record is None:
            raise NotFound(f"{token.resource} is not stored at {self.node.name}")
        pdigest = digest(record.payload)
        dds_msg = {"token_id": token.token_id, "payload_digest": pdigest, "access_timestamp": round}
        evidence = DataEvidence(
            resource=record.resource,
            payload_digest=pdigest,
            last_update=record.last_update,
            sp_signature=record.sp_signature,
            token_id=token.token_id,
            access_timestamp=round,
            dds=self.node_id,
            dds_signature=self.node.sign(dds_msg),
        )
        response = DataResponse(record.payload, evidence)
        self.served.append(response)
        return response


class Network:
    def __init__(
        self,
        sc_trust: TrustParams | None = None,
        sp_trust: TrustParams | None = None,
        reputation: ReputationParams | None = None,
        *,
        token_lifetime: int = DEFAULT_TOKEN_LIFETIME,
        rng: random.Random | None = None,
    ):
        sc_trust = sc_trust or TrustParams()
        sp_trust = sp_trust or TrustParams()
        reputation = reputation or ReputationParams()
        self.ledger = Ledger(sc_trust, reputation)
        self.trs = TrustContract(sc_trust, sp_trust, reputation)
        self.token_lifetime = token_lifetime
        self.rng = rng or random.Random(0)
        self.nodes: dict[str, Node] = {}
        self.stores: dict[str, DataStore] = {}
        self._placement: dict[str, str] = {}
        self._offline: dict[str, list[tuple[int, int]]] = {}

    # -- setup ----------------------------------------------------------------

    def add_node(self, node: Node) -> Node:
        self.ledger.register_key(node.identity.public_key)
        self.nodes[node.node_id] = node
        if node.has(Role.DDS):
            self.stores[node.node_id] = DataStore(node, self)
        return node

    def add_sidechain(self, authorities: Iterable[Node], f: int) -> ChainId:
        return self.ledger.add_sidechain([a.node_id for a in authorities], f)

    def register_attributes(
        self, sc: Node, sidechain: ChainId, attributes: Iterable, round: int = 0
    ) -> int:
        """Full registration workflow: submit via the first authority, collect a quorum, seal."""
        side = self.ledger.sidechain(sidechain)
        attrs = AttributeSet(sc.node_id, frozenset(attributes))
        aa = self.nodes[side.authorities[0]]
        handle = self.submit_registration(sc, aa, sidechain, attrs, round)
        reg = self.ledger.registration(handle)
        for aa_id in side.authorities:
            if reg.state is not RegistrationState.PENDING:
                break
            self.ledger.endorse(handle, aa_id, self.nodes[aa_id].sign(reg.reg_hash), round)
        self.ledger.seal(handle, round)
        return handle

    def submit_registration(
        self, sc: Node, aa: Node, sidechain: ChainId, attrs: AttributeSet, round: int
    ) -> int:
        fingerprint = sc.identity.device_fingerprint
        msg = {"attributes": attrs, "device_fingerprint": fingerprint, "timestamp": round}
        sc_sig = sc.sign(msg)
        aa_sig = aa.sign({**msg, "sc_signature": sc_sig})
        return self.ledger.submit_registration(
            sidechain, attrs, fingerprint, sc_sig, aa.node_id, aa_sig, round
        )

    # -- online status ----------------------------------------------------------

    def set_offline(self, node: str, start: int, end: int) -> None:
        if end >= start:
            self._offline.setdefault(node, []).append((start, end))

    def is_online(self, node: str, round: int) -> bool:
        return not any(lo <= round <= hi for lo, hi in self._offline.get(node, ()))

    # -- step 0 -------------------------------------------------------------------

    def sp_publish(
        self, sp: Node, policy: AccessPolicy, round: int, *, offline_for: int = 0
    ) -> LedgerRecord:
        """Register the policy; the provider may then go offline for ``offline_for`` rounds."""
        signature = sp.sign(PolicyTx(policy, round))
        record = self.ledger.register_policy(policy, sp.node_id, signature, round)
        self.set_offline(sp.node_id, round + 1, round + offline_for)
        return record

    def place(self, resource: str, dds: str) -> None:
        self._placement[resource] = dds

    def store_for(self, resource: str) -> DataStore:
        try:
            return self.stores[self._placement[resource]]
        except KeyError:
            raise NotFound(f"no data store holds {resource}") from None

    def sp_refresh(self, sp: Node, resource: str, round: int) -> ResourceRecord:
        if self.ledger.resource_owner(resource) != sp.node_id:
            raise NotOwner(f"{sp.name} does not own {resource}")
        store = self.store_for(resource)
        payload = f"{resource}@{round}".encode()
        signed = {"resource": resource, "payload_digest": digest(payload), "last_update": round}
        record = ResourceRecord(resource, sp.node_id, payload, round, sp.sign(signed), store.node_id)
        store.put(record)
        return record

    # -- steps 1-4 ----------------------------------------------------------------

    def sc_authorize(
        self,
        sc: Node,
        resource: str,
        actions: Iterable[Action],
        round: int,
        *,
        requester: str | None = None,
    ) -> AccessToken:
        """Authorize ``sc`` for ``resource``; raises ``AccessDenied`` on failure.

        ``requester`` lets a node claim another identity; the signature check
        then rejects the request without touching the claimed node's scores.
        """
        ledger = self.ledger
        request = AccessRequest(requester or sc.node_id, resource, frozenset(actions))
        signature = sc.sign(request)
        if not ledger.check_signature(request.requester, request, signature):
            raise SignatureError(f"request for {request.requester} not signed by it")
        ledger.main.append(
            round,
            AuthRequestTx(request.requester, resource, request.actions),
            [(request.requester, signature)],
        )
        policy = ledger.active_policy(resource)
        try:
            attributes: AttributeSet | None = ledger.bridge_lookup(sc.node_id, round).attributes
        except NotFound:
            attributes = None
        trust = self.trs.score(policy.owner, sc.node_id, Direction.SP_TRUSTS_SC)
        rep = self.trs.reputation(sc.node_id, Direction.SP_TRUSTS_SC)
        try:
            token = validate_access_request(
                policy,
                request,
                trust,
                rep,
                ledger.balance(sc.node_id),
                attributes,
                round,
                nonce=self.rng.randbytes(16),
                lifetime=self.token_lifetime,
            )
        except AccessDenied as exc:
            ledger.main.append(
                round, Event("access_denied", {"requester": sc.node_id, "reason": exc.reason.value})
            )
            raise
        token_hash = ledger.register_token(token, round)
        ledger.settle_fee(sc.node_id, policy.owner, policy.fee, token_hash, round)
        self.trs.record(policy.owner, sc.node_id, Direction.SP_TRUSTS_SC, Outcome.POSITIVE)
        return token

    # -- steps 5-7 ----------------------------------------------------------------

    def request_access(
        self, sc: Node, token: AccessToken, round: int, *, presenter: str | None = None
    ) -> tuple[AccessMessage, DataResponse]:
        """Fetch a nonce, sign ``Req(r)`` and hand it to the resource's store."""
        store = self.store_for(token.resource)
        who = presenter or sc.node_id
        nonce = store.issue_nonce(who, round)
        message = AccessMessage(token, who, nonce, sc.sign(AccessMessage.body(token, who, nonce)))
        return message, store.serve(message, round)

    def dds_serve(self, message: AccessMessage, round: int) -> DataResponse:
        return self.store_for(message.token.resource).serve(message, round)

    # -- feedback ---------------------------------------------------------------

    def make_feedback(self, sc: Node, token: AccessToken, response: DataResponse, feedback: Outcome) -> FeedbackTx:
        unsigned = FeedbackTx(feedback, response.evidence, token.digest(), sc.node_id)
        return FeedbackTx(
            feedback, response.evidence, unsigned.token_hash, sc.node_id, sc.sign(unsigned.body())
        )

    def evidence_valid(self, evidence: DataEvidence, token: AccessToken, policy: AccessPolicy) -> bool:
        ledger = self.ledger
        return (
            evidence.resource == token.resource
            and evidence.token_id == token.token_id
            and evidence.dds in self.stores
            and ledger.check_signature(policy.owner, evidence.sp_message(), evidence.sp_signature)
            and ledger.check_signature(evidence.dds, evidence.dds_message(), evidence.dds_signature)
        )

    def process_feedback(self, tx: FeedbackTx, round: int) -> FeedbackResult:
        """Settle one feedback transaction.

        Feedback backed by the signed timestamps raises or lowers the
        provider's trust and returns the escrowed half fee to the consumer.
        Anything else counts as misleading: the consumer takes a negative
        interaction and the escrow goes to the provider. A token hash can be
        settled once; repeats change nothing.
        """
        ledger, trs = self.ledger, self.trs
        if not ledger.check_signature(tx.signer, tx.body(), tx.signature):
            return FeedbackResult(False, "rejected")
        token = ledger.token_by_hash(tx.token_hash)
        if token is None or token.holder != tx.signer:
            return FeedbackResult(False, "rejected")
        ledger.main.append(round, tx, [(tx.signer, tx.signature)])
        if tx.token_hash in trs.consumed:
            return FeedbackResult(False, "duplicate")

        policy = ledger.active_policy(token.resource)
        evidence = self.evidence_valid(tx.evidence, token, policy)
        staleness = tx.evidence.access_timestamp - tx.evidence.last_update
        result = False
        if staleness < policy.refresh_rate:
            if tx.feedback is Outcome.POSITIVE and evidence:
                result = True
        else:
            if tx.feedback is Outcome.NEGATIVE and evidence:
                result = True

        trs.consumed.add(tx.token_hash)
        if result:
            trs.record(tx.signer, policy.owner, Direction.SC_TRUSTS_SP, tx.feedback)
            ledger.release_escrow(tx.token_hash, tx.signer, round)
            return FeedbackResult(True, "accepted", tx.signer)
        trs.record(policy.owner, tx.signer, Direction.SP_TRUSTS_SC, Outcome.NEGATIVE)
        ledger.release_escrow(tx.token_hash, policy.owner, round)
        return FeedbackResult(False, "penalized", policy.owner)

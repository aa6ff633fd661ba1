"""Attributes, access policies, tokens and rate windows."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping

from .crypto import digest
from .trs import ReputationParams, TrustParams

DEFAULT_TOKEN_LIFETIME = 100


class Action(enum.Enum):
    READ = "read"
    WRITE = "write"
    STREAM = "stream"


class DenialReason(enum.Enum):
    ATTRIBUTE_MISMATCH = "AttributeMismatch"
    ACTION_NOT_ALLOWED = "ActionNotAllowed"
    TRUST_TOO_LOW = "TrustTooLow"
    REPUTATION_TOO_LOW = "ReputationTooLow"
    INSUFFICIENT_BALANCE = "InsufficientBalance"
    OUTSIDE_CONTEXT = "OutsideContext"


class RejectReason(enum.Enum):
    FORGED = "Forged"
    EXPIRED = "Expired"
    RATE_VIOLATION = "RateViolation"
    STALE_NONCE = "StaleNonce"


class AccessDenied(Exception):
    def __init__(self, reason: DenialReason, detail: str = ""):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason


class TokenRejected(Exception):
    def __init__(self, reason: RejectReason, detail: str = ""):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class Attribute:
    key: str
    kind: str
    value: str

    def __post_init__(self) -> None:
        if not self.key:
            raise ValueError("attribute key must be non-empty")


@dataclass(frozen=True)
class AttributeSet:
    owner: str
    attributes: frozenset[Attribute] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", frozenset(self.attributes))
        seen: set[tuple[str, str]] = set()
        for attr in self.attributes:
            slot = (attr.key, attr.kind)
            if slot in seen:
                raise ValueError(f"duplicate attribute {attr.key}:{attr.kind} for {self.owner}")
            seen.add(slot)

    def digest(self) -> str:
        return digest(self)


@dataclass(frozen=True)
class AccessPolicy:
    resource: str
    owner: str
    actions: frozenset[Action]
    required_attributes: frozenset[Attribute] = frozenset()
    valid_rounds: tuple[int, int] = (0, 2**31 - 1)
    rate_limit: int = 5
    refresh_rate: int = 10
    fee: int = 0
    min_reputation: float = 0.0
    min_trust: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", frozenset(self.actions))
        object.__setattr__(self, "required_attributes", frozenset(self.required_attributes))
        object.__setattr__(self, "valid_rounds", tuple(self.valid_rounds))
        if not self.actions:
            raise PolicyError("policy must allow at least one action")
        if self.rate_limit < 1:
            raise PolicyError("rate_limit must be >= 1")
        if self.fee < 0:
            raise PolicyError("fee must be >= 0")
        if self.refresh_rate < 1:
            raise PolicyError("refresh_rate must be >= 1")
        lo, hi = self.valid_rounds
        if lo > hi:
            raise PolicyError(f"empty valid_rounds window {self.valid_rounds}")

    def check_thresholds(self, trust: TrustParams, rep: ReputationParams) -> None:
        """Thresholds must be reachable under the active scoring parameters."""
        if not trust.weight_neg <= self.min_trust <= trust.weight_pos:
            raise PolicyError(
                f"min_trust {self.min_trust} outside [{trust.weight_neg}, {trust.weight_pos}]"
            )
        if not 0.0 <= self.min_reputation <= rep.asymptote:
            raise PolicyError(f"min_reputation {self.min_reputation} outside [0, {rep.asymptote}]")


@dataclass(frozen=True)
class AccessRequest:
    requester: str
    resource: str
    actions: frozenset[Action]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", frozenset(self.actions))


@dataclass(frozen=True)
class AccessToken:
    token_id: str
    expiry: int
    rate_limit: int
    issued_at: int
    holder: str
    resource: str

    def __post_init__(self) -> None:
        if self.expiry <= self.issued_at:
            raise ValueError("token expiry must be after issuance")

    def digest(self) -> str:
        return digest(self)


@dataclass
class RateWindow:
    token_id: str
    round: int = 0
    used: int = 0


def attributes_satisfy(policy: AccessPolicy, holder: AttributeSet | None) -> bool:
    if holder is None:
        return not policy.required_attributes
    return policy.required_attributes <= holder.attributes


def validate_access_request(
    policy: AccessPolicy,
    request: AccessRequest,
    trust: float,
    reputation: float,
    balance: int,
    holder: AttributeSet | None,
    now: int,
    *,
    nonce: bytes,
    lifetime: int = DEFAULT_TOKEN_LIFETIME,
) -> AccessToken:
    """Run the access checks and mint a token, or raise ``AccessDenied``.

    Checks are reported in nesting order: attributes and actions, then trust
    and reputation, then balance, then the time context of the policy.
    ``holder`` is None when the bridge found no sealed attributes.
    """
    if request.resource != policy.resource:
        raise ValueError(f"request for {request.resource} checked against {policy.resource}")
    if holder is None or not attributes_satisfy(policy, holder):
        raise AccessDenied(DenialReason.ATTRIBUTE_MISMATCH, request.requester)
    if not request.actions <= policy.actions:
        raise AccessDenied(DenialReason.ACTION_NOT_ALLOWED, request.requester)
    if not trust >= policy.min_trust:
        raise AccessDenied(DenialReason.TRUST_TOO_LOW, f"{trust} < {policy.min_trust}")
    if not reputation >= policy.min_reputation:
        raise AccessDenied(
            DenialReason.REPUTATION_TOO_LOW, f"{reputation} < {policy.min_reputation}"
        )
    if not balance >= policy.fee:
        raise AccessDenied(DenialReason.INSUFFICIENT_BALANCE, f"{balance} < {policy.fee}")
    lo, hi = policy.valid_rounds
    if not lo <= now <= hi:
        raise AccessDenied(DenialReason.OUTSIDE_CONTEXT, f"round {now} not in [{lo}, {hi}]")
    if lifetime < 1:
        raise ValueError("token lifetime must be >= 1")

    issuance = {
        "resource": policy.resource,
        "holder": request.requester,
        "actions": request.actions,
        "issued_at": now,
        "nonce": nonce,
    }
    return AccessToken(
        token_id=digest(issuance),
        expiry=now + lifetime,
        rate_limit=policy.rate_limit,
        issued_at=now,
        holder=request.requester,
        resource=policy.resource,
    )


def verify_token(
    token: AccessToken, registry: Mapping[str, AccessToken], presenter: str, now: int
) -> None:
    """Raise ``TokenRejected`` unless ``token`` was issued to ``presenter`` and is unexpired."""
    issued = registry.get(token.token_id)
    if issued is None or issued != token:
        raise TokenRejected(RejectReason.FORGED, f"unknown token {token.token_id[:12]}")
    if issued.holder != presenter:
        raise TokenRejected(RejectReason.FORGED, f"token held by {issued.holder}, not {presenter}")
    if now > issued.expiry:
        raise TokenRejected(RejectReason.EXPIRED, f"expired at {issued.expiry}")


def check_rate(token: AccessToken, window: RateWindow, now: int) -> bool:
    """Fixed per-round window; counts the request only when it is allowed."""
    if window.token_id != token.token_id:
        raise ValueError("rate window belongs to another token")
    if window.round != now:
        window.round = now
        window.used = 0
    if window.used + 1 <= token.rate_limit:
        window.used += 1
        return True
    return False


def parse_actions(names: Iterable[str]) -> frozenset[Action]:
    return frozenset(Action(n) for n in names)

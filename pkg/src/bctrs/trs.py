"""Trust and reputation scoring.

Pairwise trust is an exponentially aged average of binary interaction
outcomes. It is maintained incrementally (``trust_update``); the explicit
weighted sum (``trust_direct``) is kept only as an oracle for testing.
Global reputation feeds the peer-aggregated trust of a node through a
Gompertz curve.

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class ParameterError(ValueError):
    """Raised for trust or reputation parameters outside their valid domain."""


class Outcome(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Direction(enum.Enum):
    """Which party holds the opinion."""

    SP_TRUSTS_SC = "sp_trusts_sc"
    SC_TRUSTS_SP = "sc_trusts_sp"


@dataclass(frozen=True, slots=True)
class TrustParams:
    """Aging factor and per-outcome weights.

    The same shape serves both directions: (gamma, delta_pos, delta_neg)
    for provider-held trust in consumers and (mu, eps_pos, eps_neg) for
    consumer-held trust in providers.
    """

    aging: float = 0.8
    weight_pos: float = 1.0
    weight_neg: float = -3.0

    def __post_init__(self) -> None:
        if not 0.0 < self.aging < 1.0:
            raise ParameterError(f"aging must lie in (0, 1), got {self.aging}")
        if not self.weight_pos > 0.0:
            raise ParameterError(f"weight_pos must be > 0, got {self.weight_pos}")
        if not self.weight_neg < 0.0:
            raise ParameterError(f"weight_neg must be < 0, got {self.weight_neg}")
        if not self.weight_pos < abs(self.weight_neg):
            raise ParameterError(
                "weight_pos must be smaller than |weight_neg| "
                f"({self.weight_pos} vs {self.weight_neg})"
            )

    def weight(self, outcome: Outcome) -> float:
        return self.weight_pos if outcome is Outcome.POSITIVE else self.weight_neg


# Not frozen: the fold builds millions of these and frozen construction is
# about twice as slow. ``trust_update`` never mutates its input.
@dataclass(slots=True)
class TrustState:
    evaluator: str
    subject: str
    direction: Direction
    score: float = 0.0
    interactions: int = 0

    def __post_init__(self) -> None:
        if self.interactions < 0:
            raise ValueError("interactions must be >= 0")
        if self.interactions == 0 and self.score != 0.0:
            raise ValueError("a state with no interactions must have score 0")


@dataclass(frozen=True, slots=True)
class ReputationParams:
    """Gompertz parameters, with displacement and growth stored as positive magnitudes."""

    asymptote: float = 1.0
    displacement: float = 4.0
    growth: float = 2.0

    def __post_init__(self) -> None:
        for name in ("asymptote", "displacement", "growth"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ParameterError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class ReputationView:
    node: str
    peers: frozenset[str] = frozenset()
    peer_trust: Mapping[str, float] = field(default_factory=dict)
    aggregate: float = 0.0
    reputation: float = 0.0

    @property
    def has_interacted(self) -> bool:
        return bool(self.peers)


def trust_update(state: TrustState, outcome: Outcome, params: TrustParams) -> TrustState:
    """One step of the aging recursion: ``aging * score + (1 - aging) * weight``."""
    w = params.weight_pos if outcome is Outcome.POSITIVE else params.weight_neg
    score = params.aging * state.score + (1.0 - params.aging) * w
    # The recursion is a convex combination; clamp away rounding overshoot.
    if score > params.weight_pos:
        score = params.weight_pos
    elif score < params.weight_neg:
        score = params.weight_neg
    return TrustState(
        state.evaluator, state.subject, state.direction, score, state.interactions + 1
    )


def trust_direct(outcomes: Iterable[Outcome], params: TrustParams) -> float:
    """Closed-form weighted sum over the whole outcome history."""
    history = list(outcomes)
    g, wp, wn = params.aging, params.weight_pos, params.weight_neg
    last = len(history) - 1
    terms = [(wp if o is Outcome.POSITIVE else wn) * g ** (last - k) for k, o in enumerate(history)]
    return (1.0 - g) * math.fsum(terms)


def aggregate_trust(peer_trust: Mapping[str, float]) -> float:
    """``ln(n)/n`` times the summed peer trust; zero when nobody has interacted."""
    n = len(peer_trust)
    if n == 0:
        return 0.0
    return math.log(n) / n * math.fsum(peer_trust.values())


def reputation(aggregate: float, has_interacted: bool, params: ReputationParams) -> float:
    if not has_interacted:
        return 0.0
    inner = -params.growth * aggregate
    # exp overflow here means the curve is at its floor
    if inner > 700.0:
        return 0.0
    return params.asymptote * math.exp(-params.displacement * math.exp(inner))


def recompute_view(view: ReputationView, params: ReputationParams) -> ReputationView:
    if set(view.peer_trust) != set(view.peers):
        raise ValueError(f"peer_trust keys do not match peers for {view.node}")
    agg = aggregate_trust(view.peer_trust)
    return ReputationView(
        node=view.node,
        peers=view.peers,
        peer_trust=view.peer_trust,
        aggregate=agg,
        reputation=reputation(agg, view.has_interacted, params),
    )


def gompertz_floor(params: ReputationParams) -> float:
    """Reputation of a node whose aggregate is zero, e.g. one with a single peer."""
    return reputation(0.0, True, params)

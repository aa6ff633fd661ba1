from __future__ import annotations

from dataclasses import dataclass

from ..trs import (
    Direction,
    Outcome,
    ReputationParams,
    ReputationView,
    TrustParams,
    TrustState,
    recompute_view,
    trust_update,
)


@dataclass(frozen=True)
class Violation:
    round: int
    offender: str
    provider: str
    kind: str


class TrustContract:
    """On-chain trust bookkeeping: pairwise scores, per-node reputation views,
    reported violations and the set of token hashes already used for feedback."""

    def __init__(
        self,
        sc_params: TrustParams,
        sp_params: TrustParams,
        reputation_params: ReputationParams,
    ):
        self.sc_params = sc_params
        self.sp_params = sp_params
        self.reputation_params = reputation_params
        self._states: dict[tuple[str, str, Direction], TrustState] = {}
        self._views: dict[tuple[str, Direction], ReputationView] = {}
        self.violations: list[Violation] = []
        self.consumed: set[str] = set()

    def params_for(self, direction: Direction) -> TrustParams:
        return self.sc_params if direction is Direction.SP_TRUSTS_SC else self.sp_params

    def state(self, evaluator: str, subject: str, direction: Direction) -> TrustState:
        key = (evaluator, subject, direction)
        return self._states.get(key) or TrustState(evaluator, subject, direction)

    def score(self, evaluator: str, subject: str, direction: Direction) -> float:
        return self.state(evaluator, subject, direction).score

    def record(
        self, evaluator: str, subject: str, direction: Direction, outcome: Outcome
    ) -> TrustState:
        new = trust_update(
            self.state(evaluator, subject, direction), outcome, self.params_for(direction)
        )
        self._states[(evaluator, subject, direction)] = new
        self._refresh_view(subject, direction)
        return new

    def _refresh_view(self, subject: str, direction: Direction) -> None:
        peer_trust = {
            ev: st.score
            for (ev, sub, d), st in self._states.items()
            if sub == subject and d is direction
        }
        view = ReputationView(subject, frozenset(peer_trust), peer_trust)
        self._views[(subject, direction)] = recompute_view(view, self.reputation_params)

    def view(self, subject: str, direction: Direction) -> ReputationView:
        return self._views.get((subject, direction)) or ReputationView(subject)

    def reputation(self, subject: str, direction: Direction) -> float:
        return self.view(subject, direction).reputation

    def report_violation(self, offender: str, provider: str, kind: str, round: int) -> TrustState:
        """A policy violation is a negative interaction in the provider's trust of the offender."""
        self.violations.append(Violation(round, offender, provider, kind))
        return self.record(provider, offender, Direction.SP_TRUSTS_SC, Outcome.NEGATIVE)

    def states(self) -> list[TrustState]:
        return list(self._states.values())

"""Analytic reference curves computed straight from the scoring functions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from ..trs import (
    Direction,
    Outcome,
    ReputationParams,
    TrustParams,
    TrustState,
    aggregate_trust,
    reputation,
    trust_update,
)


class CurveKind(enum.Enum):
    TRUST_VS_GAMMA = "TrustVsGamma"
    AGGREGATE_VS_PEERS = "AggregateVsPeers"
    REPUTATION_VS_PEERS = "ReputationVsPeers"
    HONEST_MALICIOUS_TURNCOAT = "HonestMaliciousTurncoat"


@dataclass
class CurveTable:
    x_name: str
    x: list[Any]
    series: dict[str, list[float]] = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        return [self.x_name, *self.series]

    def rows(self) -> list[list[Any]]:
        return [[xv, *(s[i] for s in self.series.values())] for i, xv in enumerate(self.x)]


def trust_trajectory(outcomes: Iterable[Outcome], params: TrustParams) -> list[float]:
    """Scores after 0, 1, 2, ... interactions, folded through ``trust_update``."""
    state = TrustState("a", "b", Direction.SP_TRUSTS_SC)
    scores = [state.score]
    for o in outcomes:
        state = trust_update(state, o, params)
        scores.append(state.score)
    return scores


def trust_vs_gamma(
    gammas: Sequence[float] = (0.6, 0.7, 0.8, 0.9),
    weight_pos: float = 1.0,
    weight_neg: float = -3.0,
    t_max: int = 50,
) -> CurveTable:
    table = CurveTable("t", list(range(t_max + 1)))
    for g in gammas:
        params = TrustParams(g, weight_pos, weight_neg)
        table.series[f"gamma={g:g}"] = trust_trajectory([Outcome.POSITIVE] * t_max, params)
    return table


def aggregate_vs_peers(taus: Sequence[float] = (1.0,), max_peers: int = 64) -> CurveTable:
    table = CurveTable("peers", list(range(1, max_peers + 1)))
    for tau in taus:
        table.series[f"trust={tau:g}"] = [
            aggregate_trust({f"p{i}": tau for i in range(n)}) for n in table.x
        ]
    return table


def reputation_vs_peers(
    taus: Sequence[float] = (1.0,),
    max_peers: int = 64,
    params: ReputationParams | None = None,
) -> CurveTable:
    params = params or ReputationParams()
    agg = aggregate_vs_peers(taus, max_peers)
    table = CurveTable("peers", agg.x)
    for name, values in agg.series.items():
        table.series[name] = [reputation(a, True, params) for a in values]
    return table


def honest_malicious_turncoat(
    switch_round: int = 40,
    t_max: int = 60,
    params: TrustParams | None = None,
) -> CurveTable:
    """Three provider histories: always good, always bad, good up to ``switch_round`` then bad."""
    params = params or TrustParams(0.8, 1.0, -3.0)
    pos, neg = Outcome.POSITIVE, Outcome.NEGATIVE
    turncoat = [pos if t <= switch_round else neg for t in range(1, t_max + 1)]
    return CurveTable(
        "t",
        list(range(t_max + 1)),
        {
            "honest": trust_trajectory([pos] * t_max, params),
            "malicious": trust_trajectory([neg] * t_max, params),
            "turncoat": trust_trajectory(turncoat, params),
        },
    )


def _floats(value) -> list[float]:
    if isinstance(value, str):
        return [float(v) for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


def reference_curves(kind: CurveKind | str, params: dict[str, Any] | None = None) -> CurveTable:
    kind = CurveKind(kind)
    p = dict(params or {})
    if kind is CurveKind.TRUST_VS_GAMMA:
        table = trust_vs_gamma(
            _floats(p.pop("gammas", (0.6, 0.7, 0.8, 0.9))),
            float(p.pop("weight_pos", 1.0)),
            float(p.pop("weight_neg", -3.0)),
            int(p.pop("t_max", 50)),
        )
    elif kind is CurveKind.AGGREGATE_VS_PEERS:
        table = aggregate_vs_peers(_floats(p.pop("taus", (1.0,))), int(p.pop("max_peers", 64)))
    elif kind is CurveKind.REPUTATION_VS_PEERS:
        rep = ReputationParams(
            float(p.pop("asymptote", 1.0)),
            float(p.pop("displacement", 4.0)),
            float(p.pop("growth", 2.0)),
        )
        table = reputation_vs_peers(_floats(p.pop("taus", (1.0,))), int(p.pop("max_peers", 64)), rep)
    else:
        trust = TrustParams(
            float(p.pop("aging", 0.8)), float(p.pop("weight_pos", 1.0)), float(p.pop("weight_neg", -3.0))
        )
        table = honest_malicious_turncoat(int(p.pop("switch_round", 40)), int(p.pop("t_max", 60)), trust)
    if p:
        raise ValueError(f"unknown parameters for {kind.value}: {', '.join(sorted(p))}")
    return table


def steps_to_converge(aging: float, tolerance: float = 1e-3) -> int:
    """Interactions needed for an all-positive history to come within ``tolerance`` of the cap."""
    return math.ceil(math.log(tolerance) / math.log(aging))

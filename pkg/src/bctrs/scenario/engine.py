"""Round-based scenario engine.

Round 0 is genesis: keys, balances, attribute registration with quorum,
policy deployment and the first data upload. Rounds 1..N then run three
phases in node-id order (provider refreshes, honest consumers, adversaries)
and take one metrics sample each.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from ..abac import AccessPolicy, Attribute, DenialReason, RejectReason, parse_actions
from ..actors import (
    ActionRecord,
    Agent,
    BehaviorProfile,
    Network,
    Node,
    ProfileKind,
    RequestPlan,
    Role,
    attack_step,
    consumer_step,
    sp_refresh,
)
from ..actors.behaviors import SP_ATTACKS
from ..trs import Direction
from .config import IMPLICIT_AUTHORITY, IMPLICIT_STORE, ScenarioConfig

COUNTER_COLUMNS = (
    ["tokens_issued", "accesses"]
    + [f"denied:{r.value}" for r in DenialReason]
    + [f"rejected:{r.value}" for r in RejectReason]
    + ["rejected:Impersonation", "rejected:DuplicateIdentity"]
    + [f"feedback:{o}" for o in ("accepted", "penalized", "duplicate", "rejected")]
    + ["violation:forged_token", "violation:rate_violation", "escrow_held"]
)


def trust_column(evaluator: str, subject: str, direction: Direction) -> str:
    if direction is Direction.SP_TRUSTS_SC:
        return f"sp:{evaluator}>sc:{subject}"
    return f"sc:{evaluator}>sp:{subject}"


@dataclass
class MetricsSeries:
    trust_columns: list[str]
    reputation_columns: list[str]
    balance_columns: list[str]
    counter_columns: list[str] = field(default_factory=lambda: list(COUNTER_COLUMNS))
    rounds: list[int] = field(default_factory=list)
    trust: list[dict[str, float]] = field(default_factory=list)
    reputation: list[dict[str, float]] = field(default_factory=list)
    balances: list[dict[str, int]] = field(default_factory=list)
    counters: list[dict[str, int]] = field(default_factory=list)
    minted: int = 0
    first_attack: dict[str, int | None] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rounds)

    def series(self, family: str, column: str) -> list:
        return [row[column] for row in getattr(self, family)]

    def totals(self) -> Counter:
        total: Counter = Counter()
        for row in self.counters:
            total.update({k: v for k, v in row.items() if k != "escrow_held"})
        return total


@dataclass
class RunResult:
    metrics: MetricsSeries
    trace: list[dict[str, Any]]
    network: Network
    agents: dict[str, Agent]
    actions: list[ActionRecord]
    tokens: list[str]


class Scenario:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self.net = Network(
            config.trust.sc.build(),
            config.trust.sp.build(),
            config.reputation.build(),
            token_lifetime=config.token_lifetime,
            rng=self.rng,
        )
        self.by_name: dict[str, Node] = {}
        self.agents: dict[str, Agent] = {}
        self.actions: list[ActionRecord] = []
        self.tokens: list[str] = []

    def _node(self, name: str, roles, device: str | None = None) -> Node:
        node = Node.create(name, roles, seed=f"{self.config.seed}:{name}", device=device)
        self.net.add_node(node)
        self.by_name[name] = node
        return node

    # -- genesis ------------------------------------------------------------

    def genesis(self) -> None:
        cfg, net = self.config, self.net
        for nc in cfg.nodes:
            self._node(nc.name, {Role(r) for r in nc.roles}, nc.device)

        sidechains = cfg.sidechains
        if sidechains:
            for side in sidechains:
                net.add_sidechain([self.by_name[a] for a in side.authorities], side.f)
        else:
            net.add_sidechain([self._node(IMPLICIT_AUTHORITY, {Role.AA})], 0)
        stores = [nc.name for nc in cfg.nodes if "DDS" in nc.roles]
        if not stores and cfg.policies:
            self._node(IMPLICIT_STORE, {Role.DDS})
            stores = [IMPLICIT_STORE]

        for nc in cfg.nodes:
            if nc.balance:
                net.ledger.mint(self.by_name[nc.name].node_id, nc.balance, 0)

        for nc in cfg.nodes:
            if "SC" not in nc.roles or not nc.registered:
                continue
            attrs = [Attribute(a.key, a.kind, a.value) for a in nc.attributes]
            side = net.ledger.sidechains[nc.sidechain or 1].chain.chain_id
            net.register_attributes(self.by_name[nc.name], side, attrs, 0)

        owned: dict[str, dict[str, int]] = {}
        for pc in cfg.policies:
            owner = self.by_name[pc.owner]
            policy = AccessPolicy(
                resource=pc.resource,
                owner=owner.node_id,
                actions=parse_actions(pc.actions),
                required_attributes=frozenset(
                    Attribute(a.key, a.kind, a.value) for a in pc.required_attributes
                ),
                valid_rounds=pc.valid_rounds or (0, cfg.rounds),
                rate_limit=pc.rate_limit,
                refresh_rate=pc.refresh_rate,
                fee=pc.fee,
                min_reputation=pc.min_reputation,
                min_trust=pc.min_trust,
            )
            net.sp_publish(owner, policy, 0, offline_for=pc.offline_after_publish)
            net.place(pc.resource, self.by_name[pc.store or stores[0]].node_id)
            net.sp_refresh(owner, pc.resource, 0)
            owned.setdefault(pc.owner, {})[pc.resource] = pc.refresh_every

        for nc in cfg.nodes:
            node = self.by_name[nc.name]
            for lo, hi in nc.offline:
                net.set_offline(node.node_id, lo, hi)
            p = nc.profile
            profile = BehaviorProfile(
                ProfileKind(p.kind), p.switch_round, p.skip_rate, p.burst, p.target, p.rejoin_every
            )
            plans = [
                RequestPlan(r.resource, parse_actions(r.actions), r.accesses, r.every)
                for r in nc.requests
            ]
            side = None
            if "SC" in nc.roles:
                side = net.ledger.sidechains[nc.sidechain or 1].chain.chain_id
            self.agents[nc.name] = Agent(
                node, profile, plans, owned.get(nc.name, {}), side, seed=f"{cfg.seed}:{nc.name}"
            )

    # -- metrics ------------------------------------------------------------

    def _tracked_pairs(self) -> list[tuple[str, str, Direction]]:
        providers = sorted({pc.owner for pc in self.config.policies})
        consumers = [nc.name for nc in self.config.nodes if "SC" in nc.roles]
        pairs = []
        for sp in providers:
            for sc in consumers:
                pairs.append((sp, sc, Direction.SP_TRUSTS_SC))
                pairs.append((sc, sp, Direction.SC_TRUSTS_SP))
        return pairs

    def _reputation_columns(self) -> list[tuple[str, str, Direction]]:
        cols = []
        for nc in self.config.nodes:
            if "SC" in nc.roles:
                cols.append((f"{nc.name}:sc", nc.name, Direction.SP_TRUSTS_SC))
            if "SP" in nc.roles:
                cols.append((f"{nc.name}:sp", nc.name, Direction.SC_TRUSTS_SP))
        return cols

    def empty_series(self) -> MetricsSeries:
        names = [nc.name for nc in self.config.nodes]
        return MetricsSeries(
            trust_columns=[trust_column(*p) for p in self._tracked_pairs()],
            reputation_columns=[c for c, _, _ in self._reputation_columns()],
            balance_columns=names + ["escrow"],
        )

    def sample(self, metrics: MetricsSeries, round: int, tally: Counter) -> None:
        trs, ledger = self.net.trs, self.net.ledger
        ids = {name: node.node_id for name, node in self.by_name.items()}
        metrics.rounds.append(round)
        metrics.trust.append(
            {trust_column(ev, sub, d): trs.score(ids[ev], ids[sub], d) for ev, sub, d in self._tracked_pairs()}
        )
        metrics.reputation.append(
            {col: trs.reputation(ids[name], d) for col, name, d in self._reputation_columns()}
        )
        row = {nc.name: ledger.balance(ids[nc.name]) for nc in self.config.nodes}
        row["escrow"] = ledger.escrow_held
        metrics.balances.append(row)
        for v in trs.violations:
            if v.round == round:
                tally[f"violation:{v.kind}"] += 1
        tally["escrow_held"] = ledger.escrow_held
        metrics.counters.append({c: tally.get(c, 0) for c in metrics.counter_columns})

    # -- rounds -------------------------------------------------------------

    def _ordered(self, agents) -> list[Agent]:
        return sorted(agents, key=lambda a: a.node.node_id)

    def step(self, round: int, metrics: MetricsSeries) -> None:
        net = self.net
        tally: Counter = Counter()
        issued_before = len(net.ledger.tokens)
        records: list[ActionRecord] = []

        for agent in self._ordered(a for a in self.agents.values() if a.resources):
            records += sp_refresh(agent, net, round)

        consumers = [a for a in self.agents.values() if a.requests or a.profile.target]
        honest = [a for a in consumers if a.profile.is_honest or a.profile.kind in SP_ATTACKS]
        hostile = [a for a in consumers if a not in honest]
        for agent in self._ordered(honest):
            records += consumer_step(agent, net, round, tally)
        for agent in self._ordered(hostile):
            records += attack_step(agent, net, round, tally, self.agents)

        self._mark_stale_providers(round)
        self.actions += records
        self.tokens += list(net.ledger.tokens)[issued_before:]
        self.sample(metrics, round, tally)

    def _mark_stale_providers(self, round: int) -> None:
        """Serving data older than the promised refresh rate is the provider-side attack."""
        ledger = self.net.ledger
        for agent in self.agents.values():
            if agent.profile.kind not in SP_ATTACKS or agent.first_attack_round is not None:
                continue
            for store in self.net.stores.values():
                for resp in store.served:
                    ev = resp.evidence
                    if ev.access_timestamp != round or ev.resource not in agent.resources:
                        continue
                    if resp.staleness >= ledger.active_policy(ev.resource).refresh_rate:
                        agent.first_attack_round = round

    def run(self) -> RunResult:
        self.genesis()
        metrics = self.empty_series()
        metrics.minted = self.net.ledger.minted
        for round in range(1, self.config.rounds + 1):
            self.step(round, metrics)
        metrics.first_attack = {
            name: a.first_attack_round for name, a in self.agents.items() if not a.profile.is_honest
        }
        return RunResult(metrics, self.net.ledger.trace(), self.net, self.agents, self.actions, self.tokens)


def run(config: ScenarioConfig) -> RunResult:
    return Scenario(config).run()

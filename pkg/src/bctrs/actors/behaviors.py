"""Honest and adversarial agent behavior.

Each round the scenario engine calls ``sp_refresh`` for every provider,
``consumer_step`` for every honest consumer, then ``attack_step`` for every
adversarial agent. Steps return ``ActionRecord`` entries; a record marked
``malicious`` is what the containment checks key on.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..abac import AccessDenied, AccessToken, Action, AttributeSet, TokenRejected
from ..crypto import digest
from ..ledger import ChainId, DuplicateIdentity, SignatureError
from ..trs import Outcome
from .identity import Node
from .network import AccessMessage, DataResponse, Network


class ProfileKind(enum.Enum):
    HONEST = "Honest"
    UNRELIABLE_SP = "UnreliableSP"
    REPLAY = "ReplayAttacker"
    FORGED_TOKEN = "ForgedTokenAttacker"
    DOS = "DosAttacker"
    BAD_MOUTHER = "BadMouther"
    BALLOT_STUFFER = "BallotStuffer"
    SELF_PROMOTER = "SelfPromoter"
    WHITEWASHER = "Whitewasher"
    TURNCOAT_SP = "TurncoatSP"


SP_ATTACKS = frozenset({ProfileKind.UNRELIABLE_SP, ProfileKind.TURNCOAT_SP})


@dataclass(frozen=True)
class BehaviorProfile:
    kind: ProfileKind = ProfileKind.HONEST
    switch_round: int | None = None
    skip_rate: float = 1.0
    burst: int = 1
    target: str | None = None
    rejoin_every: int = 10

    def __post_init__(self) -> None:
        if self.kind is ProfileKind.TURNCOAT_SP and self.switch_round is None:
            raise ValueError("TurncoatSP needs a switch_round")
        if not 0.0 <= self.skip_rate <= 1.0:
            raise ValueError("skip_rate must lie in [0, 1]")
        if self.burst < 1 or self.rejoin_every < 1:
            raise ValueError("burst and rejoin_every must be >= 1")

    @property
    def is_honest(self) -> bool:
        return self.kind is ProfileKind.HONEST

    def honest_at(self, round: int) -> bool:
        if self.kind is ProfileKind.TURNCOAT_SP:
            return round < self.switch_round
        return self.kind is not ProfileKind.UNRELIABLE_SP


@dataclass
class RequestPlan:
    resource: str
    actions: frozenset[Action] = frozenset({Action.READ})
    accesses: int = 1
    every: int = 1


@dataclass(frozen=True)
class ActionRecord:
    round: int
    actor: str
    kind: str
    malicious: bool = False
    result: str = ""


@dataclass
class Agent:
    node: Node
    profile: BehaviorProfile = field(default_factory=BehaviorProfile)
    requests: list[RequestPlan] = field(default_factory=list)
    resources: dict[str, int] = field(default_factory=dict)  # owned resource -> refresh period
    sidechain: ChainId | None = None
    seed: str = ""
    last_messages: list[AccessMessage] = field(default_factory=list)
    first_attack_round: int | None = None
    rejoins: int = 0

    @property
    def name(self) -> str:
        return self.node.name

    def mark(self, records: list[ActionRecord]) -> list[ActionRecord]:
        for r in records:
            if r.malicious and self.first_attack_round is None:
                self.first_attack_round = r.round
        return records


FeedbackRule = Callable[[DataResponse, int], Outcome]


def honest_feedback(response: DataResponse, refresh_rate: int) -> Outcome:
    return Outcome.POSITIVE if response.staleness < refresh_rate else Outcome.NEGATIVE


# -- provider side -------------------------------------------------------------


def sp_refresh(agent: Agent, net: Network, round: int) -> list[ActionRecord]:
    """Refresh every owned resource that is due this round, as the profile allows."""
    records = []
    for resource, period in sorted(agent.resources.items()):
        if round % period != 0:
            continue
        if not net.is_online(agent.node.node_id, round):
            records.append(ActionRecord(round, agent.name, "offline_skip", result=resource))
            continue
        kind = agent.profile.kind
        if kind is ProfileKind.UNRELIABLE_SP:
            skip = net.rng.random() < agent.profile.skip_rate
        elif kind is ProfileKind.TURNCOAT_SP:
            skip = not agent.profile.honest_at(round)
        else:
            skip = False
        if skip:
            records.append(ActionRecord(round, agent.name, "skip_refresh", result=resource))
            continue
        net.sp_refresh(agent.node, resource, round)
        records.append(ActionRecord(round, agent.name, "refresh", result=resource))
    return records


# -- consumer side -------------------------------------------------------------


def _authorize(agent: Agent, net: Network, plan: RequestPlan, round: int, tally: Counter) -> AccessToken | None:
    try:
        token = net.sc_authorize(agent.node, plan.resource, plan.actions, round)
    except AccessDenied as exc:
        tally[f"denied:{exc.reason.value}"] += 1
        return None
    tally["tokens_issued"] += 1
    return token


def _access(agent: Agent, net: Network, token: AccessToken, round: int, tally: Counter) -> DataResponse | None:
    try:
        message, response = net.request_access(agent.node, token, round)
    except TokenRejected as exc:
        tally[f"rejected:{exc.reason.value}"] += 1
        return None
    agent.last_messages.append(message)
    tally["accesses"] += 1
    return response


def _feedback(
    agent: Agent, net: Network, token: AccessToken, response: DataResponse,
    feedback: Outcome, round: int, tally: Counter,
) -> str:
    tx = net.make_feedback(agent.node, token, response, feedback)
    result = net.process_feedback(tx, round)
    tally[f"feedback:{result.outcome}"] += 1
    return result.outcome


def _use(
    agent: Agent, net: Network, plan: RequestPlan, round: int, tally: Counter,
    rule: FeedbackRule = honest_feedback, accesses: int | None = None,
) -> tuple[Outcome | None, DataResponse | None, str]:
    """Authorize, access ``accesses`` times, then file feedback on the last response."""
    token = _authorize(agent, net, plan, round, tally)
    if token is None:
        return None, None, "denied"
    response = None
    for _ in range(plan.accesses if accesses is None else accesses):
        response = _access(agent, net, token, round, tally) or response
    if response is None:
        return None, None, "no_data"
    refresh_rate = net.ledger.active_policy(plan.resource).refresh_rate
    feedback = rule(response, refresh_rate)
    return feedback, response, _feedback(agent, net, token, response, feedback, round, tally)


def _due(plans: list[RequestPlan], round: int) -> list[RequestPlan]:
    return [p for p in plans if round % p.every == 0]


def consumer_step(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    agent.last_messages = []
    records = []
    for plan in _due(agent.requests, round):
        _, _, outcome = _use(agent, net, plan, round, tally)
        records.append(ActionRecord(round, agent.name, "use", result=f"{plan.resource}:{outcome}"))
    return records


# -- adversaries ---------------------------------------------------------------


def _bad_mouth(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    records = []
    for plan in _due(agent.requests, round):
        refresh_rate = net.ledger.active_policy(plan.resource).refresh_rate
        _, response, outcome = _use(
            agent, net, plan, round, tally, rule=lambda r, u: Outcome.NEGATIVE
        )
        if response is not None:
            unfair = response.staleness < refresh_rate
            records.append(ActionRecord(round, agent.name, "bad_mouth", unfair, outcome))
    target = agent.profile.target
    if target and agent.requests:
        # impersonation attempt: claim the target's identity on a request
        victim = next((n for n in net.nodes.values() if n.name == target), None)
        if victim is not None:
            try:
                net.sc_authorize(agent.node, agent.requests[0].resource, agent.requests[0].actions,
                                 round, requester=victim.node_id)
            except SignatureError:
                tally["rejected:Impersonation"] += 1
                records.append(ActionRecord(round, agent.name, "impersonate", True, "rejected"))
    return records


def _ballot_stuff(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    records = []
    for plan in _due(agent.requests, round):
        refresh_rate = net.ledger.active_policy(plan.resource).refresh_rate
        _, response, outcome = _use(
            agent, net, plan, round, tally, rule=lambda r, u: Outcome.POSITIVE
        )
        if response is not None:
            unearned = response.staleness >= refresh_rate
            records.append(ActionRecord(round, agent.name, "stuff_ballot", unearned, outcome))
    return records


def _self_promote(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    records = []
    for plan in _due(agent.requests, round):
        owner = net.ledger.resource_owner(plan.resource)
        _, response, outcome = _use(
            agent, net, plan, round, tally, rule=lambda r, u: Outcome.POSITIVE
        )
        if response is not None:
            self_dealing = owner == agent.node.node_id
            records.append(ActionRecord(round, agent.name, "self_promote", self_dealing, outcome))
    return records


def _whitewash(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    records = _bad_mouth(agent, net, round, tally)
    if round % agent.profile.rejoin_every != 0 or agent.sidechain is None:
        return records
    agent.rejoins += 1
    # fresh key, same physical device
    fresh = Node.create(
        f"{agent.name}~{agent.rejoins}",
        agent.node.identity.roles,
        seed=f"{agent.seed}:rejoin:{agent.rejoins}",
        fingerprint=agent.node.identity.device_fingerprint,
    )
    net.add_node(fresh)
    side = net.ledger.sidechain(agent.sidechain)
    previous = net.ledger.registration_of(agent.node.node_id)
    attrs = AttributeSet(fresh.node_id, previous.tx.attributes.attributes if previous else frozenset())
    try:
        net.submit_registration(fresh, net.nodes[side.authorities[0]], agent.sidechain, attrs, round)
        result = "registered"
    except DuplicateIdentity:
        tally["rejected:DuplicateIdentity"] += 1
        result = "DuplicateIdentity"
    records.append(ActionRecord(round, agent.name, "rejoin", True, result))
    for plan in agent.requests[:1]:
        try:
            net.sc_authorize(fresh, plan.resource, plan.actions, round)
            tally["tokens_issued"] += 1
            result = "granted"
        except AccessDenied as exc:
            tally[f"denied:{exc.reason.value}"] += 1
            result = exc.reason.value
        records.append(ActionRecord(round, agent.name, "rejoin_access", True, result))
    return records


def _replay(agent: Agent, net: Network, round: int, tally: Counter, agents: Mapping[str, Agent]) -> list[ActionRecord]:
    records = consumer_step(agent, net, round, tally)
    victim = agents.get(agent.profile.target or "")
    if victim is None or not victim.last_messages:
        return records
    captured = victim.last_messages[-1]
    # verbatim replay of the captured request
    try:
        net.dds_serve(captured, round)
        result = "served"
    except TokenRejected as exc:
        tally[f"rejected:{exc.reason.value}"] += 1
        result = exc.reason.value
    records.append(ActionRecord(round, agent.name, "replay_request", True, result))
    # captured token presented under the attacker's own key
    try:
        net.request_access(agent.node, captured.token, round)
        result = "served"
    except TokenRejected as exc:
        tally[f"rejected:{exc.reason.value}"] += 1
        result = exc.reason.value
    records.append(ActionRecord(round, agent.name, "replay_token", True, result))
    return records


def _dos(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    records = []
    for plan in _due(agent.requests, round):
        limit = net.ledger.active_policy(plan.resource).rate_limit
        before = tally["rejected:RateViolation"]
        _, _, outcome = _use(agent, net, plan, round, tally, accesses=limit + agent.profile.burst)
        flooded = tally["rejected:RateViolation"] > before
        records.append(ActionRecord(round, agent.name, "flood", flooded, outcome))
    return records


def _forge(agent: Agent, net: Network, round: int, tally: Counter) -> list[ActionRecord]:
    records = []
    for plan in _due(agent.requests, round):
        for _ in range(agent.profile.burst):
            fake = AccessToken(
                token_id=digest(net.rng.randbytes(16)),
                expiry=round + net.token_lifetime,
                rate_limit=net.ledger.active_policy(plan.resource).rate_limit,
                issued_at=round,
                holder=agent.node.node_id,
                resource=plan.resource,
            )
            try:
                net.request_access(agent.node, fake, round)
                result = "served"
            except TokenRejected as exc:
                tally[f"rejected:{exc.reason.value}"] += 1
                result = exc.reason.value
            records.append(ActionRecord(round, agent.name, "forged_token", True, result))
    return records


def attack_step(
    agent: Agent, net: Network, round: int, tally: Counter, agents: Mapping[str, Agent] | None = None
) -> list[ActionRecord]:
    """Run one round of the agent's scripted adversarial behavior."""
    kind = agent.profile.kind
    agent.last_messages = []
    if kind is ProfileKind.BAD_MOUTHER:
        records = _bad_mouth(agent, net, round, tally)
    elif kind is ProfileKind.BALLOT_STUFFER:
        records = _ballot_stuff(agent, net, round, tally)
    elif kind is ProfileKind.SELF_PROMOTER:
        records = _self_promote(agent, net, round, tally)
    elif kind is ProfileKind.WHITEWASHER:
        records = _whitewash(agent, net, round, tally)
    elif kind is ProfileKind.REPLAY:
        records = _replay(agent, net, round, tally, agents or {})
    elif kind is ProfileKind.DOS:
        records = _dos(agent, net, round, tally)
    elif kind is ProfileKind.FORGED_TOKEN:
        records = _forge(agent, net, round, tally)
    else:
        # provider-side profiles misbehave in sp_refresh; as consumers they act honestly
        records = consumer_step(agent, net, round, tally)
    return agent.mark(records)

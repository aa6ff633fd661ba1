"""Acceptance checks: oracle comparisons, property sweeps and seeded scenarios.

Each ``check_*`` function returns a ``CriterionResult``. ``run_all`` runs
them in order; the CLI and the acceptance tests both use it.
"""

from __future__ import annotations

import functools
import gc
import itertools
import math
import random
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable

from .abac import AccessPolicy, Action, Attribute, AttributeSet
from .actors import Network, Node, ProfileKind, Role
from .ledger import DataEvidence, LedgerError, RegistrationState, SealTx
from .scenario import export, parse_config, reference_curves, run
from .scenario.engine import RunResult
from .scenario.presets import (
    ATTACKER,
    CONTAINMENT_PROFILES,
    HONEST,
    containment,
    honest_pair,
    offline_provider,
    provider_attack,
)
from .trs import (
    Direction,
    Outcome,
    ReputationParams,
    TrustParams,
    TrustState,
    reputation,
    trust_direct,
    trust_update,
)

# Faults that can be injected to prove the harness reports failures.
FAULTS = ("bounds",)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str = ""
    counterexample: Any = None
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.2f}s)"


# -- shared inputs -------------------------------------------------------------


def fuzz_sequences(count: int = 1000, max_len: int = 200, seed: int = 20240601) -> list[list[Outcome]]:
    rng = random.Random(seed)
    outcomes = (Outcome.POSITIVE, Outcome.NEGATIVE)
    return [[rng.choice(outcomes) for _ in range(rng.randint(0, max_len))] for _ in range(count)]


def fuzz_params(count: int = 20, seed: int = 20240602) -> list[TrustParams]:
    rng = random.Random(seed)
    params = []
    while len(params) < count:
        pos = rng.uniform(0.05, 5.0)
        params.append(TrustParams(rng.uniform(0.01, 0.99), pos, -rng.uniform(pos * 1.001, 10.0)))
    return params


def fold(outcomes: Iterable[Outcome], params: TrustParams) -> list[float]:
    """Score after each step of the recursion, starting from a fresh state."""
    state = TrustState("sp", "sc", Direction.SP_TRUSTS_SC)
    scores = []
    for o in outcomes:
        state = trust_update(state, o, params)
        scores.append(state.score)
    return scores


@functools.lru_cache(maxsize=None)
def scenario_runs() -> dict[str, RunResult]:
    """Every agent scenario the suite looks at, run once and shared."""
    trees = {f"containment:{k.value}": containment(k) for k in CONTAINMENT_PROFILES}
    trees["provider:UnreliableSP"] = provider_attack(ProfileKind.UNRELIABLE_SP)
    trees["provider:TurncoatSP"] = provider_attack(ProfileKind.TURNCOAT_SP)
    trees["honest_pair"] = honest_pair(rounds=30, fee=10)
    trees["offline"] = offline_provider()
    trees["online"] = offline_provider(offline=False)
    return {name: run(parse_config(tree)) for name, tree in trees.items()}


# -- 1. recursion oracle -------------------------------------------------------


def check_recursion_oracle(tolerance: float = 1e-9, budget: float = 5.0) -> CriterionResult:
    start = time.perf_counter()
    seqs, params = fuzz_sequences(), fuzz_params()
    worst, example = 0.0, None
    fresh = TrustState("sp", "sc", Direction.SP_TRUSTS_SC)
    # The sweep allocates millions of acyclic states; cycle collection only
    # rescans whatever else the process holds.
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for p in params:
            for seq in seqs:
                state = fresh
                for o in seq:
                    state = trust_update(state, o, p)
                err = abs(state.score - trust_direct(seq, p))
                if err > worst:
                    worst = err
                    if err > tolerance and example is None:
                        example = {"params": p, "outcomes": [o.value for o in seq], "error": err}
    finally:
        if gc_was_enabled:
            gc.enable()
    elapsed = time.perf_counter() - start
    passed = worst <= tolerance and elapsed < budget
    if example is None and elapsed >= budget:
        example = {"elapsed_seconds": elapsed, "budget": budget}
    detail = f"{len(seqs)}x{len(params)} folds, max |diff| {worst:.2e}, {elapsed:.2f}s of {budget:.0f}s"
    return CriterionResult(1, "recursion oracle", passed, detail, example)


# -- 2. bounds -----------------------------------------------------------------


def check_bounds(inject: bool = False) -> CriterionResult:
    seqs, params = fuzz_sequences(), fuzz_params()
    checked = 0
    for p in params:
        for seq in seqs:
            samples = fold(seq, p)
            if inject and samples:
                # the fuzz stub deliberately overshoots the upper bound
                samples[-1] = p.weight_pos + 1.0
                inject = False
            for i, s in enumerate(samples):
                checked += 1
                if not p.weight_neg <= s <= p.weight_pos:
                    cx = {"params": p, "outcomes": [o.value for o in seq[: i + 1]], "score": s}
                    return CriterionResult(2, "bounds", False, "fuzzed trust out of range", cx)

    for name, result in scenario_runs().items():
        trs = result.network.trs
        for state in trs.states():
            p = trs.params_for(state.direction)
            checked += 1
            if not p.weight_neg <= state.score <= p.weight_pos:
                return CriterionResult(2, "bounds", False, f"{name}: final trust out of range", state)
        m = result.metrics
        for r, row in zip(m.rounds, m.trust):
            for col, s in row.items():
                p = trs.sc_params if col.startswith("sp:") else trs.sp_params
                checked += 1
                if not p.weight_neg <= s <= p.weight_pos:
                    cx = {"scenario": name, "round": r, "column": col, "score": s}
                    return CriterionResult(2, "bounds", False, "agent trust out of range", cx)
        a = trs.reputation_params.asymptote
        for r, row in zip(m.rounds, m.reputation):
            for col, v in row.items():
                checked += 1
                if not (v == 0.0 or 0.0 < v <= a):
                    cx = {"scenario": name, "round": r, "column": col, "reputation": v}
                    return CriterionResult(2, "bounds", False, "reputation out of range", cx)
    return CriterionResult(2, "bounds", True, f"{checked} trust and reputation samples in range")


# -- 3. trust vs aging factor ---------------------------------------------------


def check_trust_vs_gamma(tolerance: float = 1e-9) -> CriterionResult:
    gammas = (0.6, 0.7, 0.8, 0.9)
    t_max = max(math.ceil(math.log(1e-3) / math.log(g)) for g in gammas) + 5
    table = reference_curves("TrustVsGamma", {"gammas": gammas, "t_max": t_max})
    curves = list(table.series.values())
    for g, curve in zip(gammas, curves):
        for t, v in enumerate(curve):
            if abs(v - (1.0 - g**t)) > tolerance:
                return CriterionResult(3, "trust vs gamma", False, "closed form mismatch",
                                       {"gamma": g, "t": t, "curve": v, "closed_form": 1 - g**t})
        reach = math.ceil(math.log(1e-3) / math.log(g))
        if abs(1.0 - curve[reach]) > 1e-3:
            return CriterionResult(3, "trust vs gamma", False, "too slow",
                                   {"gamma": g, "t": reach, "curve": curve[reach]})
    for t in range(1, t_max + 1):
        column = [c[t] for c in curves]
        if any(lo <= hi for lo, hi in zip(column, column[1:])):
            return CriterionResult(3, "trust vs gamma", False, "curves not ordered",
                                   {"t": t, "values": dict(zip(gammas, column))})

    # the agent run must trace the same curve for its aging factor
    agent = scenario_runs()["honest_pair"].metrics.series("trust", f"sp:sp1>sc:{HONEST}")
    for t, v in enumerate(agent, start=1):
        if abs(v - (1.0 - 0.8**t)) > tolerance:
            return CriterionResult(3, "trust vs gamma", False, "agent run off the analytic curve",
                                   {"round": t, "agent": v, "closed_form": 1 - 0.8**t})
    return CriterionResult(3, "trust vs gamma", True,
                           f"4 curves match 1-g^t, ordered, converge; agent run agrees for {len(agent)} rounds")


# -- 4. aggregate and reputation vs peers --------------------------------------


def check_peers() -> CriterionResult:
    agg = reference_curves("AggregateVsPeers", {"taus": [1.0], "max_peers": 64})
    rep = reference_curves("ReputationVsPeers", {"taus": [1.0], "max_peers": 64})
    a_vals, r_vals = agg.series["trust=1"], rep.series["trust=1"]
    for n, a in zip(agg.x, a_vals):
        if abs(a - math.log(n)) > 1e-12:
            return CriterionResult(4, "peers", False, "aggregate is not ln n", {"n": n, "aggregate": a})
    for n, lo, hi in zip(rep.x[1:], r_vals, r_vals[1:]):
        if not hi > lo:
            return CriterionResult(4, "peers", False, "reputation not increasing", {"n": n, "prev": lo, "value": hi})
    if abs(r_vals[1] - math.exp(-1.0)) > 1e-9:
        return CriterionResult(4, "peers", False, "R(2) != 1/e", {"reputation": r_vals[1]})
    far = reference_curves("ReputationVsPeers", {"taus": [1.0], "max_peers": 512}).series["trust=1"]
    far.append(reputation(math.log(1e12), True, ReputationParams()))
    if max(far) > 1.0:
        return CriterionResult(4, "peers", False, "reputation above its asymptote", {"max": max(far)})
    return CriterionResult(4, "peers", True, f"A=ln n for n<=64, R increasing, R(2)={r_vals[1]:.12f}, sup<=1")


# -- 5. honest, malicious and turncoat providers --------------------------------


def check_turncoat() -> CriterionResult:
    table = reference_curves("HonestMaliciousTurncoat", {"switch_round": 40, "t_max": 60})
    honest, bad, turn = table.series["honest"], table.series["malicious"], table.series["turncoat"]

    def fail(msg: str, **cx) -> CriterionResult:
        return CriterionResult(5, "honest/malicious/turncoat", False, msg, cx)

    for t in range(21, 61):
        if honest[t] < 0.99:
            return fail("honest below 0.99", t=t, score=honest[t])
        if bad[t] > -2.97:
            return fail("malicious above -2.97", t=t, score=bad[t])
    for t in range(0, 41):
        if turn[t] != honest[t]:
            return fail("turncoat departs early", t=t, turncoat=turn[t], honest=honest[t])
    if not turn[42] < 0.0:
        return fail("turncoat still positive at 42", score=turn[42])
    if abs(turn[55] + 3.0) > 0.15:
        return fail("turncoat not near -3 at 55", score=turn[55])
    return CriterionResult(
        5, "honest/malicious/turncoat", True,
        f"T41={turn[41]:.4f}, T42={turn[42]:.4f}, T55={turn[55]:.4f}",
    )


# -- 6. quorum safety -----------------------------------------------------------


def check_quorum(schedules: int = 200, seed: int = 6) -> CriterionResult:
    rng = random.Random(seed)
    sealed = 0
    for f in (1, 2, 3):
        for trial in range(schedules):
            ledger, authorities, handle = _registration_fixture(f, rng.randint(3 * f + 1, 3 * f + 3), trial)
            threshold = 2 * f + 1
            outsider = Node.create("outsider", {Role.AA}, seed=f"outsider:{trial}")
            ledger.register_key(outsider.identity.public_key)
            reg = ledger.registration(handle)
            events = [("endorse", a) for a in rng.sample(authorities, rng.randint(0, len(authorities)))]
            for _ in range(rng.randint(0, 4)):
                events.insert(rng.randint(0, len(events)), rng.choice(
                    [("endorse", rng.choice(authorities)), ("endorse", outsider), ("seal", None)]
                ))
            events.append(("seal", None))
            for op, who in events:
                before = len(reg.endorsements)
                try:
                    if op == "endorse":
                        ledger.endorse(handle, who.node_id, who.sign(reg.reg_hash), 0)
                    else:
                        ledger.seal(handle, 0)
                        if before < threshold:
                            return CriterionResult(6, "quorum safety", False, "sealed below threshold",
                                                   {"f": f, "endorsers": before, "events": _ops(events)})
                except LedgerError:
                    if op == "seal" and before >= threshold and reg.state is not RegistrationState.SEALED:
                        return CriterionResult(6, "quorum safety", False, "seal refused with quorum",
                                               {"f": f, "endorsers": before, "events": _ops(events)})
            for rec in ledger.main:
                if isinstance(rec.payload, SealTx):
                    sealed += 1
                    distinct = {e.endorser for e in rec.payload.endorsements}
                    if len(distinct) < threshold or not distinct <= {a.node_id for a in authorities}:
                        return CriterionResult(6, "quorum safety", False, "SealTx lacks quorum",
                                               {"f": f, "endorsers": sorted(distinct)})

        # exactly 2f+1 endorsements must be enough
        ledger, authorities, handle = _registration_fixture(f, 3 * f + 1, -1)
        reg = ledger.registration(handle)
        for a in authorities[: 2 * f + 1]:
            ledger.endorse(handle, a.node_id, a.sign(reg.reg_hash), 0)
        try:
            ledger.seal(handle, 0)
        except LedgerError as exc:
            return CriterionResult(6, "quorum safety", False, "exact quorum refused", {"f": f, "error": str(exc)})
    return CriterionResult(6, "quorum safety", True, f"{3 * schedules} schedules, {sealed} seals, all with >=2f+1")


def _ops(events) -> list[str]:
    return [op if who is None else f"{op}:{who.name}" for op, who in events]


def _registration_fixture(f: int, n_authorities: int, trial: int):
    """A pending registration on a sidechain run by ``n_authorities`` authorities."""
    net = Network()
    authorities = [
        net.add_node(Node.create(f"aa{i}", {Role.AA}, seed=f"q{f}:{trial}:aa{i}"))
        for i in range(n_authorities)
    ]
    side = net.add_sidechain(authorities, f)
    sc = net.add_node(Node.create("sc", {Role.SC}, seed=f"q{f}:{trial}:sc"))
    attrs = AttributeSet(sc.node_id, frozenset({Attribute("org", "str", "lab")}))
    handle = net.submit_registration(sc, authorities[0], side, attrs, 0)
    return net.ledger, authorities, handle


# -- 7. feedback settlement truth table ------------------------------------------


@dataclass
class ProtocolFixture:
    net: Network
    sp: Node
    sc: Node
    dds: Node
    resource: str = "temp"

    @property
    def policy(self) -> AccessPolicy:
        return self.net.ledger.active_policy(self.resource)

    def balances(self) -> tuple[int, int, int]:
        b = self.net.ledger.balance
        return b(self.sp.node_id), b(self.sc.node_id), self.net.ledger.escrow_held


def protocol_fixture(
    fee: int = 10, refresh_rate: int = 10, balance: int = 1000, seed: str = "fx", min_trust: float = 0.0
) -> ProtocolFixture:
    """One provider, one consumer with sealed attributes, one store and one authority."""
    net = Network(rng=random.Random(seed))
    sp = net.add_node(Node.create("sp", {Role.SP}, seed=f"{seed}:sp"))
    sc = net.add_node(Node.create("sc", {Role.SC}, seed=f"{seed}:sc"))
    dds = net.add_node(Node.create("dds", {Role.DDS}, seed=f"{seed}:dds"))
    aa = net.add_node(Node.create("aa", {Role.AA}, seed=f"{seed}:aa"))
    side = net.add_sidechain([aa], 0)
    net.register_attributes(sc, side, [], 0)
    net.ledger.mint(sc.node_id, balance, 0)
    policy = AccessPolicy(
        "temp", sp.node_id, frozenset({Action.READ}), refresh_rate=refresh_rate, fee=fee, min_trust=min_trust
    )
    net.sp_publish(sp, policy, 0)
    net.place("temp", dds.node_id)
    net.sp_refresh(sp, "temp", 0)
    return ProtocolFixture(net, sp, sc, dds)


def feedback_cell(stale: bool, feedback: Outcome, valid: bool, duplicate: bool) -> dict[str, Any]:
    """Play one feedback transaction and report what changed."""
    fx = protocol_fixture(refresh_rate=10, seed=f"cell:{stale}:{feedback.value}:{valid}:{duplicate}")
    net, trs = fx.net, fx.net.trs
    access_round = 10 if stale else 9  # staleness U_r or U_r - 1
    token = net.sc_authorize(fx.sc, "temp", {Action.READ}, access_round)
    _, response = net.request_access(fx.sc, token, access_round)
    if not valid:
        ev = response.evidence
        forged = DataEvidence(
            ev.resource, ev.payload_digest, ev.last_update, ev.sp_signature[:-1] + bytes([ev.sp_signature[-1] ^ 1]),
            ev.token_id, ev.access_timestamp, ev.dds, ev.dds_signature,
        )
        response = type(response)(response.payload, forged)
    tx = net.make_feedback(fx.sc, token, response, feedback)
    if duplicate:
        net.process_feedback(tx, access_round)
    sc_trust = trs.score(fx.sp.node_id, fx.sc.node_id, Direction.SP_TRUSTS_SC)
    sp_state = trs.state(fx.sc.node_id, fx.sp.node_id, Direction.SC_TRUSTS_SP)
    before = fx.balances()
    result = net.process_feedback(tx, access_round)
    after = fx.balances()
    return {
        "outcome": result.outcome,
        "escrow_to": {fx.sc.node_id: "SC", fx.sp.node_id: "SP", None: None}[result.escrow_to],
        "sc_trust_delta": trs.score(fx.sp.node_id, fx.sc.node_id, Direction.SP_TRUSTS_SC) - sc_trust,
        "sp_interactions_delta": trs.state(fx.sc.node_id, fx.sp.node_id, Direction.SC_TRUSTS_SP).interactions
        - sp_state.interactions,
        "balance_delta": tuple(a - b for a, b in zip(after, before)),
    }


def expected_cell(stale: bool, feedback: Outcome, valid: bool, duplicate: bool) -> dict[str, Any]:
    if duplicate:
        return {"outcome": "duplicate", "escrow_to": None, "sc_trust_delta": 0.0,
                "sp_interactions_delta": 0, "balance_delta": (0, 0, 0)}
    truthful = valid and (feedback is (Outcome.NEGATIVE if stale else Outcome.POSITIVE))
    if truthful:
        return {"outcome": "accepted", "escrow_to": "SC", "sc_trust_delta": 0.0,
                "sp_interactions_delta": 1, "balance_delta": (0, 5, -5)}
    # penalized: one negative step from the score after the issuance positive (0.2)
    return {"outcome": "penalized", "escrow_to": "SP", "sc_trust_delta": (0.8 * 0.2 - 0.6) - 0.2,
            "sp_interactions_delta": 0, "balance_delta": (5, 0, -5)}


def check_feedback_table() -> CriterionResult:
    cells = list(itertools.product((False, True), (Outcome.POSITIVE, Outcome.NEGATIVE), (True, False), (False, True)))
    for cell in cells:
        got, want = feedback_cell(*cell), expected_cell(*cell)
        same = (
            got["outcome"] == want["outcome"]
            and got["escrow_to"] == want["escrow_to"]
            and abs(got["sc_trust_delta"] - want["sc_trust_delta"]) <= 1e-12
            and got["sp_interactions_delta"] == want["sp_interactions_delta"]
            and got["balance_delta"] == want["balance_delta"]
        )
        if not same:
            stale, fb, valid, dup = cell
            cx = {"stale": stale, "feedback": fb.value, "evidence_valid": valid, "duplicate": dup,
                  "got": got, "want": want}
            return CriterionResult(7, "feedback settlement", False, "cell mismatch", cx)
    return CriterionResult(7, "feedback settlement", True, f"{len(cells)} cells match, duplicates ignored")


# -- 8. attack containment ------------------------------------------------------


def relevant_scores(kind: ProfileKind, result: RunResult) -> tuple[list[float], list[float]]:
    """The attacker's score and the matched honest agent's score, per round."""
    m = result.metrics
    if kind is ProfileKind.SELF_PROMOTER:
        return m.series("reputation", f"{ATTACKER}:sp"), m.series("reputation", "sp1:sp")
    if kind in (ProfileKind.UNRELIABLE_SP, ProfileKind.TURNCOAT_SP):
        return (m.series("trust", f"sc:{HONEST}>sp:{ATTACKER}"),
                m.series("trust", f"sc:{HONEST}>sp:sp_honest"))
    sp = "sp2" if kind is ProfileKind.BALLOT_STUFFER else "sp1"
    return m.series("trust", f"sp:{sp}>sc:{ATTACKER}"), m.series("trust", f"sp:{sp}>sc:{HONEST}")


def check_containment() -> CriterionResult:
    runs = scenario_runs()
    floor = math.exp(-4.0)
    notes = []
    for kind in CONTAINMENT_PROFILES:
        result = runs[f"containment:{kind.value}"]
        first = result.metrics.first_attack.get(ATTACKER)
        if first is None:
            return CriterionResult(8, "attack containment", False, f"{kind.value} never attacked", {"profile": kind.value})
        attacker, honest = relevant_scores(kind, result)
        for r, a, h in zip(result.metrics.rounds, attacker, honest):
            if r >= first and not a < h:
                cx = {"profile": kind.value, "round": r, "attacker": a, "honest": h, "first_attack": first}
                return CriterionResult(8, "attack containment", False, "attacker not below honest", cx)
        if kind is ProfileKind.SELF_PROMOTER:
            top = max(attacker)
            if top > floor + 1e-9:
                return CriterionResult(8, "attack containment", False, "self-promoter above e^-4",
                                       {"reputation": top, "bound": floor})
        notes.append(f"{kind.value}@{first}")
    return CriterionResult(8, "attack containment", True, f"{len(notes)} profiles contained: " + ", ".join(notes))


# -- 9. economics -----------------------------------------------------------------


def check_economics(cycles: int = 5) -> CriterionResult:
    for name, result in scenario_runs().items():
        m = result.metrics
        for r, row in zip(m.rounds, m.balances):
            if sum(row.values()) != m.minted:
                return CriterionResult(9, "economics", False, "currency not conserved",
                                       {"scenario": name, "round": r, "balances": row, "minted": m.minted})

    for honest in (True, False):
        # no trust floor, so a misbehaving consumer keeps getting tokens
        fx = protocol_fixture(fee=10, seed=f"econ:{honest}", min_trust=-3.0)
        net = fx.net
        for round in range(1, cycles + 1):
            net.sp_refresh(fx.sp, "temp", round)
            sp0, sc0, _ = fx.balances()
            token = net.sc_authorize(fx.sc, "temp", {Action.READ}, round)
            _, response = net.request_access(fx.sc, token, round)
            # data is fresh, so positive is the honest verdict
            verdict = Outcome.POSITIVE if honest else Outcome.NEGATIVE
            net.process_feedback(net.make_feedback(fx.sc, token, response, verdict), round)
            sp1, sc1, held = fx.balances()
            want = (5, -5) if honest else (10, -10)
            if (sp1 - sp0, sc1 - sc0) != want or held != 0:
                cx = {"honest": honest, "round": round, "sp_delta": sp1 - sp0, "sc_delta": sc1 - sc0,
                      "escrow": held, "want": want}
                return CriterionResult(9, "economics", False, "cycle nets wrong amounts", cx)
    return CriterionResult(9, "economics", True,
                           f"conserved in {len(scenario_runs())} scenarios; cycles net +5/-5 and +10/-10")


# -- 10. determinism and asynchrony -------------------------------------------------


def _export_bytes(result: RunResult, directory: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in export(result, directory)}


def check_determinism() -> CriterionResult:
    trees = {"containment:BadMouther": containment(ProfileKind.BAD_MOUTHER, rounds=30),
             "provider:UnreliableSP": provider_attack(ProfileKind.UNRELIABLE_SP, rounds=30, switch_round=10)}
    trees["provider:UnreliableSP"]["nodes"][1]["profile"]["skip_rate"] = 0.5
    with tempfile.TemporaryDirectory() as tmp:
        for name, tree in trees.items():
            first = _export_bytes(run(parse_config(tree)), Path(tmp) / name / "a")
            second = _export_bytes(run(parse_config(tree)), Path(tmp) / name / "b")
            if first != second:
                diff = sorted(k for k in first if first[k] != second.get(k))
                return CriterionResult(10, "determinism and asynchrony", False, "exports differ",
                                       {"scenario": name, "files": diff})

    runs = scenario_runs()
    offline, online = runs["offline"], runs["online"]
    sp_id = offline.network.ledger.resource_owner("temp")
    rounds = offline.metrics.rounds
    if any(offline.network.is_online(sp_id, r) for r in rounds):
        return CriterionResult(10, "determinism and asynchrony", False, "provider was online", {})
    off_tokens = {t.digest() for t in offline.network.ledger.tokens.values()}
    on_tokens = {t.digest() for t in online.network.ledger.tokens.values()}
    if off_tokens != on_tokens or not off_tokens:
        cx = {"only_offline": sorted(off_tokens - on_tokens), "only_online": sorted(on_tokens - off_tokens)}
        return CriterionResult(10, "determinism and asynchrony", False, "token sets differ", cx)
    return CriterionResult(10, "determinism and asynchrony", True,
                           f"byte-identical re-runs; {len(off_tokens)} tokens issued with the provider offline")


CHECKS: list[tuple[int, Callable[..., CriterionResult]]] = [
    (1, check_recursion_oracle),
    (2, check_bounds),
    (3, check_trust_vs_gamma),
    (4, check_peers),
    (5, check_turncoat),
    (6, check_quorum),
    (7, check_feedback_table),
    (8, check_containment),
    (9, check_economics),
    (10, check_determinism),
]


def run_check(number: int, faults: Iterable[str] = ()) -> CriterionResult:
    fn = dict(CHECKS)[number]
    start = time.perf_counter()
    try:
        result = fn(inject=True) if number == 2 and "bounds" in set(faults) else fn()
    except Exception as exc:  # a crash is a failure, reported like any other
        result = CriterionResult(number, fn.__name__.removeprefix("check_"), False,
                                 f"raised {type(exc).__name__}", {"error": str(exc)})
    result.seconds = time.perf_counter() - start
    return result


def run_all(faults: Iterable[str] = ()) -> list[CriterionResult]:
    faults = set(faults)
    unknown = faults - set(FAULTS)
    if unknown:
        raise ValueError(f"unknown faults: {', '.join(sorted(unknown))}")
    return [run_check(n, faults) for n, _ in CHECKS]

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bctrs.abac import AccessPolicy, Action, Attribute, AttributeSet
from bctrs.actors import Network, Node, Role
from bctrs.crypto import KeyPair, digest, verify
from bctrs.ledger import (
    MAIN,
    AlreadySealed,
    ChainId,
    DoubleEndorse,
    DuplicateIdentity,
    Event,
    InsufficientBalance,
    Ledger,
    LedgerError,
    NotAuthority,
    NotEndorsed,
    NotFound,
    NotOwner,
    PolicyTx,
    QuorumConfig,
    RegistrationState,
    SealTx,
    SignatureError,
)

ORG = Attribute("org", "str", "lab")


def make_net(n_aa=4, f=1, sidechains=1):
    net = Network()
    sides = []
    for s in range(sidechains):
        aas = [net.add_node(Node.create(f"aa{s}.{i}", {Role.AA}, seed=f"aa{s}.{i}")) for i in range(n_aa)]
        sides.append((net.add_sidechain(aas, f), aas))
    return net, sides


def consumer(net, name="sc", device=None):
    return net.add_node(Node.create(name, {Role.SC}, seed=name, device=device))


def submit(net, sc, side, aas, attrs=(ORG,)):
    return net.submit_registration(sc, aas[0], side, AttributeSet(sc.node_id, frozenset(attrs)), 0)


def endorse(net, handle, aa):
    reg = net.ledger.registration(handle)
    return net.ledger.endorse(handle, aa.node_id, aa.sign(reg.reg_hash), 0)


# -- crypto -------------------------------------------------------------------


def test_signatures_are_deterministic_and_checked():
    k = KeyPair.from_seed("x")
    assert k.sign({"a": 1}) == KeyPair.from_seed("x").sign({"a": 1})
    assert verify(k.public_key, {"a": 1}, k.sign({"a": 1}))
    assert not verify(k.public_key, {"a": 2}, k.sign({"a": 1}))
    assert not verify(KeyPair.from_seed("y").public_key, {"a": 1}, k.sign({"a": 1}))
    assert not verify(k.public_key, {"a": 1}, None)


def test_digest_ignores_set_and_dict_order():
    assert digest({"b": 1, "a": frozenset({3, 1, 2})}) == digest({"a": frozenset({2, 3, 1}), "b": 1})


# -- registration --------------------------------------------------------------


def test_quorum_config():
    assert QuorumConfig(1, 4).threshold == 3
    with pytest.raises(ValueError):
        QuorumConfig(1, 3)
    with pytest.raises(ValueError):
        make_net(n_aa=3, f=1)


def test_registration_workflow():
    net, [(side, aas)] = make_net()
    sc = consumer(net)
    handle = submit(net, sc, side, aas)
    reg = net.ledger.registration(handle)
    assert reg.state is RegistrationState.PENDING and not reg.endorsements
    assert endorse(net, handle, aas[0]) is RegistrationState.PENDING
    assert endorse(net, handle, aas[1]) is RegistrationState.PENDING
    with pytest.raises(NotEndorsed):
        net.ledger.seal(handle, 0)
    with pytest.raises(DoubleEndorse):
        endorse(net, handle, aas[1])
    assert endorse(net, handle, aas[2]) is RegistrationState.ENDORSED
    record = net.ledger.seal(handle, 0)
    assert isinstance(record.payload, SealTx) and record.chain == MAIN
    assert len(record.payload.endorsements) == 3
    with pytest.raises(AlreadySealed):
        net.ledger.seal(handle, 0)
    response = net.ledger.bridge_lookup(sc.node_id, 1)
    assert response.sidechain == side.index
    assert record.payload.attr_hash == response.attributes.digest()


def test_outsider_cannot_endorse():
    net, [(side, aas)] = make_net()
    sc = consumer(net)
    handle = submit(net, sc, side, aas)
    outsider = net.add_node(Node.create("x", {Role.AA}, seed="outsider"))
    with pytest.raises(NotAuthority):
        endorse(net, handle, outsider)
    with pytest.raises(NotAuthority):
        net.submit_registration(sc, outsider, side, AttributeSet(sc.node_id, frozenset()), 0)


def test_bad_signatures_rejected():
    net, [(side, aas)] = make_net()
    sc = consumer(net)
    attrs = AttributeSet(sc.node_id, frozenset({ORG}))
    with pytest.raises(SignatureError):
        net.ledger.submit_registration(side, attrs, sc.identity.device_fingerprint, b"\0" * 64,
                                       aas[0].node_id, b"\0" * 64, 0)
    handle = submit(net, sc, side, aas)
    with pytest.raises(SignatureError):
        net.ledger.endorse(handle, aas[1].node_id, aas[2].sign("nope"), 0)


def test_duplicate_identity_by_device_and_owner():
    net, [(side, aas)] = make_net()
    sc = consumer(net, device="rpi-1")
    submit(net, sc, side, aas)
    # new key, same hardware
    twin = net.add_node(Node.create("sc2", {Role.SC}, seed="other", fingerprint=sc.identity.device_fingerprint))
    with pytest.raises(DuplicateIdentity):
        submit(net, twin, side, aas)
    with pytest.raises(DuplicateIdentity):
        submit(net, sc, side, aas)


def test_bridge_lookup_cases():
    net, sides = make_net(sidechains=2)
    (side1, aas1), (side2, aas2) = sides
    sealed = consumer(net, "sealed")
    handle = submit(net, sealed, side2, aas2)
    for aa in aas2[:3]:
        endorse(net, handle, aa)
    net.ledger.seal(handle, 0)
    assert net.ledger.bridge_lookup(sealed.node_id, 1).sidechain == 2

    pending = consumer(net, "pending")
    submit(net, pending, side1, aas1)
    with pytest.raises(NotFound):
        net.ledger.bridge_lookup(pending.node_id, 1)
    with pytest.raises(NotFound):
        net.ledger.bridge_lookup("nobody", 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.randoms(use_true_random=False))
def test_seal_never_below_quorum(f, rng):
    net, [(side, aas)] = make_net(n_aa=3 * f + 1 + rng.randint(0, 2), f=f)
    handle = submit(net, consumer(net), side, aas)
    order = rng.sample(aas, rng.randint(0, len(aas)))
    for aa in order:
        try:
            endorse(net, handle, aa)
            net.ledger.seal(handle, 0)
        except LedgerError:
            # below quorum, or endorsing a registration that is already sealed
            pass
    seals = [r.payload for r in net.ledger.main if isinstance(r.payload, SealTx)]
    assert len(seals) == (1 if len(order) >= 2 * f + 1 else 0)
    for seal in seals:
        assert len({e.endorser for e in seal.endorsements}) >= 2 * f + 1


# -- accounts and fees ---------------------------------------------------------


def test_fee_split():
    ledger = Ledger()
    ledger.mint("sc", 100)
    ledger.settle_fee("sc", "sp", 10, "t1", 1)
    assert (ledger.balance("sc"), ledger.balance("sp"), ledger.escrow_held) == (90, 5, 5)
    ledger.settle_fee("sc", "sp", 11, "t2", 1)
    assert (ledger.balance("sc"), ledger.balance("sp"), ledger.escrow_held) == (79, 11, 10)
    ledger.settle_fee("sc", "sp", 0, "t3", 1)
    assert ledger.escrow("t3").amount == 0 and ledger.balance("sc") == 79
    with pytest.raises(InsufficientBalance):
        ledger.settle_fee("sc", "sp", 1000, "t4", 1)
    with pytest.raises(LedgerError):
        ledger.settle_fee("sc", "sp", 1, "t1", 1)


def test_escrow_release_rules():
    ledger = Ledger()
    ledger.mint("sc", 20)
    ledger.settle_fee("sc", "sp", 10, "t", 1)
    with pytest.raises(LedgerError):
        ledger.release_escrow("t", "stranger", 1)
    assert ledger.release_escrow("t", "sc", 1) == 5
    assert ledger.balance("sc") == 15
    with pytest.raises(LedgerError):
        ledger.release_escrow("t", "sp", 1)
    with pytest.raises(NotFound):
        ledger.release_escrow("missing", "sp", 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 40), st.booleans()), max_size=30))
def test_currency_conserved(ops):
    ledger = Ledger()
    ledger.mint("sc", 300)
    ledger.mint("sp", 7)
    for i, (fee, to_sc) in enumerate(ops):
        try:
            ledger.settle_fee("sc", "sp", fee, f"t{i}", i)
        except InsufficientBalance:
            continue
        if i % 3:
            ledger.release_escrow(f"t{i}", "sc" if to_sc else "sp", i)
        assert sum(ledger.balances.values()) + ledger.escrow_held == ledger.minted
        assert all(v >= 0 for v in ledger.balances.values())


# -- policies --------------------------------------------------------------------


def test_policy_registration_and_replacement():
    net, _ = make_net()
    sp = net.add_node(Node.create("sp", {Role.SP}, seed="sp"))
    other = net.add_node(Node.create("sp2", {Role.SP}, seed="sp2"))
    first = AccessPolicy("temp", sp.node_id, frozenset({Action.READ}), fee=10)
    record = net.sp_publish(sp, first, 0)
    assert isinstance(record.payload, PolicyTx) and record.payload.timestamp == 0
    assert net.ledger.active_policy("temp") == first

    second = AccessPolicy("temp", sp.node_id, frozenset({Action.READ, Action.STREAM}), fee=4)
    net.sp_publish(sp, second, 3)
    assert net.ledger.active_policy("temp") == second

    hijack = AccessPolicy("temp", other.node_id, frozenset({Action.READ}))
    with pytest.raises(NotOwner):
        net.sp_publish(other, hijack, 4)
    with pytest.raises(SignatureError):
        net.ledger.register_policy(second, sp.node_id, other.sign(PolicyTx(second, 5)), 5)
    with pytest.raises(NotFound):
        net.ledger.active_policy("nothing")


# -- chains ----------------------------------------------------------------------


def test_chain_ids():
    assert MAIN.label == "MB" and ChainId(2).label == "pb2"
    with pytest.raises(LedgerError):
        Ledger().sidechain(ChainId(1))


def test_chains_are_append_only():
    ledger = Ledger()
    rng = random.Random(4)
    snapshots = []
    for r in range(30):
        for _ in range(rng.randint(0, 3)):
            ledger.main.append(r, Event("tick", {"r": r}))
        snapshots.append([(rec.seq, rec.payload_digest) for rec in ledger.main])
    for early, late in zip(snapshots, snapshots[1:]):
        assert late[: len(early)] == early
    seqs = [s for s, _ in snapshots[-1]]
    assert seqs == sorted(set(seqs))
    with pytest.raises(LedgerError):
        ledger.main.append(0, Event("late"))
    with pytest.raises(TypeError):
        ledger.main.append(40, "not a payload")


def test_trace_lines():
    ledger = Ledger()
    ledger.mint("sc", 5)
    [line] = ledger.trace()
    assert line["chain"] == "MB" and line["kind"] == "Event:mint" and line["seq"] == 0
    assert set(line) == {"chain", "seq", "round", "kind", "digest"}

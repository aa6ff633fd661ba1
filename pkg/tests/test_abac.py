import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bctrs.abac import (
    AccessDenied,
    AccessPolicy,
    AccessRequest,
    AccessToken,
    Action,
    Attribute,
    AttributeSet,
    DenialReason,
    PolicyError,
    RateWindow,
    RejectReason,
    TokenRejected,
    attributes_satisfy,
    check_rate,
    validate_access_request,
    verify_token,
)
from bctrs.trs import ReputationParams, TrustParams

LOC7 = Attribute("loc", "str", "bldg7")
LOC9 = Attribute("loc", "str", "bldg9")
HW = Attribute("hw", "str", "rpi3")
READ = frozenset({Action.READ})


def policy(**kw) -> AccessPolicy:
    base = dict(resource="temp", owner="sp", actions=READ, required_attributes={LOC7}, fee=10)
    base.update(kw)
    return AccessPolicy(**base)


def holder(*attrs) -> AttributeSet:
    return AttributeSet("sc", frozenset(attrs))


def validate(pol=None, *, actions=READ, trust=0.0, rep=0.0, balance=50, attrs=None, now=1, nonce=b"n"):
    pol = pol or policy()
    attrs = holder(LOC7, HW) if attrs is None else attrs
    return validate_access_request(
        pol, AccessRequest("sc", pol.resource, actions), trust, rep, balance, attrs, now, nonce=nonce
    )


# -- attributes --------------------------------------------------------------


def test_attributes_satisfy_examples():
    assert attributes_satisfy(policy(), holder(LOC7, HW))
    assert not attributes_satisfy(policy(), holder(LOC9))
    assert attributes_satisfy(policy(required_attributes=set()), holder(LOC9))
    assert attributes_satisfy(policy(required_attributes=set()), None)
    assert not attributes_satisfy(policy(), None)


def test_attribute_kind_must_match():
    assert not attributes_satisfy(policy(), holder(Attribute("loc", "int", "bldg7")))


def test_attribute_set_rejects_duplicate_slots():
    with pytest.raises(ValueError):
        holder(LOC7, LOC9)
    with pytest.raises(ValueError):
        Attribute("", "str", "x")


def test_policy_invariants():
    with pytest.raises(PolicyError):
        policy(actions=frozenset())
    with pytest.raises(PolicyError):
        policy(rate_limit=0)
    with pytest.raises(PolicyError):
        policy(valid_rounds=(5, 2))
    with pytest.raises(PolicyError):
        policy(min_trust=1.5).check_thresholds(TrustParams(), ReputationParams())
    with pytest.raises(PolicyError):
        policy(min_reputation=-0.1).check_thresholds(TrustParams(), ReputationParams())
    policy(min_trust=-3.0, min_reputation=1.0).check_thresholds(TrustParams(), ReputationParams())


# -- validation ----------------------------------------------------------------


def test_token_issued_when_all_conditions_hold():
    token = validate(now=7)
    assert (token.issued_at, token.expiry, token.rate_limit) == (7, 107, 5)
    assert token.holder == "sc" and token.resource == "temp"


@pytest.mark.parametrize(
    "kw, reason",
    [
        (dict(attrs=holder(LOC9)), DenialReason.ATTRIBUTE_MISMATCH),
        (dict(actions=frozenset({Action.WRITE})), DenialReason.ACTION_NOT_ALLOWED),
        (dict(trust=0.1, pol=policy(min_trust=0.5)), DenialReason.TRUST_TOO_LOW),
        (dict(rep=0.1, pol=policy(min_reputation=0.5)), DenialReason.REPUTATION_TOO_LOW),
        (dict(balance=5), DenialReason.INSUFFICIENT_BALANCE),
        (dict(now=20, pol=policy(valid_rounds=(0, 10))), DenialReason.OUTSIDE_CONTEXT),
    ],
)
def test_denials(kw, reason):
    with pytest.raises(AccessDenied) as info:
        validate(**kw)
    assert info.value.reason is reason


def test_unregistered_holder_is_attribute_mismatch():
    pol = policy()
    with pytest.raises(AccessDenied) as info:
        validate_access_request(pol, AccessRequest("sc", "temp", READ), 0, 0, 50, None, 1, nonce=b"n")
    assert info.value.reason is DenialReason.ATTRIBUTE_MISMATCH


def test_denial_order_reports_first_failure():
    with pytest.raises(AccessDenied) as info:
        validate(pol=policy(min_trust=0.5, valid_rounds=(0, 0)), trust=0.0, balance=0, now=3)
    assert info.value.reason is DenialReason.TRUST_TOO_LOW


def test_newcomer_passes_zero_threshold():
    validate(pol=policy(min_trust=0.0), trust=0.0)


def test_fresh_nonce_gives_fresh_token_id():
    assert validate(nonce=b"a").token_id != validate(nonce=b"b").token_id
    assert validate(nonce=b"a").token_id == validate(nonce=b"a").token_id


conditions = st.fixed_dictionaries(
    {
        "attrs_ok": st.booleans(),
        "actions": st.sets(st.sampled_from(list(Action)), min_size=1),
        "trust": st.floats(-3, 1),
        "min_trust": st.floats(-3, 1),
        "rep": st.floats(0, 1),
        "min_rep": st.floats(0, 1),
        "balance": st.integers(0, 30),
        "fee": st.integers(0, 30),
        "now": st.integers(0, 30),
        "window": st.tuples(st.integers(0, 15), st.integers(15, 30)),
    }
)


def _attempt(c):
    pol = policy(
        actions=frozenset({Action.READ, Action.STREAM}),
        min_trust=c["min_trust"], min_reputation=c["min_rep"], fee=c["fee"], valid_rounds=c["window"],
    )
    attrs = holder(LOC7) if c["attrs_ok"] else holder(LOC9)
    try:
        return validate(pol, actions=frozenset(c["actions"]), trust=c["trust"], rep=c["rep"],
                        balance=c["balance"], attrs=attrs, now=c["now"])
    except AccessDenied:
        return None


@settings(max_examples=300, deadline=None)
@given(conditions)
def test_validation_is_a_plain_conjunction(c):
    expected = (
        c["attrs_ok"]
        and set(c["actions"]) <= {Action.READ, Action.STREAM}
        and c["trust"] >= c["min_trust"]
        and c["rep"] >= c["min_rep"]
        and c["balance"] >= c["fee"]
        and c["window"][0] <= c["now"] <= c["window"][1]
    )
    token = _attempt(c)
    assert (token is not None) == expected
    if token is not None:
        assert token.resource == "temp"


@settings(max_examples=200, deadline=None)
@given(conditions, st.floats(0, 2), st.floats(0, 1))
def test_raising_thresholds_never_admits_more(c, bump_trust, bump_rep):
    stricter = dict(c, min_trust=min(1.0, c["min_trust"] + bump_trust), min_rep=min(1.0, c["min_rep"] + bump_rep))
    if _attempt(stricter) is not None:
        assert _attempt(c) is not None


# -- tokens ----------------------------------------------------------------------


def test_verify_token_cases():
    token = validate(now=1)
    registry = {token.token_id: token}
    verify_token(token, registry, "sc", 101)
    with pytest.raises(TokenRejected) as info:
        verify_token(token, registry, "sc", 102)
    assert info.value.reason is RejectReason.EXPIRED
    with pytest.raises(TokenRejected) as info:
        verify_token(token, {}, "sc", 5)
    assert info.value.reason is RejectReason.FORGED
    with pytest.raises(TokenRejected) as info:
        verify_token(token, registry, "mallory", 5)
    assert info.value.reason is RejectReason.FORGED


def test_tampered_token_is_forged():
    token = validate(now=1)
    registry = {token.token_id: token}
    stretched = AccessToken(token.token_id, 10_000, token.rate_limit, 1, token.holder, token.resource)
    with pytest.raises(TokenRejected) as info:
        verify_token(stretched, registry, "sc", 5)
    assert info.value.reason is RejectReason.FORGED


def test_token_expiry_after_issue():
    with pytest.raises(ValueError):
        AccessToken("x", 5, 1, 5, "sc", "temp")


def test_rate_window():
    token = validate(pol=policy(rate_limit=5))
    window = RateWindow(token.token_id, 1)
    assert all(check_rate(token, window, 1) for _ in range(5))
    assert not check_rate(token, window, 1)
    assert check_rate(token, window, 2)
    assert window.used == 1
    with pytest.raises(ValueError):
        check_rate(token, RateWindow("other", 1), 1)

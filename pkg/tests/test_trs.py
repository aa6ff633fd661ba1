import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bctrs.trs import (
    Direction,
    Outcome,
    ParameterError,
    ReputationParams,
    ReputationView,
    TrustParams,
    TrustState,
    aggregate_trust,
    gompertz_floor,
    recompute_view,
    reputation,
    trust_direct,
    trust_update,
)

POS, NEG = Outcome.POSITIVE, Outcome.NEGATIVE
DEFAULT = TrustParams(0.8, 1.0, -3.0)


def fresh() -> TrustState:
    return TrustState("sp", "sc", Direction.SP_TRUSTS_SC)


def fold(outcomes, params=DEFAULT) -> TrustState:
    state = fresh()
    for o in outcomes:
        state = trust_update(state, o, params)
    return state


@st.composite
def trust_params(draw):
    aging = draw(st.floats(0.01, 0.99))
    pos = draw(st.floats(0.01, 10.0))
    neg = -draw(st.floats(pos * 1.0001 + 1e-6, 50.0))
    return TrustParams(aging, pos, neg)


outcome_lists = st.lists(st.sampled_from([POS, NEG]), max_size=200)


# -- parameters ------------------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [(0.0, 1.0, -3.0), (1.0, 1.0, -3.0), (1.2, 1.0, -3.0), (0.8, 0.0, -3.0),
     (0.8, 1.0, 0.0), (0.8, 3.0, -3.0), (0.8, 4.0, -3.0)],
)
def test_invalid_trust_params(args):
    with pytest.raises(ParameterError):
        TrustParams(*args)


@pytest.mark.parametrize("args", [(0.0, 4.0, 2.0), (1.0, -4.0, 2.0), (1.0, 4.0, 0.0)])
def test_invalid_reputation_params(args):
    with pytest.raises(ParameterError):
        ReputationParams(*args)


def test_state_starts_at_zero():
    with pytest.raises(ValueError):
        TrustState("a", "b", Direction.SC_TRUSTS_SP, score=0.5, interactions=0)


# -- worked examples ----------------------------------------------------------


def test_update_examples():
    assert trust_update(fresh(), POS, DEFAULT).score == pytest.approx(0.2, abs=1e-12)
    one = TrustState("sp", "sc", Direction.SP_TRUSTS_SC, 1.0, 5)
    assert trust_update(one, POS, DEFAULT).score == pytest.approx(1.0, abs=1e-12)
    assert trust_update(one, NEG, DEFAULT).score == pytest.approx(0.2, abs=1e-12)
    assert trust_update(one, NEG, DEFAULT).interactions == 6


def test_direct_examples():
    assert trust_direct([], DEFAULT) == 0.0
    assert trust_direct([POS] * 3, DEFAULT) == pytest.approx(0.488, abs=1e-12)
    assert trust_direct([POS] * 200, DEFAULT) == pytest.approx(1.0, abs=1e-12)


def test_aggregate_examples():
    assert aggregate_trust({}) == 0.0
    assert aggregate_trust({"p1": 0.9}) == 0.0
    assert aggregate_trust({"p1": 1.0, "p2": 1.0}) == pytest.approx(math.log(2), abs=1e-12)
    assert aggregate_trust({f"p{i}": 0.5 for i in range(4)}) == pytest.approx(math.log(2), abs=1e-12)


def test_reputation_examples():
    rp = ReputationParams()
    assert reputation(0.0, True, rp) == pytest.approx(math.exp(-4), abs=1e-12)
    assert gompertz_floor(rp) == pytest.approx(math.exp(-4), abs=1e-12)
    assert reputation(50.0, True, rp) == pytest.approx(1.0, abs=1e-12)
    assert reputation(3.0, False, rp) == 0.0
    # a very negative aggregate underflows to zero rather than overflowing
    assert reputation(-1e6, True, rp) == 0.0


def test_recompute_view_examples():
    rp = ReputationParams()
    empty = recompute_view(ReputationView("n"), rp)
    assert (empty.aggregate, empty.reputation, empty.has_interacted) == (0.0, 0.0, False)

    two = recompute_view(ReputationView("n", frozenset({"p1", "p2"}), {"p1": 1.0, "p2": 1.0}), rp)
    assert two.aggregate == pytest.approx(math.log(2), abs=1e-12)
    assert two.reputation == pytest.approx(math.exp(-1), abs=1e-12)

    peers = {f"p{i}": 1.0 for i in range(8)}
    eight = recompute_view(ReputationView("n", frozenset(peers), peers), rp)
    assert eight.aggregate == pytest.approx(math.log(8), abs=1e-12)
    assert eight.reputation == pytest.approx(math.exp(-4 / 64), abs=1e-12)
    assert eight.node == "n" and eight.peers == frozenset(peers)


def test_recompute_view_rejects_mismatched_keys():
    with pytest.raises(ValueError):
        recompute_view(ReputationView("n", frozenset({"p1"}), {"p2": 1.0}), ReputationParams())


# -- properties ---------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(trust_params(), outcome_lists)
def test_recursion_matches_direct_sum(params, outcomes):
    state = fold(outcomes, params)
    assert state.interactions == len(outcomes)
    assert abs(state.score - trust_direct(outcomes, params)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(trust_params(), outcome_lists)
def test_scores_stay_in_bounds(params, outcomes):
    state = fresh()
    for o in outcomes:
        state = trust_update(state, o, params)
        assert params.weight_neg <= state.score <= params.weight_pos


@settings(max_examples=200, deadline=None)
@given(trust_params(), st.integers(0, 200))
def test_all_positive_closed_form(params, t):
    state = fold([POS] * t, params)
    assert abs(state.score - params.weight_pos * (1 - params.aging**t)) <= 1e-12 * max(t, 1) * 10


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 0.98), st.floats(0.001, 0.01), st.integers(1, 60))
def test_score_decreases_in_aging(g, dg, t):
    lo, hi = TrustParams(g, 1.0, -3.0), TrustParams(min(g + dg, 0.99), 1.0, -3.0)
    if lo.aging == hi.aging:
        return
    a, b = fold([POS] * t, lo).score, fold([POS] * t, hi).score
    assert a >= b - 1e-12
    # strict while the scores are still resolvable below the cap
    if hi.aging**t > 1e-9:
        assert a > b


@settings(max_examples=200, deadline=None)
@given(trust_params(), st.integers(1, 50))
def test_negative_costs_more_than_positive_gains(params, k):
    base = fold([POS] * k, params)
    good = trust_update(base, POS, params).score
    bad = trust_update(base, NEG, params).score
    drop = good - bad
    assert drop == pytest.approx((1 - params.aging) * (params.weight_pos - params.weight_neg), rel=1e-9)
    assert drop > (1 - params.aging) * 2 * params.weight_pos


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(0.001, 5))
def test_reputation_increasing_and_bounded(a, da):
    rp = ReputationParams()
    lo, hi = reputation(a, True, rp), reputation(a + da, True, rp)
    assert 0.0 <= lo <= hi <= rp.asymptote
    if -1.0 <= a <= 5.0:
        assert hi > lo


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 5.0), st.integers(1, 40))
def test_aggregate_grows_with_peers(tau, n):
    a_n = aggregate_trust({f"p{i}": tau for i in range(n)})
    a_next = aggregate_trust({f"p{i}": tau for i in range(n + 1)})
    assert a_n == pytest.approx(tau * math.log(n), abs=1e-9)
    assert a_next > a_n

import math

import pytest

from bctrs.scenario import CurveKind, reference_curves
from bctrs.scenario.curves import steps_to_converge


def test_trust_vs_gamma_example():
    table = reference_curves(CurveKind.TRUST_VS_GAMMA, {"gammas": [0.8], "t_max": 10})
    assert table.series["gamma=0.8"][10] == pytest.approx(1 - 0.8**10, abs=1e-12)
    assert table.columns == ["t", "gamma=0.8"]
    assert len(table.rows()) == 11


def test_trust_vs_gamma_default_family():
    table = reference_curves("TrustVsGamma")
    assert list(table.series) == ["gamma=0.6", "gamma=0.7", "gamma=0.8", "gamma=0.9"]


def test_turncoat_one_step_after_switch():
    table = reference_curves("HonestMaliciousTurncoat", {"switch_round": 40})
    t40 = 1 - 0.8**40
    assert table.series["turncoat"][41] == pytest.approx(0.8 * t40 - 0.6, abs=1e-12)
    assert table.series["turncoat"][41] == pytest.approx(0.199, abs=1e-3)
    assert list(table.series) == ["honest", "malicious", "turncoat"]


def test_aggregate_single_peer_is_zero():
    table = reference_curves("AggregateVsPeers", {"taus": "1.0"})
    assert table.series["trust=1"][0] == 0.0
    assert table.series["trust=1"][1] == pytest.approx(math.log(2))


def test_reputation_vs_peers_uses_parameters():
    table = reference_curves("ReputationVsPeers", {"max_peers": 2, "displacement": 2.0})
    assert table.series["trust=1"][1] == pytest.approx(math.exp(-2 * 0.25))


def test_unknown_kind_and_params():
    with pytest.raises(ValueError):
        reference_curves("Nope")
    with pytest.raises(ValueError):
        reference_curves("TrustVsGamma", {"colour": "red"})


def test_steps_to_converge():
    for g in (0.6, 0.7, 0.8, 0.9):
        t = steps_to_converge(g)
        assert 1 - (1 - g**t) <= 1e-3 < 1 - (1 - g ** (t - 1))

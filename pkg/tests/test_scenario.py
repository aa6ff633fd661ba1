import hashlib
import math

import pytest

from bctrs.scenario import ExportError, export, export_metrics, parse_config, run
from bctrs.scenario.engine import COUNTER_COLUMNS, Scenario
from bctrs.scenario.presets import HONEST, containment, honest_pair


def _digest_dir(path):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(path.iterdir())}


def test_honest_pair_ten_rounds():
    m = run(parse_config(honest_pair(rounds=10))).metrics
    assert len(m) == 10 and m.rounds == list(range(1, 11))
    series = m.series("trust", f"sp:sp1>sc:{HONEST}")
    assert all(b >= a for a, b in zip(series, series[1:]))


def test_agent_run_matches_analytic_curve():
    m = run(parse_config(honest_pair(rounds=40, fee=4))).metrics
    for t, v in enumerate(m.series("trust", f"sp:sp1>sc:{HONEST}"), start=1):
        assert abs(v - (1 - 0.8**t)) <= 1e-9


def test_every_family_has_one_sample_per_round():
    m = run(parse_config(containment("DosAttacker", rounds=15))).metrics
    for family in ("trust", "reputation", "balances", "counters"):
        assert len(getattr(m, family)) == 15
    assert list(m.counters[0]) == list(COUNTER_COLUMNS)


def test_conservation_every_round():
    m = run(parse_config(containment("BadMouther", rounds=20))).metrics
    assert all(sum(row.values()) == m.minted for row in m.balances)


def test_rounds_zero_is_genesis_only(tmp_path):
    result = run(parse_config(honest_pair(rounds=0)))
    assert len(result.metrics) == 0 and result.tokens == []
    assert {line["round"] for line in result.trace} == {0}
    export(result, tmp_path)
    for name in ("trust.csv", "reputation.csv", "balances.csv", "counters.csv"):
        assert len((tmp_path / name).read_text().splitlines()) == 1


def test_identical_configs_give_identical_outputs(tmp_path):
    tree = containment("ReplayAttacker", rounds=12)
    export(run(parse_config(tree)), tmp_path / "a")
    export(run(parse_config(tree)), tmp_path / "b")
    assert _digest_dir(tmp_path / "a") == _digest_dir(tmp_path / "b")


def test_seed_changes_trace():
    a = run(parse_config(honest_pair(rounds=5, seed=1)))
    b = run(parse_config(honest_pair(rounds=5, seed=2)))
    assert a.trace != b.trace


def test_engines_are_independent():
    cfg = parse_config(honest_pair(rounds=6, fee=2))
    first, second = Scenario(cfg), Scenario(cfg)
    r1 = first.run()
    r2 = second.run()
    assert r1.trace == r2.trace and r1.network is not r2.network


def test_export_layout(tmp_path):
    result = run(parse_config(honest_pair(rounds=10, fee=10)))
    paths = export(result, tmp_path)
    assert sorted(p.name for p in paths) == [
        "balances.csv", "counters.csv", "ledger_trace.jsonl", "reputation.csv", "trust.csv",
    ]
    lines = (tmp_path / "trust.csv").read_text().splitlines()
    assert lines[0] == f"round,sp:sp1>sc:{HONEST},sc:{HONEST}>sp:sp1"
    assert len(lines) == 11
    assert lines[1].split(",")[1] == "0.2"
    # twelve significant digits at most
    assert all(len(c.replace(".", "").replace("-", "").lstrip("0")) <= 12 for c in lines[5].split(","))
    trace = (tmp_path / "ledger_trace.jsonl").read_text().splitlines()
    assert len(trace) == len(result.trace)


def test_re_export_is_byte_identical(tmp_path):
    result = run(parse_config(honest_pair(rounds=4)))
    export(result, tmp_path / "x")
    first = _digest_dir(tmp_path / "x")
    export(result, tmp_path / "x")
    assert _digest_dir(tmp_path / "x") == first


def test_export_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    series = run(parse_config(honest_pair(rounds=1))).metrics
    with pytest.raises(ExportError) as info:
        export_metrics(series, blocker / "sub")
    assert str(blocker) in str(info.value)


def test_reputation_columns_start_at_floor():
    m = run(parse_config(honest_pair(rounds=1))).metrics
    assert m.reputation[0][f"{HONEST}:sc"] == pytest.approx(math.exp(-4))

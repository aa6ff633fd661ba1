"""Ready-made scenario trees used by the verification suite and the examples.

Every builder returns a plain dict so callers can tweak it before
``parse_config``.
"""

from __future__ import annotations

import copy
from typing import Any

from ..actors.behaviors import ProfileKind

# The adversaries that act as consumers or as self-dealing providers.
CONTAINMENT_PROFILES = (
    ProfileKind.BAD_MOUTHER,
    ProfileKind.BALLOT_STUFFER,
    ProfileKind.SELF_PROMOTER,
    ProfileKind.WHITEWASHER,
    ProfileKind.REPLAY,
    ProfileKind.DOS,
    ProfileKind.FORGED_TOKEN,
)

HONEST = "alice"
ATTACKER = "mallory"

_ATTRS = [{"key": "org", "value": "lab"}]


def _authorities(n: int) -> list[dict[str, Any]]:
    return [{"name": f"aa{i}", "roles": ["AA"]} for i in range(1, n + 1)]


def honest_pair(rounds: int = 10, fee: int = 0, seed: int = 1) -> dict[str, Any]:
    """One provider, one consumer authorizing and reading once per round."""
    return {
        "seed": seed,
        "rounds": rounds,
        "nodes": [
            {"name": "sp1", "roles": ["SP"]},
            {"name": "dds1", "roles": ["DDS"]},
            {
                "name": HONEST,
                "roles": ["SC"],
                "balance": 10 * fee * rounds,
                "requests": [{"resource": "temp"}],
            },
        ],
        "policies": [{"resource": "temp", "owner": "sp1", "fee": fee}],
    }


def containment(kind: ProfileKind | str, rounds: int = 100, seed: int = 7) -> dict[str, Any]:
    """An attacker and a matched honest agent sharing the same providers.

    Four authorities with f=1 run the sidechain. ``sp1`` keeps ``temp``
    fresh; ``sp2`` publishes ``archive`` once and never refreshes it, so
    data served from it is stale once ``refresh_rate`` rounds have passed.
    For provider-side comparisons ``sp1`` has two honest consumers.
    """
    kind = ProfileKind(kind)
    balance = 100 * rounds
    nodes: list[dict[str, Any]] = [
        *_authorities(4),
        {"name": "sp1", "roles": ["SP"]},
        {"name": "sp2", "roles": ["SP"]},
        {"name": "dds1", "roles": ["DDS"]},
        {
            "name": HONEST,
            "roles": ["SC"],
            "balance": balance,
            "attributes": copy.deepcopy(_ATTRS),
            # temp last, so a replay attacker captures a temp request
            "requests": [{"resource": "archive"}, {"resource": "temp"}],
        },
        {
            "name": "bob",
            "roles": ["SC"],
            "balance": balance,
            "attributes": copy.deepcopy(_ATTRS),
            "requests": [{"resource": "temp"}],
        },
    ]
    policies: list[dict[str, Any]] = [
        {"resource": "temp", "owner": "sp1", "fee": 10, "rate_limit": 3,
         "required_attributes": copy.deepcopy(_ATTRS)},
        {"resource": "archive", "owner": "sp2", "fee": 10, "refresh_rate": 3,
         "refresh_every": 10 * (rounds + 1), "required_attributes": copy.deepcopy(_ATTRS)},
    ]
    attacker: dict[str, Any] = {
        "name": ATTACKER,
        "roles": ["SC"],
        "balance": balance,
        "attributes": copy.deepcopy(_ATTRS),
        "profile": {"kind": kind.value},
        "requests": [{"resource": "temp"}],
    }
    if kind is ProfileKind.BALLOT_STUFFER:
        attacker["requests"] = [{"resource": "archive"}]
    elif kind is ProfileKind.BAD_MOUTHER:
        attacker["profile"]["target"] = HONEST
    elif kind is ProfileKind.REPLAY:
        attacker["profile"]["target"] = HONEST
    elif kind is ProfileKind.DOS:
        attacker["profile"]["burst"] = 2
    elif kind is ProfileKind.WHITEWASHER:
        attacker["profile"]["rejoin_every"] = 5
    elif kind is ProfileKind.SELF_PROMOTER:
        attacker["roles"] = ["SP", "SC"]
        attacker["requests"] = [{"resource": "own"}]
        policies.append(
            {"resource": "own", "owner": ATTACKER, "fee": 10,
             "required_attributes": copy.deepcopy(_ATTRS)}
        )
    nodes.append(attacker)
    return {
        "seed": seed,
        "rounds": rounds,
        "sidechains": [{"authorities": ["aa1", "aa2", "aa3", "aa4"], "f": 1}],
        "nodes": nodes,
        "policies": policies,
    }


def provider_attack(kind: ProfileKind | str, rounds: int = 100, seed: int = 7, switch_round: int = 40):
    """An unreliable or turncoat provider next to an honest one, both used by the same consumer."""
    kind = ProfileKind(kind)
    profile: dict[str, Any] = {"kind": kind.value}
    if kind is ProfileKind.TURNCOAT_SP:
        profile["switch_round"] = switch_round
    else:
        profile["skip_rate"] = 1.0
    return {
        "seed": seed,
        "rounds": rounds,
        "nodes": [
            {"name": "sp_honest", "roles": ["SP"]},
            {"name": ATTACKER, "roles": ["SP"], "profile": profile},
            {"name": "dds1", "roles": ["DDS"]},
            {
                "name": HONEST,
                "roles": ["SC"],
                "balance": 20 * rounds,
                "requests": [{"resource": "good"}, {"resource": "bad"}],
            },
        ],
        "policies": [
            {"resource": "good", "owner": "sp_honest", "fee": 10, "refresh_rate": 3},
            {"resource": "bad", "owner": ATTACKER, "fee": 10, "refresh_rate": 3},
        ],
    }


def offline_provider(rounds: int = 20, seed: int = 3, offline: bool = True) -> dict[str, Any]:
    """The provider publishes at genesis and, when ``offline``, is unreachable for every later round."""
    tree = honest_pair(rounds=rounds, fee=10, seed=seed)
    tree["nodes"].append(
        {"name": "carol", "roles": ["SC"], "balance": 100 * rounds,
         "requests": [{"resource": "temp", "every": 2}]}
    )
    if offline:
        tree["policies"][0]["offline_after_publish"] = rounds
    return tree

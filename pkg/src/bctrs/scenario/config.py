"""Scenario configuration: YAML on disk, validated into pydantic models.

Unknown keys are rejected. Errors carry the dotted path of the offending
field, e.g. ``nodes.2.profile.target``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..actors.behaviors import ProfileKind
from ..trs import ParameterError, ReputationParams, TrustParams

IMPLICIT_AUTHORITY = "_aa"
IMPLICIT_STORE = "_dds"


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrustParamsConfig(_Strict):
    aging: float = 0.8
    weight_pos: float = 1.0
    weight_neg: float = -3.0

    def build(self) -> TrustParams:
        return TrustParams(self.aging, self.weight_pos, self.weight_neg)


class TrustConfig(_Strict):
    sc: TrustParamsConfig = Field(default_factory=TrustParamsConfig)
    sp: TrustParamsConfig = Field(default_factory=TrustParamsConfig)


class ReputationConfig(_Strict):
    asymptote: float = 1.0
    displacement: float = 4.0
    growth: float = 2.0

    def build(self) -> ReputationParams:
        return ReputationParams(self.asymptote, self.displacement, self.growth)


class AttributeConfig(_Strict):
    key: str
    kind: str = "str"
    value: str


class ProfileConfig(_Strict):
    kind: Literal[tuple(k.value for k in ProfileKind)] = "Honest"  # type: ignore[valid-type]
    switch_round: Optional[int] = None
    skip_rate: float = Field(1.0, ge=0.0, le=1.0)
    burst: int = Field(1, ge=1)
    target: Optional[str] = None
    rejoin_every: int = Field(10, ge=1)


class RequestConfig(_Strict):
    resource: str
    actions: list[Literal["read", "write", "stream"]] = ["read"]
    accesses: int = Field(1, ge=0)
    every: int = Field(1, ge=1)


class NodeConfig(_Strict):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str = Field(min_length=1)
    roles: list[Literal["SP", "SC", "AA", "DDS"]]
    balance: int = Field(0, ge=0)
    device: Optional[str] = None
    sidechain: Optional[int] = None
    registered: bool = Field(True, alias="register")
    attributes: list[AttributeConfig] = []
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    requests: list[RequestConfig] = []
    offline: list[tuple[int, int]] = []


class SidechainConfig(_Strict):
    authorities: list[str]
    f: int = Field(0, ge=0)


class PolicyConfig(_Strict):
    resource: str
    owner: str
    required_attributes: list[AttributeConfig] = []
    actions: list[Literal["read", "write", "stream"]] = ["read"]
    valid_rounds: Optional[tuple[int, int]] = None
    rate_limit: int = Field(5, ge=1)
    refresh_rate: int = Field(10, ge=1)
    fee: int = Field(0, ge=0)
    min_trust: float = 0.0
    min_reputation: float = 0.0
    refresh_every: int = Field(1, ge=1)
    store: Optional[str] = None
    offline_after_publish: int = Field(0, ge=0)


class ScenarioConfig(_Strict):
    seed: int = 0
    rounds: int = Field(10, ge=0)
    trust: TrustConfig = Field(default_factory=TrustConfig)
    reputation: ReputationConfig = Field(default_factory=ReputationConfig)
    token_lifetime: int = Field(100, ge=1)
    sidechains: list[SidechainConfig] = []
    nodes: list[NodeConfig] = []
    policies: list[PolicyConfig] = []

    def node(self, name: str) -> NodeConfig:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)


def _path(loc) -> str:
    return ".".join(str(p) for p in loc)


def check_references(cfg: ScenarioConfig) -> None:
    """Cross-field checks pydantic cannot express on single fields."""
    for key in ("sc", "sp"):
        try:
            getattr(cfg.trust, key).build()
        except ParameterError as exc:
            raise ConfigError(f"trust.{key}", str(exc)) from None
    try:
        rep = cfg.reputation.build()
    except ParameterError as exc:
        raise ConfigError("reputation", str(exc)) from None

    roles: dict[str, set[str]] = {}
    for i, node in enumerate(cfg.nodes):
        if node.name in roles:
            raise ConfigError(f"nodes.{i}.name", f"duplicate node name {node.name!r}")
        if node.name in (IMPLICIT_AUTHORITY, IMPLICIT_STORE):
            raise ConfigError(f"nodes.{i}.name", f"{node.name!r} is reserved")
        roles[node.name] = set(node.roles)

    for i, side in enumerate(cfg.sidechains):
        for j, aa in enumerate(side.authorities):
            if "AA" not in roles.get(aa, ()):
                raise ConfigError(f"sidechains.{i}.authorities.{j}", f"{aa!r} is not an AA node")
        if len(set(side.authorities)) < 3 * side.f + 1:
            raise ConfigError(
                f"sidechains.{i}.f", f"f={side.f} needs {3 * side.f + 1} authorities"
            )

    n_sidechains = max(1, len(cfg.sidechains))
    resources = {p.resource for p in cfg.policies}
    sc_trust = cfg.trust.sc.build()
    for i, node in enumerate(cfg.nodes):
        if node.sidechain is not None and not 1 <= node.sidechain <= n_sidechains:
            raise ConfigError(f"nodes.{i}.sidechain", f"no sidechain {node.sidechain}")
        for j, req in enumerate(node.requests):
            if req.resource not in resources:
                raise ConfigError(f"nodes.{i}.requests.{j}.resource", f"unknown resource {req.resource!r}")
        target = node.profile.target
        if target is not None and target not in roles:
            raise ConfigError(f"nodes.{i}.profile.target", f"unknown node {target!r}")
        if node.profile.kind == "TurncoatSP" and node.profile.switch_round is None:
            raise ConfigError(f"nodes.{i}.profile.switch_round", "required for TurncoatSP")

    seen = set()
    for i, pol in enumerate(cfg.policies):
        if pol.resource in seen:
            raise ConfigError(f"policies.{i}.resource", f"duplicate resource {pol.resource!r}")
        seen.add(pol.resource)
        if "SP" not in roles.get(pol.owner, ()):
            raise ConfigError(f"policies.{i}.owner", f"{pol.owner!r} is not an SP node")
        if pol.store is not None and "DDS" not in roles.get(pol.store, ()):
            raise ConfigError(f"policies.{i}.store", f"{pol.store!r} is not a DDS node")
        if not sc_trust.weight_neg <= pol.min_trust <= sc_trust.weight_pos:
            raise ConfigError(f"policies.{i}.min_trust", "outside the trust score range")
        if not 0.0 <= pol.min_reputation <= rep.asymptote:
            raise ConfigError(f"policies.{i}.min_reputation", "outside [0, asymptote]")
        if pol.valid_rounds is not None and pol.valid_rounds[0] > pol.valid_rounds[1]:
            raise ConfigError(f"policies.{i}.valid_rounds", "start after end")


def parse_config(data: Any) -> ScenarioConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("", "config root must be a mapping")
    try:
        cfg = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(_path(err["loc"]), err["msg"]) from None
    check_references(cfg)
    return cfg


def set_path(tree: dict, dotted: str, value: Any) -> None:
    """Assign ``value`` at a dotted path; integer segments index into lists."""
    parts = dotted.split(".")
    node: Any = tree
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        if isinstance(node, list):
            try:
                idx = int(part)
                node[idx]
            except (ValueError, IndexError):
                raise ConfigError(".".join(parts[: i + 1]), "no such list element") from None
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif isinstance(node, dict):
            if last:
                node[part] = value
            else:
                node = node.setdefault(part, {})
        else:
            raise ConfigError(".".join(parts[:i]), "cannot descend into a scalar")


def apply_overrides(tree: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        set_path(tree, key.strip(), yaml.safe_load(raw))
    return tree


def load_config(path: str | Path, overrides: list[str] = ()) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or str(exc)) from None
    try:
        tree = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from None
    return parse_config(apply_overrides(tree, list(overrides)))

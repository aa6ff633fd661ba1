from .behaviors import (
    ActionRecord,
    Agent,
    BehaviorProfile,
    ProfileKind,
    RequestPlan,
    attack_step,
    consumer_step,
    honest_feedback,
    sp_refresh,
)
from .identity import Node, NodeIdentity, Role, device_fingerprint
from .network import AccessMessage, DataResponse, DataStore, FeedbackResult, Network, ResourceRecord
from .trust_contract import TrustContract, Violation

__all__ = [
    "AccessMessage",
    "ActionRecord",
    "Agent",
    "BehaviorProfile",
    "DataResponse",
    "DataStore",
    "FeedbackResult",
    "Network",
    "Node",
    "NodeIdentity",
    "ProfileKind",
    "RequestPlan",
    "ResourceRecord",
    "Role",
    "TrustContract",
    "Violation",
    "attack_step",
    "consumer_step",
    "device_fingerprint",
    "honest_feedback",
    "sp_refresh",
]

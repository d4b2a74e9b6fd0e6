"""Expert algorithms running on the outer ball and their expert-losses."""

from .base import (
    EXPERT_KIND_METADATA,
    ExpertConfig,
    ExpertKind,
    ExpertKindMetadata,
    ExpertState,
    expert_predict,
    init_expert_state,
)
from .losses import expert_loss_grad, expert_loss_value, strong_convexity_modulus
from .ons import generalized_projection
from .registry import UpdateRegistry, expert_update, register_update

# registers the update rules
from . import updates  # noqa: F401,E402

__all__ = [
    "EXPERT_KIND_METADATA",
    "ExpertConfig",
    "ExpertKind",
    "ExpertKindMetadata",
    "ExpertState",
    "UpdateRegistry",
    "expert_loss_grad",
    "expert_loss_value",
    "expert_predict",
    "expert_update",
    "generalized_projection",
    "init_expert_state",
    "register_update",
    "strong_convexity_modulus",
]

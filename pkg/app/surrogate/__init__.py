"""Domain-converting surrogate loss and its per-round context."""

from .context import (
    SurrogateContext,
    build_context,
    context_from_projection,
    delta_term,
    linear_context,
    surrogate_grad,
    surrogate_value,
)
from .legacy import legacy_surrogate_grad, legacy_surrogate_value

__all__ = [
    "SurrogateContext",
    "build_context",
    "context_from_projection",
    "delta_term",
    "legacy_surrogate_grad",
    "legacy_surrogate_value",
    "linear_context",
    "surrogate_grad",
    "surrogate_value",
]

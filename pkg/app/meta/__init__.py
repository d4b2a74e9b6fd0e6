"""Adapt-ML-Prod meta-algorithm."""

from .adapt_ml_prod import (
    LOG_WEIGHT_FLOOR,
    MetaState,
    gamma_constant,
    init_meta_state,
    meta_update,
    meta_weights,
    normalize_meta_loss,
    normalize_meta_losses,
    second_order_bound,
)

__all__ = [
    "LOG_WEIGHT_FLOOR",
    "MetaState",
    "gamma_constant",
    "init_meta_state",
    "meta_update",
    "meta_weights",
    "normalize_meta_loss",
    "normalize_meta_losses",
    "second_order_bound",
]

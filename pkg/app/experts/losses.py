"""Expert-losses and their closed-form gradients."""

from typing import Optional

import numpy as np

from app.experts.base import ExpertConfig, ExpertKind
from app.surrogate.context import SurrogateContext, surrogate_grad


def expert_loss_value(
    config: ExpertConfig,
    ctx: SurrogateContext,
    y: np.ndarray,
    surr_grad: Optional[np.ndarray] = None,
) -> float:
    """
    Evaluate the expert-loss of ``config.kind`` at ``y``.

    Args:
        config: Expert configuration (kind and modulus)
        ctx: Round context (y_t, x_t)
        y: Point on the outer ball
        surr_grad: Surrogate gradient at y_t; recomputed from ctx if omitted
    """
    s = surrogate_grad(ctx) if surr_grad is None else surr_grad
    y = np.asarray(y, dtype=float)
    linear = float(s @ (y - ctx.y_t))

    if config.kind in (ExpertKind.CVX, ExpertKind.CVX_SMOOTH):
        return linear
    if config.kind is ExpertKind.EXP:
        return linear + 0.5 * config.beta_hat * linear**2

    anchor_sq = float(np.sum((y - ctx.x_t) ** 2))
    return linear + 0.5 * strong_convexity_modulus(config, s) * anchor_sq


def expert_loss_grad(
    config: ExpertConfig,
    ctx: SurrogateContext,
    y: np.ndarray,
    surr_grad: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Gradient of the expert-loss of ``config.kind`` at ``y``."""
    s = surrogate_grad(ctx) if surr_grad is None else surr_grad
    y = np.asarray(y, dtype=float)

    if config.kind in (ExpertKind.CVX, ExpertKind.CVX_SMOOTH):
        return s.copy()
    if config.kind is ExpertKind.EXP:
        return s + config.beta_hat * float(s @ (y - ctx.y_t)) * s
    return s + strong_convexity_modulus(config, s) * (y - ctx.x_t)


def strong_convexity_modulus(config: ExpertConfig, surr_grad: np.ndarray) -> float:
    """Strong convexity modulus of the expert-loss (zero for CVX and EXP)."""
    if config.kind is ExpertKind.SC:
        return float(config.modulus)
    if config.kind is ExpertKind.SC_SMOOTH:
        return float(config.modulus) * float(surr_grad @ surr_grad) / config.G**2
    return 0.0

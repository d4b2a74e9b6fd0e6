"""The five expert update rules, each ending with a step back onto the outer ball."""

import math

import numpy as np

from app.domains.base import rescale_to_ball
from app.errors import SingularMatrix
from app.experts.base import ExpertConfig, ExpertKind, ExpertState
from app.experts.losses import expert_loss_grad
from app.experts.ons import generalized_projection
from app.experts.registry import register_update
from app.surrogate.context import SurrogateContext


def _advance(state: ExpertState, iterate: np.ndarray, **changes) -> ExpertState:
    return ExpertState(
        iterate=iterate,
        t=state.t + 1,
        sigma=changes.get("sigma", state.sigma),
        cumulative_sq=changes.get("cumulative_sq", state.cumulative_sq),
    )


@register_update(ExpertKind.CVX)
def ogd_update(state: ExpertState, config: ExpertConfig, ctx: SurrogateContext, surr_grad: np.ndarray) -> ExpertState:
    """Online gradient descent with step 1/sqrt(t)."""
    y_hat = state.iterate - surr_grad / math.sqrt(state.t)
    return _advance(state, rescale_to_ball(y_hat, config.D))


@register_update(ExpertKind.SC)
def strongly_convex_ogd_update(
    state: ExpertState, config: ExpertConfig, ctx: SurrogateContext, surr_grad: np.ndarray
) -> ExpertState:
    """OGD on the lambda_hat-strongly convex expert-loss with step 1/(lambda_hat t)."""
    grad = expert_loss_grad(config, ctx, state.iterate, surr_grad)
    y_hat = state.iterate - grad / (config.modulus * state.t)
    return _advance(state, rescale_to_ball(y_hat, config.D))


@register_update(ExpertKind.EXP)
def ons_update(state: ExpertState, config: ExpertConfig, ctx: SurrogateContext, surr_grad: np.ndarray) -> ExpertState:
    """
    Online Newton step on the exp-concave expert-loss.

    Sigma accumulates rank-one terms of the expert-loss gradient; the Newton
    step is mapped back onto the ball by the Sigma-metric projection.
    """
    grad = expert_loss_grad(config, ctx, state.iterate, surr_grad)
    sigma = state.sigma + np.outer(grad, grad)
    try:
        direction = np.linalg.solve(sigma, grad)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"ONS matrix inversion failed at round {state.t}: {exc}") from exc
    if not np.all(np.isfinite(direction)):
        raise SingularMatrix(f"ONS step is not finite at round {state.t}")

    beta_hat = config.beta_hat
    y_hat = state.iterate - direction / beta_hat
    iterate = generalized_projection(sigma, y_hat, config.D, method=config.ons_projection, beta_hat=beta_hat)
    return _advance(state, iterate, sigma=sigma)


@register_update(ExpertKind.CVX_SMOOTH)
def scale_free_ogd_update(
    state: ExpertState, config: ExpertConfig, ctx: SurrogateContext, surr_grad: np.ndarray
) -> ExpertState:
    """OGD with step alpha / sqrt(delta + sum of squared gradient norms)."""
    cumulative_sq = state.cumulative_sq + float(surr_grad @ surr_grad)
    eta = config.sogd_alpha / math.sqrt(config.sogd_delta + cumulative_sq)
    y_hat = state.iterate - eta * surr_grad
    return _advance(state, rescale_to_ball(y_hat, config.D), cumulative_sq=cumulative_sq)


@register_update(ExpertKind.SC_SMOOTH)
def smooth_strongly_convex_ogd_update(
    state: ExpertState, config: ExpertConfig, ctx: SurrogateContext, surr_grad: np.ndarray
) -> ExpertState:
    """
    OGD on the gradient-scaled strongly convex expert-loss.

    The inverse step (1 + 2D/G)^2 + (lambda_hat/G^2) * sum ||grad||^2 grows by
    at least the per-round strong convexity modulus.
    """
    cumulative_sq = state.cumulative_sq + float(surr_grad @ surr_grad)
    inverse_step = (1.0 + 2.0 * config.D / config.G) ** 2 + config.modulus / config.G**2 * cumulative_sq
    grad = expert_loss_grad(config, ctx, state.iterate, surr_grad)
    y_hat = state.iterate - grad / inverse_step
    return _advance(state, rescale_to_ball(y_hat, config.D), cumulative_sq=cumulative_sq)

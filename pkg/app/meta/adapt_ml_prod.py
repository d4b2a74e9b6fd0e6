"""
Adapt-ML-Prod aggregation with per-expert adaptive learning rates.

Weights are stored in the log domain. Each round applies, in order:
1. ln w_i += ln(1 + eta_i (l - l_i))
2. cum_i  += (l - l_i)^2 and eta_i' = min(1/2, sqrt(ln N / (1 + cum_i)))
3. ln w_i *= eta_i' / eta_i
and floors ln w at -700.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from app.errors import ConfigError, RangeViolation

LOG_WEIGHT_FLOOR = -700.0
RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class MetaState:
    """Log-weights, learning rates and squared excess losses for every expert."""

    log_weights: np.ndarray
    learning_rates: np.ndarray
    cum_sq_excess: np.ndarray
    t: int = 1

    @property
    def n_experts(self) -> int:
        return int(self.log_weights.shape[0])


def _learning_rates(n_experts: int, cum_sq_excess: np.ndarray) -> np.ndarray:
    if n_experts == 1:
        return np.full_like(cum_sq_excess, 0.5)
    return np.minimum(0.5, np.sqrt(math.log(n_experts) / (1.0 + cum_sq_excess)))


def init_meta_state(n_experts: int) -> MetaState:
    """Uniform prior w_0 = 1/N and eta_0 = min(1/2, sqrt(ln N))."""
    if n_experts < 1:
        raise ConfigError(f"Need at least one expert, got {n_experts}")
    cum = np.zeros(n_experts)
    return MetaState(
        log_weights=np.full(n_experts, -math.log(n_experts)),
        learning_rates=_learning_rates(n_experts, cum),
        cum_sq_excess=cum,
        t=1,
    )


def _check_bounds(surr_grad: np.ndarray, points: np.ndarray, y_t: np.ndarray, G: float, D: float) -> None:
    g_norm = float(np.linalg.norm(surr_grad))
    if g_norm > G + RANGE_SLACK * max(1.0, G):
        raise RangeViolation(f"Surrogate gradient norm {g_norm:.6g} exceeds G={G}")
    limit = D + RANGE_SLACK * max(1.0, D)
    y_norm = float(np.linalg.norm(y_t))
    if y_norm > limit:
        raise RangeViolation(f"Aggregated decision norm {y_norm:.6g} exceeds D={D}")
    norms = np.linalg.norm(np.atleast_2d(points), axis=1)
    if norms.size and float(norms.max()) > limit:
        raise RangeViolation(f"Expert decision norm {float(norms.max()):.6g} exceeds D={D}")


def normalize_meta_loss(surr_grad: np.ndarray, y_i: np.ndarray, y_t: np.ndarray, G: float, D: float) -> float:
    """
    Meta-loss <s, y_i - y_t> / (4GD) + 1/2 of one expert.

    Raises:
        RangeViolation: If ||s|| > G or a decision lies outside the D-ball
            beyond rounding slack
    """
    _check_bounds(surr_grad, y_i, y_t, G, D)
    value = float(surr_grad @ (y_i - y_t)) / (4.0 * G * D) + 0.5
    return min(1.0, max(0.0, value))


def normalize_meta_losses(
    surr_grad: np.ndarray, expert_iterates: np.ndarray, y_t: np.ndarray, G: float, D: float
) -> np.ndarray:
    """Vectorized ``normalize_meta_loss`` over the rows of ``expert_iterates``."""
    _check_bounds(surr_grad, expert_iterates, y_t, G, D)
    values = (expert_iterates - y_t) @ surr_grad / (4.0 * G * D) + 0.5
    return np.clip(values, 0.0, 1.0)


def meta_weights(state: MetaState) -> np.ndarray:
    """p_i proportional to eta_i * w_i."""
    if state.n_experts == 1:
        return np.ones(1)
    logits = np.log(state.learning_rates) + state.log_weights
    p = np.exp(logits - logsumexp(logits))
    return p / p.sum()


def meta_update(state: MetaState, expert_losses: np.ndarray, aggregate_loss: float) -> MetaState:
    """
    One Adapt-ML-Prod step.

    Args:
        state: Current state (left untouched)
        expert_losses: Meta-losses l_i in [0, 1]
        aggregate_loss: Aggregated meta-loss l in [0, 1]

    Raises:
        RangeViolation: If a loss lies outside [0, 1] beyond rounding slack
    """
    losses = np.asarray(expert_losses, dtype=float)
    if losses.shape != state.log_weights.shape:
        raise ConfigError(f"Expected {state.n_experts} expert losses, got shape {losses.shape}")
    if (
        losses.min() < -RANGE_SLACK
        or losses.max() > 1.0 + RANGE_SLACK
        or not -RANGE_SLACK <= aggregate_loss <= 1.0 + RANGE_SLACK
    ):
        raise RangeViolation("Meta-losses must lie in [0, 1]")
    losses = np.clip(losses, 0.0, 1.0)
    aggregate = min(1.0, max(0.0, float(aggregate_loss)))

    excess = aggregate - losses
    cum = state.cum_sq_excess + excess**2
    if state.n_experts == 1:
        return replace(state, cum_sq_excess=cum, t=state.t + 1)

    eta = state.learning_rates
    log_w = state.log_weights + np.log1p(eta * excess)
    new_eta = _learning_rates(state.n_experts, cum)
    log_w = np.maximum(log_w * (new_eta / eta), LOG_WEIGHT_FLOOR)
    return MetaState(log_weights=log_w, learning_rates=new_eta, cum_sq_excess=cum, t=state.t + 1)


def gamma_constant(n_experts: int, horizon: int) -> float:
    """Gamma = 3 ln N + ln(1 + (N / 2e)(1 + ln(T + 1)))."""
    return 3.0 * math.log(n_experts) + math.log1p(n_experts / (2.0 * math.e) * (1.0 + math.log(horizon + 1)))


def second_order_bound(n_experts: int, horizon: int, cum_sq_excess: float) -> float:
    """2 Gamma + Gamma / sqrt(ln N) * sqrt(1 + cum_sq_excess); infinite for one expert."""
    if n_experts < 2:
        return math.inf
    gamma = gamma_constant(n_experts, horizon)
    return 2.0 * gamma + gamma / math.sqrt(math.log(n_experts)) * math.sqrt(1.0 + cum_sq_excess)

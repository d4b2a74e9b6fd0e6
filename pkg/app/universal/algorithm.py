"""
Per-round cycle of the two-layer universal algorithm.

A round: meta weights -> expert predictions -> aggregate y_t on the outer
ball -> one projection x_t = proj_X(y_t) -> gradient oracle at x_t ->
surrogate gradient -> meta-losses and expert updates -> meta update.

Rounds are atomic: states are replaced, never mutated, so an exception
anywhere in a round leaves the caller's state as it was.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from app.domains.base import DomainSpec, rescale_to_ball
from app.errors import OracleError, UocoError
from app.experts import ExpertConfig, ExpertState, expert_predict, expert_update, init_expert_state
from app.meta import MetaState, init_meta_state, meta_update, meta_weights, normalize_meta_losses
from app.surrogate import SurrogateContext, context_from_projection, delta_term, linear_context, surrogate_grad
from app.universal.config import UniversalConfig
from app.universal.grid import build_expert_grid

GradientOracle = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class UniversalState:
    """Expert states, meta state, last aggregate and the projection counter."""

    experts: List[ExpertConfig]
    expert_states: List[ExpertState]
    meta: MetaState
    y_t: np.ndarray
    t: int
    projection_count: int

    @property
    def n_experts(self) -> int:
        return len(self.experts)

    def aggregate(self) -> np.ndarray:
        """Recompute sum_i p_i y_i from the parts."""
        iterates = np.stack([s.iterate for s in self.expert_states])
        return meta_weights(self.meta) @ iterates


@dataclass(frozen=True)
class RoundOutcome:
    """Everything a round produced; ``state`` is the successor state."""

    x_t: np.ndarray
    y_t: np.ndarray
    ctx: SurrogateContext
    surr_grad: np.ndarray
    weights: np.ndarray
    expert_iterates: np.ndarray
    meta_losses: np.ndarray
    aggregate_loss: float
    delta: float
    projections: int
    state: UniversalState


def init_state(config: UniversalConfig) -> UniversalState:
    experts = config.experts
    if experts is None:
        experts = build_expert_grid(config.horizon, config.G, config.D, config.mode, config.ons_projection)
    d = config.dimension
    return UniversalState(
        experts=list(experts),
        expert_states=[init_expert_state(e, d) for e in experts],
        meta=init_meta_state(len(experts)),
        y_t=np.zeros(d),
        t=1,
        projection_count=0,
    )


def _query(grad_oracle: GradientOracle, x_t: np.ndarray) -> np.ndarray:
    try:
        return np.asarray(grad_oracle(x_t.copy()), dtype=float)
    except UocoError:
        raise
    except Exception as exc:
        raise OracleError(f"Gradient oracle failed: {exc}") from exc


def universal_round(
    state: UniversalState,
    config: UniversalConfig,
    grad_oracle: GradientOracle,
    domain: Optional[DomainSpec] = None,
) -> RoundOutcome:
    """
    One round with exactly one projection onto the inner domain.

    Args:
        state: State before the round
        config: Run configuration
        grad_oracle: Returns grad f_t at a point of X
        domain: Projection target; defaults to ``config.inner_domain`` (pass
            a CountingDomain to instrument the projection count)

    Raises:
        NonConvergence: From an iterative projector
        OracleError: If the oracle raises or returns non-finite values
        RangeViolation: If the oracle breaks the gradient bound G
        SingularMatrix: From an ONS expert
    """
    domain = config.inner_domain if domain is None else domain

    weights = meta_weights(state.meta)
    iterates = np.stack([expert_predict(s) for s in state.expert_states])
    y_t = rescale_to_ball(weights @ iterates, config.D)

    x_t = domain.project(y_t)
    grad_f = _query(grad_oracle, x_t)
    ctx = context_from_projection(y_t, x_t, grad_f, domain.inside_threshold)
    s = surrogate_grad(ctx)

    losses = normalize_meta_losses(s, iterates, y_t, config.G, config.D)
    aggregate = float(weights @ losses)
    expert_states = [
        expert_update(es, ec, ctx, s) for es, ec in zip(state.expert_states, state.experts)
    ]
    meta = meta_update(state.meta, losses, aggregate)

    new_state = UniversalState(
        experts=state.experts,
        expert_states=expert_states,
        meta=meta,
        y_t=y_t,
        t=state.t + 1,
        projection_count=state.projection_count + 1,
    )
    return RoundOutcome(
        x_t=x_t,
        y_t=y_t,
        ctx=ctx,
        surr_grad=s,
        weights=weights,
        expert_iterates=iterates,
        meta_losses=losses,
        aggregate_loss=aggregate,
        delta=delta_term(ctx),
        projections=1,
        state=new_state,
    )


def baseline_round(
    state: UniversalState,
    config: UniversalConfig,
    grad_oracle: GradientOracle,
    domain: Optional[DomainSpec] = None,
) -> RoundOutcome:
    """
    Multi-projection reference round.

    Every expert keeps its iterate in X (its update ends with a projection
    onto X), so the aggregate is feasible without projecting and the
    surrogate degenerates to the linearized original loss. Costs one
    projection per expert.
    """
    domain = config.inner_domain if domain is None else domain

    weights = meta_weights(state.meta)
    iterates = np.stack([expert_predict(s) for s in state.expert_states])
    x_t = weights @ iterates

    grad_f = _query(grad_oracle, x_t)
    ctx = linear_context(x_t, grad_f)
    s = surrogate_grad(ctx)

    losses = normalize_meta_losses(s, iterates, x_t, config.G, config.D)
    aggregate = float(weights @ losses)
    expert_states = []
    for es, ec in zip(state.expert_states, state.experts):
        updated = expert_update(es, ec, ctx, s)
        updated.iterate = domain.project(updated.iterate)
        expert_states.append(updated)
    meta = meta_update(state.meta, losses, aggregate)

    n = state.n_experts
    new_state = UniversalState(
        experts=state.experts,
        expert_states=expert_states,
        meta=meta,
        y_t=x_t,
        t=state.t + 1,
        projection_count=state.projection_count + n,
    )
    return RoundOutcome(
        x_t=x_t,
        y_t=x_t,
        ctx=ctx,
        surr_grad=s,
        weights=weights,
        expert_iterates=iterates,
        meta_losses=losses,
        aggregate_loss=aggregate,
        delta=0.0,
        projections=n,
        state=new_state,
    )

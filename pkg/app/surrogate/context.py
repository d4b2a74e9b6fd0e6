"""
Per-round surrogate context and the domain-converting surrogate loss.

The surrogate
    g_t(y) = <grad_f, y> - 1{<grad_f, v_t> < 0} * <grad_f, v_t> * S_X(y)
lives on the outer ball and its gradient at y_t needs no projection beyond
the one that produced x_t. ``surrogate_value`` needs S_X and therefore one
extra projection; it is only used by tests and audits.
"""

from dataclasses import dataclass

import numpy as np

from app.domains.base import DomainSpec
from app.domains.projection import distance_to
from app.errors import OracleError


@dataclass(frozen=True)
class SurrogateContext:
    """
    Everything a round exposes to experts and the meta-algorithm.

    ``v_t`` is the unit projection direction (y_t - x_t)/||y_t - x_t||, or
    zero when y_t already lies in the inner domain. ``gap`` stores
    ||y_t - x_t||.
    """

    y_t: np.ndarray
    x_t: np.ndarray
    grad_f: np.ndarray
    v_t: np.ndarray
    alignment: float
    inward_flag: bool
    gap: float = 0.0


def build_context(y_t: np.ndarray, grad_f: np.ndarray, inner_domain: DomainSpec) -> SurrogateContext:
    """
    Project y_t onto the inner domain (exactly once) and assemble the context.

    Args:
        y_t: Aggregated decision on the outer ball
        grad_f: Gradient of f_t at x_t; must be finite
        inner_domain: Feasible domain X

    Raises:
        OracleError: If the gradient has non-finite entries
        NonConvergence: Propagated from an iterative projector
    """
    y = np.asarray(y_t, dtype=float)
    x = inner_domain.project(y)
    return context_from_projection(y, x, grad_f, inner_domain.inside_threshold)


def context_from_projection(
    y_t: np.ndarray, x_t: np.ndarray, grad_f: np.ndarray, inside_threshold: float
) -> SurrogateContext:
    """Assemble a context from an already computed projection x_t of y_t."""
    g = np.asarray(grad_f, dtype=float)
    if not np.all(np.isfinite(g)):
        raise OracleError(f"Gradient oracle returned non-finite values: {g}")

    diff = y_t - x_t
    gap = float(np.linalg.norm(diff))
    if gap <= inside_threshold:
        # y_t is feasible: g_t degenerates to the linear loss <grad_f, .>
        return SurrogateContext(
            y_t=y_t,
            x_t=x_t,
            grad_f=g,
            v_t=np.zeros_like(y_t),
            alignment=0.0,
            inward_flag=False,
            gap=gap,
        )

    v = diff / gap
    alignment = float(g @ v)
    return SurrogateContext(
        y_t=y_t,
        x_t=x_t,
        grad_f=g,
        v_t=v,
        alignment=alignment,
        inward_flag=alignment < 0,
        gap=gap,
    )


def linear_context(x: np.ndarray, grad_f: np.ndarray) -> SurrogateContext:
    """Context for a decision already in X (y_t = x_t); performs no projection."""
    x = np.asarray(x, dtype=float)
    return context_from_projection(x, x, grad_f, inside_threshold=np.inf)


def surrogate_value(ctx: SurrogateContext, y: np.ndarray, inner_domain: DomainSpec) -> float:
    """Evaluate g_t(y); costs one projection onto the inner domain."""
    y = np.asarray(y, dtype=float)
    value = float(ctx.grad_f @ y)
    if ctx.inward_flag:
        value -= ctx.alignment * distance_to(y, inner_domain)
    return value


def surrogate_grad(ctx: SurrogateContext) -> np.ndarray:
    """
    Gradient of g_t at y_t from x_t and y_t alone (zero projections).

    When the gradient points into the domain along v_t, its component along
    v_t is removed, so ||result|| <= ||grad_f||.
    """
    if ctx.inward_flag:
        return ctx.grad_f - ctx.alignment * ctx.v_t
    return ctx.grad_f.copy()


def delta_term(ctx: SurrogateContext) -> float:
    """1{alignment >= 0} * <grad_f, y_t - x_t>, which equals alignment * gap."""
    if ctx.inward_flag:
        return 0.0
    # alignment is zero when y_t counts as inside X
    return ctx.alignment * ctx.gap

"""
Legacy surrogate  g^_t(y) = <grad_f, y> + ||grad_f|| * S_X(y).

Kept for comparison with the current surrogate: it only satisfies the
factor-two value inequality <grad_f, x_t - x> <= 2 (g^_t(y_t) - g^_t(x)).
"""

import numpy as np

from app.domains.base import DomainSpec
from app.domains.projection import distance_to
from app.surrogate.context import SurrogateContext


def legacy_surrogate_value(ctx: SurrogateContext, y: np.ndarray, inner_domain: DomainSpec) -> float:
    y = np.asarray(y, dtype=float)
    return float(ctx.grad_f @ y) + float(np.linalg.norm(ctx.grad_f)) * distance_to(y, inner_domain)


def legacy_surrogate_grad(ctx: SurrogateContext) -> np.ndarray:
    # v_t is zero whenever y_t is inside X, which selects grad_f there
    return ctx.grad_f + float(np.linalg.norm(ctx.grad_f)) * ctx.v_t

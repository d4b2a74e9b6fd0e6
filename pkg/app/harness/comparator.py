"""
Offline comparator: min over X of the summed loss.

Every stream's summed loss is a convex quadratic, so projected gradient
descent with step 1/L (L the largest eigenvalue of the summed Hessian) is a
true oracle. Purely linear sums use a long step that lands on the optimal
face. Pure quadratic streams are cross-checked against proj_X of the
weighted mean of the centers.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.domains.base import DomainSpec
from app.errors import NonConvergence
from app.harness.families import LossStream, sample_feasible
from app.utils.log import logger


@dataclass(frozen=True)
class ComparatorResult:
    """Best fixed decision in hindsight; ``converged`` is False if PGD hit its budget."""

    x: np.ndarray
    value: float
    converged: bool
    residual: float
    method: str = "pgd"


def _pgd(
    stream: LossStream,
    domain: DomainSpec,
    start: np.ndarray,
    rounds: int,
    step: float,
    threshold: float,
    max_iter: int,
):
    x = domain.project(start)
    residual = np.inf
    for _ in range(max_iter):
        x_next = domain.project(x - step * stream.total_gradient(x, rounds))
        residual = float(np.linalg.norm(x_next - x)) / step
        x = x_next
        if residual <= threshold:
            return x, residual, True
    return x, residual, False


def comparator_loss(
    stream: LossStream,
    domain: DomainSpec,
    rounds: Optional[int] = None,
    starts: int = 8,
    seed: int = 0,
    tol: Optional[float] = None,
    max_iter: int = 20_000,
    strict: bool = False,
) -> ComparatorResult:
    """
    Minimize the summed loss of the first ``rounds`` rounds over ``domain``.

    Args:
        stream: Materialized loss stream
        domain: Feasible domain X
        rounds: Number of leading rounds to sum (default: all)
        starts: Number of starting points (the origin plus random feasible points)
        seed: Seed for the random starts
        tol: Gradient-mapping tolerance per round; defaults to
            max(1e-8, 10 * projection tolerance)
        max_iter: PGD iteration budget per start
        strict: Raise instead of flagging non-convergence

    Raises:
        NonConvergence: Only with ``strict``; ``best`` holds the ComparatorResult
    """
    n = stream.horizon if rounds is None else int(rounds)
    if tol is None:
        tol = max(1e-8, 10.0 * domain.projection_tolerance)
    threshold = tol * max(1, n)

    if n == 0:
        return ComparatorResult(x=np.zeros(domain.dimension), value=0.0, converged=True, residual=0.0, method="empty")

    curvature = float(np.linalg.eigvalsh(stream.total_hessian(n)).max())
    if curvature > 1e-12:
        step = 1.0 / curvature
    else:
        g = float(np.linalg.norm(stream.total_gradient(np.zeros(domain.dimension), n)))
        step = 1e3 * domain.diameter_bound / max(g, 1e-300)

    rng = np.random.default_rng(seed)
    candidates = [np.zeros(domain.dimension)]
    if starts > 1:
        candidates.extend(sample_feasible(domain, rng, starts - 1))

    best: Optional[ComparatorResult] = None
    for start in candidates:
        x, residual, converged = _pgd(stream, domain, start, n, step, threshold, max_iter)
        value = stream.total_loss(x, n)
        if best is None or value < best.value:
            best = ComparatorResult(x=x, value=value, converged=converged, residual=residual)

    closed = stream.closed_form_minimizer(domain, n)
    if closed is not None:
        closed_value = stream.total_loss(closed, n)
        scale = max(1.0, abs(best.value))
        if abs(closed_value - best.value) > 1e-6 * scale:
            logger.warning(
                f"Comparator cross-check mismatch: PGD {best.value:.10g} vs closed form {closed_value:.10g}"
            )
        if closed_value < best.value:
            best = ComparatorResult(x=closed, value=closed_value, converged=True, residual=0.0, method="closed-form")

    if not best.converged:
        logger.warning(
            f"Comparator did not converge in {max_iter} iterations (residual {best.residual:.3e}); "
            f"using best value {best.value:.10g}"
        )
        if strict:
            raise NonConvergence("Comparator did not converge", residual=best.residual, best=best)
    return best

"""
Generalized projection of the online Newton step onto the outer ball.

Solves  argmin_{||y|| <= D} (y - y_hat)^T Sigma (y - y_hat).  When y_hat is
outside the ball the minimizer is y(mu) = (Sigma + mu I)^{-1} Sigma y_hat with
mu > 0 the root of ||y(mu)|| = D; ||y(mu)|| is decreasing in mu.
"""

import numpy as np
from scipy.optimize import brentq

from app.domains.base import rescale_to_ball
from app.errors import SingularMatrix
from app.experts.base import OnsProjection


def generalized_projection(
    sigma: np.ndarray,
    y_hat: np.ndarray,
    radius: float,
    method: OnsProjection = "exact",
    beta_hat: float = 1.0,
) -> np.ndarray:
    """
    Project ``y_hat`` onto the ball of ``radius`` in the Sigma-metric.

    Args:
        sigma: Symmetric positive-definite matrix
        y_hat: Unconstrained Newton step
        radius: Ball radius D
        method: ``exact`` (multiplier root) or ``paper_formula`` (fixed spectral
            shift 4 beta_hat D^2 applied to Sigma - I/(beta_hat^2 D^2), followed by
            a radial rescale when it lands outside the ball)
        beta_hat: Only used by ``paper_formula``

    Returns:
        A point with norm at most ``radius``
    """
    if float(np.linalg.norm(y_hat)) <= radius:
        return y_hat.copy()

    eigvals, eigvecs = np.linalg.eigh(sigma)
    if method == "paper_formula":
        shifted = eigvals - 1.0 / (beta_hat**2 * radius**2)
        coords = (eigvecs.T @ (sigma @ y_hat)) / (4.0 * beta_hat * radius**2 + shifted)
        return rescale_to_ball(eigvecs @ coords, radius)

    if not np.all(np.isfinite(eigvals)) or eigvals.min() <= 0:
        raise SingularMatrix(f"Sigma is not positive definite (min eigenvalue {eigvals.min():.3e})")

    coords = eigvecs.T @ y_hat

    def excess(mu: float) -> float:
        return float(np.linalg.norm(eigvals * coords / (eigvals + mu))) - radius

    # ||y(mu)|| <= lambda_max ||y_hat|| / (lambda_max + mu), so this mu is feasible
    mu_high = eigvals.max() * (float(np.linalg.norm(y_hat)) / radius - 1.0) * (1.0 + 1e-9) + 1e-300
    mu = brentq(excess, 0.0, mu_high, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)

    y = eigvecs @ (eigvals * coords / (eigvals + mu))
    # root tolerance may leave the norm a few ulps above the radius
    return rescale_to_ball(y, radius)

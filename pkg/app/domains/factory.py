"""Domain construction helpers used by the harness and the tests."""

import math
from typing import Optional

import numpy as np

from app.domains.base import DomainSpec, HalfspaceDomain
from app.errors import ConfigError
from app.utils.log import logger


def random_halfspace_domain(
    dimension: int,
    n_halfspaces: int,
    rng: np.random.Generator,
    projection_tolerance: float = 1e-8,
    max_projection_iterations: int = 100_000,
) -> HalfspaceDomain:
    """
    Bounded polytope built from halfspaces that all contain the origin.

    The first 2*d rows are the faces of [-1, 1]^d, which keeps the set
    bounded; the remaining rows have random unit normals and offsets in
    [0.25, 1].

    Args:
        dimension: Ambient dimension d
        n_halfspaces: Total number of rows m (at least 2*d)
        rng: Source of randomness

    Returns:
        HalfspaceDomain with diameter bound 2*sqrt(d) and radius bound sqrt(d)
    """
    if n_halfspaces < 2 * dimension:
        raise ConfigError(
            f"Need at least {2 * dimension} halfspaces to bound a {dimension}-d polytope, "
            f"got {n_halfspaces}"
        )
    eye = np.eye(dimension)
    box_normals = np.vstack([eye, -eye])
    box_offsets = np.ones(2 * dimension)

    extra = n_halfspaces - 2 * dimension
    normals = rng.standard_normal((extra, dimension))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = rng.uniform(0.25, 1.0, size=extra)

    return HalfspaceDomain(
        dimension=dimension,
        normals=np.vstack([box_normals, normals]),
        offsets=np.concatenate([box_offsets, offsets]),
        diameter=2.0 * math.sqrt(dimension),
        radius=math.sqrt(dimension),
        projection_tolerance=projection_tolerance,
        max_projection_iterations=max_projection_iterations,
    )


def validate_diameter(
    domain: DomainSpec,
    rng: np.random.Generator,
    samples: int = 256,
    spread: Optional[float] = None,
) -> float:
    """
    Check a declared diameter bound by sampling projected points.

    Random points far outside the domain are projected; the largest pairwise
    distance among the projections (and their largest norm against the radius
    bound) must not exceed the declared bounds.

    Args:
        domain: Domain whose bounds are checked
        rng: Source of randomness
        samples: Number of projected points
        spread: Scale of the sampled points (defaults to 10x the diameter bound)

    Returns:
        The observed spread (largest pairwise distance)

    Raises:
        ConfigError: If the observed spread or norm exceeds the declared bound
    """
    scale = spread if spread is not None else 10.0 * domain.diameter_bound
    points = rng.standard_normal((samples, domain.dimension)) * scale
    projected = np.array([domain.project(p) for p in points])

    diffs = projected[:, None, :] - projected[None, :, :]
    observed = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diffs, diffs))))
    max_norm = float(np.max(np.linalg.norm(projected, axis=1)))

    slack = 1e-9 + 4.0 * domain.projection_tolerance
    if observed > domain.diameter_bound + slack:
        raise ConfigError(
            f"Observed spread {observed:.6g} exceeds declared diameter bound {domain.diameter_bound:.6g}"
        )
    if max_norm > domain.radius_bound + slack:
        raise ConfigError(
            f"Observed norm {max_norm:.6g} exceeds declared radius bound {domain.radius_bound:.6g}"
        )
    logger.debug(f"Diameter check passed: spread {observed:.4g} <= {domain.diameter_bound:.4g}")
    return observed

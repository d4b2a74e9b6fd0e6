"""
Feasible domains with Euclidean projection oracles.

Usage:
    from app.domains import BallDomain, project, distance_to

    unit = BallDomain(dimension=2, radius=1.0)
    project([3.0, 4.0], unit)        # -> [0.6, 0.8]
    distance_to([2.0, 0.0], unit)    # -> 1.0
"""

from .base import (
    BallDomain,
    BoxDomain,
    DomainKind,
    DomainSpec,
    HalfspaceDomain,
    SimplexDomain,
    project_onto_simplex_face,
    rescale_to_ball,
)
from .factory import random_halfspace_domain, validate_diameter
from .projection import CountingDomain, distance_to, membership, project

__all__ = [
    "BallDomain",
    "BoxDomain",
    "CountingDomain",
    "DomainKind",
    "DomainSpec",
    "HalfspaceDomain",
    "SimplexDomain",
    "distance_to",
    "membership",
    "project",
    "project_onto_simplex_face",
    "random_halfspace_domain",
    "rescale_to_ball",
    "validate_diameter",
]

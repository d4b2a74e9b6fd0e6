"""
Convex feasible sets with Euclidean projection oracles.

Every domain contains the origin and carries a diameter bound that is never
an underestimate. Four variants are provided:
- BallDomain: {x : ||x|| <= r}, also used as the outer domain of the experts
- BoxDomain: per-coordinate bounds lower <= x <= upper
- SimplexDomain: the corner simplex {x >= 0, sum(x) <= s}
- HalfspaceDomain: {x : <a_j, x> <= b_j for all j}, projected with Dykstra

Domains are immutable; projection is a pure function of its input.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Optional

import numpy as np

from app.errors import ConfigError, DimensionMismatch, NonConvergence


class DomainKind(str, Enum):
    """Domain variant names used by configuration files."""

    BALL = "ball"
    BOX = "box"
    SIMPLEX = "simplex"
    HALFSPACES = "halfspaces"


@dataclass(frozen=True, kw_only=True, eq=False)
class DomainSpec(ABC):
    """
    Common fields and validation for every feasible set.

    Subclasses implement ``_project`` and the two norm bounds.
    """

    dimension: int
    projection_tolerance: float = 0.0
    max_projection_iterations: int = 100_000

    kind: ClassVar[DomainKind]

    def __post_init__(self):
        """Validate shared fields, then the variant-specific ones."""
        if not isinstance(self.dimension, int) or self.dimension <= 0:
            raise ConfigError(f"Domain dimension must be a positive integer, got {self.dimension}")
        if self.projection_tolerance < 0:
            raise ConfigError(
                f"projection_tolerance must be nonnegative, got {self.projection_tolerance}"
            )
        if self.max_projection_iterations <= 0:
            raise ConfigError(
                f"max_projection_iterations must be positive, got {self.max_projection_iterations}"
            )
        self._validate()

    def _validate(self) -> None:
        """Variant-specific validation hook."""

    @property
    @abstractmethod
    def diameter_bound(self) -> float:
        """Upper bound on the Euclidean diameter."""

    @property
    def radius_bound(self) -> float:
        """Upper bound on the norm of any member (the origin is a member)."""
        return self.diameter_bound

    @property
    def inside_threshold(self) -> float:
        """Distance below which a point counts as a member."""
        return max(1e-12, self.projection_tolerance)

    def project(self, point: np.ndarray) -> np.ndarray:
        """
        Euclidean projection onto the domain.

        Args:
            point: Vector of length ``dimension``

        Returns:
            The closest member (a new array)

        Raises:
            DimensionMismatch: If the point has the wrong shape
            NonConvergence: If an iterative projector misses its tolerance
        """
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dimension,):
            raise DimensionMismatch(self.dimension, x.shape[0] if x.ndim == 1 else -1)
        return self._project(x)

    @abstractmethod
    def _project(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, kw_only=True, eq=False)
class BallDomain(DomainSpec):
    """Centered Euclidean ball; the outer domain of every expert."""

    radius: float
    kind: ClassVar[DomainKind] = DomainKind.BALL

    def _validate(self) -> None:
        if not self.radius > 0:
            raise ConfigError(f"Ball radius must be positive, got {self.radius}")

    @property
    def diameter_bound(self) -> float:
        return 2.0 * self.radius

    @property
    def radius_bound(self) -> float:
        return self.radius

    def _project(self, x: np.ndarray) -> np.ndarray:
        return rescale_to_ball(x, self.radius)


@dataclass(frozen=True, kw_only=True, eq=False)
class BoxDomain(DomainSpec):
    """Axis-aligned box with lower <= 0 <= upper."""

    lower: np.ndarray
    upper: np.ndarray
    kind: ClassVar[DomainKind] = DomainKind.BOX

    def _validate(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (self.dimension,) or upper.shape != (self.dimension,):
            raise ConfigError(f"Box bounds must both have length {self.dimension}")
        if np.any(lower > 0) or np.any(upper < 0):
            raise ConfigError("Box must contain the origin (lower <= 0 <= upper)")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def diameter_bound(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def radius_bound(self) -> float:
        return float(np.linalg.norm(np.maximum(np.abs(self.lower), np.abs(self.upper))))

    def _project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True, kw_only=True, eq=False)
class SimplexDomain(DomainSpec):
    """Corner simplex {x >= 0, sum(x) <= scale}; contains the origin."""

    scale: float
    kind: ClassVar[DomainKind] = DomainKind.SIMPLEX

    def _validate(self) -> None:
        if not self.scale > 0:
            raise ConfigError(f"Simplex scale must be positive, got {self.scale}")

    @property
    def diameter_bound(self) -> float:
        # Two vertices s*e_i, s*e_j are the farthest pair
        return self.scale * (math.sqrt(2.0) if self.dimension > 1 else 1.0)

    @property
    def radius_bound(self) -> float:
        return self.scale

    def _project(self, x: np.ndarray) -> np.ndarray:
        clipped = np.maximum(x, 0.0)
        if clipped.sum() <= self.scale:
            return clipped
        return project_onto_simplex_face(x, self.scale)


@dataclass(frozen=True, kw_only=True, eq=False)
class HalfspaceDomain(DomainSpec):
    """
    Intersection of halfspaces <a_j, x> <= b_j with every b_j >= 0.

    The diameter bound is supplied by the caller; ``validate_diameter`` in
    ``app.domains.factory`` checks it by sampling.
    """

    normals: np.ndarray
    offsets: np.ndarray
    diameter: float
    radius: Optional[float] = None
    projection_tolerance: float = 1e-8
    kind: ClassVar[DomainKind] = DomainKind.HALFSPACES
    _norms_sq: np.ndarray = field(init=False, repr=False)

    def _validate(self) -> None:
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if normals.shape[1] != self.dimension:
            raise ConfigError(
                f"Halfspace normals must have {self.dimension} columns, got {normals.shape[1]}"
            )
        if normals.shape[0] != offsets.shape[0]:
            raise ConfigError("Each halfspace needs exactly one offset")
        if np.any(offsets < 0):
            raise ConfigError("Halfspaces must contain the origin (<a, 0> <= b requires b >= 0)")
        norms_sq = np.einsum("ij,ij->i", normals, normals)
        if np.any(norms_sq <= 0):
            raise ConfigError("Halfspace normals must be nonzero")
        if not self.diameter > 0:
            raise ConfigError(f"Diameter bound must be positive, got {self.diameter}")
        if self.radius is not None and not 0 < self.radius <= self.diameter:
            raise ConfigError("Radius bound must lie in (0, diameter]")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "_norms_sq", norms_sq)

    @property
    def n_halfspaces(self) -> int:
        return int(self.offsets.shape[0])

    @property
    def diameter_bound(self) -> float:
        return float(self.diameter)

    @property
    def radius_bound(self) -> float:
        return float(self.radius if self.radius is not None else self.diameter)

    def _project(self, x: np.ndarray) -> np.ndarray:
        return dykstra_halfspaces(
            x,
            self.normals,
            self.offsets,
            self._norms_sq,
            tol=self.projection_tolerance,
            max_sweeps=self.max_projection_iterations,
        )


def rescale_to_ball(x: np.ndarray, radius: float) -> np.ndarray:
    """Radial projection onto the centered ball of the given radius."""
    norm = float(np.linalg.norm(x))
    if norm <= radius:
        return x.copy()
    return x * (radius / norm)


def project_onto_simplex_face(v: np.ndarray, scale: float) -> np.ndarray:
    """
    Sort-and-threshold projection onto {w >= 0, sum(w) = scale}.

    Exact, O(d log d).
    """
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    ind = np.arange(1, v.shape[0] + 1)
    # number of positive components in the solution
    rho = int(np.nonzero(u * ind > (cssv - scale))[0][-1])
    theta = (cssv[rho] - scale) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def dykstra_halfspaces(
    x: np.ndarray,
    normals: np.ndarray,
    offsets: np.ndarray,
    norms_sq: np.ndarray,
    tol: float,
    max_sweeps: int,
) -> np.ndarray:
    """
    Cyclic Dykstra projection onto an intersection of halfspaces.

    Stops once a full sweep moves the iterate by at most ``tol`` and the
    largest constraint violation is at most ``tol``.

    Raises:
        NonConvergence: If ``max_sweeps`` sweeps do not reach the tolerance
    """
    if np.all(normals @ x - offsets <= tol):
        return x.copy()

    n_rows = offsets.shape[0]
    z = x.copy()
    increments = np.zeros_like(normals)
    residual = math.inf
    for _ in range(max_sweeps):
        z_prev = z
        for j in range(n_rows):
            w = z + increments[j]
            violation = float(normals[j] @ w) - offsets[j]
            if violation > 0:
                z = w - (violation / norms_sq[j]) * normals[j]
            else:
                z = w
            increments[j] = w - z
        change = float(np.linalg.norm(z - z_prev))
        max_violation = float(np.max(normals @ z - offsets))
        residual = max(change, max_violation)
        if residual <= tol:
            return z

    raise NonConvergence(
        f"Dykstra projection did not converge in {max_sweeps} sweeps", residual=residual, best=z
    )

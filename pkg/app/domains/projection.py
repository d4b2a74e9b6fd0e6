"""Projection, distance and membership operations over any DomainSpec."""

from typing import Any

import numpy as np

from app.domains.base import DomainSpec


def project(point: np.ndarray, domain: DomainSpec) -> np.ndarray:
    """Euclidean projection of ``point`` onto ``domain``."""
    return domain.project(point)


def distance_to(point: np.ndarray, domain: DomainSpec) -> float:
    """Distance function S_X(y) = ||y - proj_X(y)||."""
    y = np.asarray(point, dtype=float)
    return float(np.linalg.norm(y - domain.project(y)))


def membership(point: np.ndarray, domain: DomainSpec, tol: float = 0.0) -> bool:
    """True iff the point lies within ``tol`` of the domain."""
    return distance_to(point, domain) <= tol


class CountingDomain:
    """
    Instrumented wrapper that counts calls to ``project``.

    Everything else is delegated to the wrapped domain, so the wrapper can be
    passed anywhere a DomainSpec is expected. One instance per run.
    """

    def __init__(self, domain: DomainSpec):
        self._domain = domain
        self.calls = 0

    @property
    def wrapped(self) -> DomainSpec:
        return self._domain

    def project(self, point: np.ndarray) -> np.ndarray:
        self.calls += 1
        return self._domain.project(point)

    def reset(self) -> None:
        self.calls = 0

    def __getattr__(self, name: str) -> Any:
        # Only reached for attributes not defined on the wrapper itself
        if name == "_domain":
            raise AttributeError(name)
        return getattr(self._domain, name)

    def __repr__(self) -> str:
        return f"CountingDomain({self._domain!r}, calls={self.calls})"

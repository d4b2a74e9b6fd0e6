"""
UniversalConfig and its fluent builder.

Usage:
    config = (
        LearnerBuilder(horizon=1024)
        .with_domain(BallDomain(dimension=4, radius=1.0))
        .with_gradient_bound(2.0)
        .with_mode(Mode.SMALL_LOSS)
        .build()
    )
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from app.domains.base import DomainSpec
from app.errors import ConfigError
from app.experts.base import ExpertConfig, OnsProjection
from app.utils.log import logger


class Mode(str, Enum):
    """Expert-set variant: minimax rates, or small-loss rates under smoothness."""

    MINIMAX = "minimax"
    SMALL_LOSS = "small-loss"


@dataclass(frozen=True)
class UniversalConfig:
    """
    Static configuration of one run of the two-layer algorithm.

    ``D`` is the outer ball radius; it defaults to the inner domain's
    diameter bound and must cover the domain's radius bound. ``experts``
    overrides the grid. ``tracked_modulus`` selects the grid expert whose
    regret decomposition is audited.
    """

    horizon: int
    G: float
    inner_domain: DomainSpec
    D: Optional[float] = None
    mode: Mode = Mode.MINIMAX
    baseline: bool = False
    seed: int = 0
    ons_projection: OnsProjection = "exact"
    experts: Optional[List[ExpertConfig]] = field(default=None, compare=False)
    tracked_modulus: Optional[float] = None

    def __post_init__(self):
        """Validate and fill in D."""
        if not isinstance(self.horizon, int) or self.horizon < 2:
            raise ConfigError(f"Horizon T must be an integer >= 2, got {self.horizon}")
        if not self.G > 0:
            raise ConfigError(f"Gradient bound G must be positive, got {self.G}")
        if not isinstance(self.inner_domain, DomainSpec):
            raise ConfigError(f"inner_domain must be a DomainSpec, got {type(self.inner_domain).__name__}")
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))

        if self.D is None:
            object.__setattr__(self, "D", float(self.inner_domain.diameter_bound))
        radius = self.inner_domain.radius_bound
        if self.D < radius * (1 - 1e-12):
            raise ConfigError(f"Outer radius D={self.D} does not cover the domain (radius bound {radius})")

        if self.experts is not None:
            if not self.experts:
                raise ConfigError("An explicit expert list must not be empty")
            for expert in self.experts:
                if expert.D != self.D or expert.G != self.G or expert.horizon != self.horizon:
                    raise ConfigError(f"Expert {expert.label} disagrees with the run's G, D or T")

    @property
    def dimension(self) -> int:
        return self.inner_domain.dimension


class LearnerBuilder:
    """Fluent construction of UniversalConfig."""

    def __init__(self, horizon: int):
        if not isinstance(horizon, int) or horizon < 2:
            raise ConfigError(f"Horizon T must be an integer >= 2, got {horizon}")
        self._horizon = horizon
        self._G: Optional[float] = None
        self._domain: Optional[DomainSpec] = None
        self._D: Optional[float] = None
        self._mode = Mode.MINIMAX
        self._baseline = False
        self._seed = 0
        self._ons_projection: OnsProjection = "exact"
        self._experts: Optional[List[ExpertConfig]] = None
        self._tracked_modulus: Optional[float] = None

    def with_domain(self, domain: DomainSpec, D: Optional[float] = None) -> "LearnerBuilder":
        self._domain = domain
        self._D = D
        return self

    def with_gradient_bound(self, G: float) -> "LearnerBuilder":
        self._G = float(G)
        return self

    def with_mode(self, mode: Mode) -> "LearnerBuilder":
        self._mode = Mode(mode)
        return self

    def with_baseline(self, enabled: bool = True) -> "LearnerBuilder":
        """Keep every expert inside X with one projection per expert per round."""
        self._baseline = enabled
        return self

    def with_seed(self, seed: int) -> "LearnerBuilder":
        self._seed = int(seed)
        return self

    def with_ons_projection(self, method: OnsProjection) -> "LearnerBuilder":
        self._ons_projection = method
        return self

    def with_experts(self, *kinds_and_moduli) -> "LearnerBuilder":
        """
        Replace the grid with explicit experts.

        Args:
            kinds_and_moduli: ``(ExpertKind, modulus or None)`` pairs; G, D and
                T are taken from the builder at build time
        """
        self._experts = list(kinds_and_moduli)
        return self

    def tracking(self, modulus: Optional[float]) -> "LearnerBuilder":
        """Audit the grid expert matched to this strong convexity modulus."""
        self._tracked_modulus = modulus
        return self

    def build(self) -> UniversalConfig:
        """
        Build and validate the configuration.

        Raises:
            ConfigError: If the domain or gradient bound is missing, or any
                value is invalid
        """
        if self._domain is None:
            raise ConfigError("LearnerBuilder needs a domain (with_domain)")
        if self._G is None:
            raise ConfigError("LearnerBuilder needs a gradient bound (with_gradient_bound)")

        D = self._D if self._D is not None else float(self._domain.diameter_bound)
        experts = None
        if self._experts is not None:
            experts = [
                ExpertConfig(
                    kind=kind,
                    G=self._G,
                    D=D,
                    horizon=self._horizon,
                    modulus=modulus,
                    ons_projection=self._ons_projection,
                )
                for kind, modulus in self._experts
            ]
            logger.debug(f"Explicit experts: {', '.join(e.label for e in experts)}")

        return UniversalConfig(
            horizon=self._horizon,
            G=self._G,
            inner_domain=self._domain,
            D=D,
            mode=self._mode,
            baseline=self._baseline,
            seed=self._seed,
            ons_projection=self._ons_projection,
            experts=experts,
            tracked_modulus=self._tracked_modulus,
        )

"""
Expert configuration and state.

Each expert runs over the outer ball {y : ||y|| <= D} and is one of five
kinds, each pairing an expert-loss with the algorithm that minimizes it:
- CVX:        linear loss, OGD with step 1/sqrt(t)
- CVX_SMOOTH: linear loss, scale-free OGD
- EXP:        exp-concave loss, online Newton step
- SC:         strongly convex loss anchored at x_t, OGD with step 1/(lambda t)
- SC_SMOOTH:  gradient-scaled strongly convex loss, smooth and strongly convex OGD
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Literal, Optional

import numpy as np

from app.errors import ConfigError

OnsProjection = Literal["exact", "paper_formula"]


class ExpertKind(str, Enum):
    """Expert kinds; the value is the name used in logs and CSV summaries."""

    CVX = "cvx"
    CVX_SMOOTH = "cvx_smooth"
    EXP = "exp"
    SC = "sc"
    SC_SMOOTH = "sc_smooth"


@dataclass(frozen=True)
class ExpertKindMetadata:
    """Descriptive information about an expert kind."""

    algorithm: str
    loss: str
    modulus: Optional[str] = None
    smooth: bool = False


EXPERT_KIND_METADATA: Dict[ExpertKind, ExpertKindMetadata] = {
    ExpertKind.CVX: ExpertKindMetadata(algorithm="OGD", loss="linear"),
    ExpertKind.CVX_SMOOTH: ExpertKindMetadata(algorithm="SOGD", loss="linear", smooth=True),
    ExpertKind.EXP: ExpertKindMetadata(algorithm="ONS", loss="exp-concave", modulus="alpha"),
    ExpertKind.SC: ExpertKindMetadata(algorithm="OGD", loss="strongly convex", modulus="lambda"),
    ExpertKind.SC_SMOOTH: ExpertKindMetadata(
        algorithm="S2OGD", loss="strongly convex (scaled)", modulus="lambda", smooth=True
    ),
}

_MODULUS_KINDS = {ExpertKind.EXP, ExpertKind.SC, ExpertKind.SC_SMOOTH}


@dataclass(frozen=True)
class ExpertConfig:
    """
    Static parameters of one expert.

    ``modulus`` is alpha_hat for EXP experts and lambda_hat for SC and
    SC_SMOOTH experts; it must lie in [1/T, 1].
    """

    kind: ExpertKind
    G: float
    D: float
    horizon: int
    modulus: Optional[float] = None
    ons_projection: OnsProjection = "exact"

    def __post_init__(self):
        """Validate parameters after initialization."""
        if not isinstance(self.kind, ExpertKind):
            object.__setattr__(self, "kind", ExpertKind(self.kind))
        if not self.G > 0 or not self.D > 0:
            raise ConfigError(f"G and D must be positive, got G={self.G}, D={self.D}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ConfigError(f"Horizon must be a positive integer, got {self.horizon}")
        if self.kind in _MODULUS_KINDS:
            if self.modulus is None:
                raise ConfigError(f"Expert kind {self.kind.value} requires a modulus")
            low = 1.0 / self.horizon
            if not (low * (1 - 1e-12) <= self.modulus <= 1.0 + 1e-12):
                raise ConfigError(
                    f"Modulus {self.modulus} for {self.kind.value} outside [1/T, 1] = [{low:.3g}, 1]"
                )
        if self.ons_projection not in ("exact", "paper_formula"):
            raise ConfigError(f"Unknown ons_projection: {self.ons_projection}")

    @property
    def metadata(self) -> ExpertKindMetadata:
        return EXPERT_KIND_METADATA[self.kind]

    @property
    def beta_hat(self) -> float:
        """beta_hat = 1/2 min{1/(4GD), alpha_hat} (EXP experts only)."""
        if self.kind is not ExpertKind.EXP:
            raise ConfigError("beta_hat is only defined for EXP experts")
        return 0.5 * min(1.0 / (4.0 * self.G * self.D), self.modulus)

    @property
    def sogd_alpha(self) -> float:
        return self.D / math.sqrt(2.0)

    @property
    def sogd_delta(self) -> float:
        return self.G**2

    @property
    def label(self) -> str:
        if self.modulus is None:
            return self.kind.value
        return f"{self.kind.value}({self.modulus:.6g})"


@dataclass
class ExpertState:
    """
    Mutable-by-replacement state of one expert.

    ``sigma`` is only set for EXP experts; ``cumulative_sq`` accumulates
    ||grad g_s(y_s)||^2 for the smooth kinds.
    """

    iterate: np.ndarray
    t: int = 1
    sigma: Optional[np.ndarray] = field(default=None, repr=False)
    cumulative_sq: float = 0.0


def init_expert_state(config: ExpertConfig, dimension: int) -> ExpertState:
    """Start at the origin; ONS starts with Sigma = I / (beta_hat^2 D^2)."""
    sigma = None
    if config.kind is ExpertKind.EXP:
        sigma = np.eye(dimension) / (config.beta_hat**2 * config.D**2)
    return ExpertState(iterate=np.zeros(dimension), t=1, sigma=sigma)


def expert_predict(state: ExpertState) -> np.ndarray:
    """Current decision of the expert; does not change the state."""
    return state.iterate.copy()

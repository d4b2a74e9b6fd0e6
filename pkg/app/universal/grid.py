"""Expert grid over the unknown curvature moduli."""

import math
from typing import List, Optional, Sequence

from app.errors import ConfigError
from app.experts.base import ExpertConfig, ExpertKind, OnsProjection
from app.universal.config import Mode


def modulus_grid(horizon: int) -> List[float]:
    """{min(2^k / T, 1) : k = 0..ceil(log2 T)} with duplicates removed, ascending."""
    if horizon < 2:
        raise ConfigError(f"Horizon T must be >= 2, got {horizon}")
    n = math.ceil(math.log2(horizon))
    values = sorted({min(2.0**k / horizon, 1.0) for k in range(n + 1)})
    return values


def build_expert_grid(
    horizon: int,
    G: float,
    D: float,
    mode: Mode = Mode.MINIMAX,
    ons_projection: OnsProjection = "exact",
) -> List[ExpertConfig]:
    """
    One convex expert, one ONS expert per alpha_hat and one strongly convex
    expert per lambda_hat.

    In small-loss mode the convex and strongly convex experts use their
    smooth variants.
    """
    mode = Mode(mode)
    grid = modulus_grid(horizon)
    convex_kind = ExpertKind.CVX if mode is Mode.MINIMAX else ExpertKind.CVX_SMOOTH
    sc_kind = ExpertKind.SC if mode is Mode.MINIMAX else ExpertKind.SC_SMOOTH

    def make(kind: ExpertKind, modulus: Optional[float] = None) -> ExpertConfig:
        return ExpertConfig(
            kind=kind, G=G, D=D, horizon=horizon, modulus=modulus, ons_projection=ons_projection
        )

    experts = [make(convex_kind)]
    experts.extend(make(ExpertKind.EXP, alpha) for alpha in grid)
    experts.extend(make(sc_kind, lam) for lam in grid)
    return experts


def matched_expert_index(
    experts: Sequence[ExpertConfig],
    modulus: Optional[float],
    kinds: Sequence[ExpertKind] = (ExpertKind.SC, ExpertKind.SC_SMOOTH),
) -> Optional[int]:
    """
    Index of the expert with the largest modulus not exceeding ``modulus``.

    With the grid above this satisfies lambda_hat <= lambda <= 2 lambda_hat
    for every lambda in [1/T, 1]. Returns None if no expert of ``kinds`` has a
    small enough modulus.
    """
    if modulus is None or modulus <= 0:
        return None
    best: Optional[int] = None
    for index, expert in enumerate(experts):
        if expert.kind not in kinds or expert.modulus is None:
            continue
        if expert.modulus <= modulus * (1 + 1e-12):
            if best is None or expert.modulus > experts[best].modulus:
                best = index
    return best


def convex_expert_index(experts: Sequence[ExpertConfig]) -> Optional[int]:
    for index, expert in enumerate(experts):
        if expert.kind in (ExpertKind.CVX, ExpertKind.CVX_SMOOTH):
            return index
    return None

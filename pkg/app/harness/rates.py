"""Growth-rate fitting over checkpoint horizons."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.errors import DegenerateRate

CHECKPOINT_HORIZONS = (2**10, 2**11, 2**12, 2**13, 2**14)
MIN_CHECKPOINTS = 4
# Regret at or below this fraction of T counts as numerically zero
REGRET_NOISE_FLOOR = 1e-6


@dataclass(frozen=True)
class RateFit:
    """
    Least-squares growth fit.

    ``exponent`` is the slope of log(regret) against log(T) and is None when
    some checkpoint regret is at or below the noise floor ``REGRET_NOISE_FLOOR * T``
    (``bounded``). ``log_slope`` is the slope of regret against ln(T).
    """

    exponent: Optional[float]
    log_slope: float
    bounded: bool
    n_checkpoints: int

    def describe(self) -> str:
        if self.bounded:
            return "bounded"
        return f"{self.exponent:.3f}"


def fit_rate(horizons: Sequence[int], regrets: Sequence[float]) -> RateFit:
    """
    Fit regret growth across checkpoint horizons.

    Raises:
        DegenerateRate: With fewer than four checkpoints or mismatched inputs
    """
    T = np.asarray(horizons, dtype=float)
    R = np.asarray(regrets, dtype=float)
    if T.shape != R.shape:
        raise DegenerateRate(f"{T.shape[0]} horizons but {R.shape[0]} regrets")
    if T.shape[0] < MIN_CHECKPOINTS:
        raise DegenerateRate(f"Need at least {MIN_CHECKPOINTS} checkpoints, got {T.shape[0]}")
    if np.any(T < 2) or np.unique(T).shape[0] != T.shape[0]:
        raise DegenerateRate("Checkpoint horizons must be distinct and at least 2")
    if not np.all(np.isfinite(R)):
        raise DegenerateRate("Checkpoint regrets must be finite")

    log_slope = float(np.polyfit(np.log(T), R, 1)[0])
    if np.any(R <= REGRET_NOISE_FLOOR * T):
        return RateFit(exponent=None, log_slope=log_slope, bounded=True, n_checkpoints=int(T.shape[0]))
    exponent = float(np.polyfit(np.log(T), np.log(R), 1)[0])
    return RateFit(exponent=exponent, log_slope=log_slope, bounded=False, n_checkpoints=int(T.shape[0]))


def pooled_rate_fit(horizons: Sequence[int], regrets_by_seed: Sequence[Sequence[float]]) -> RateFit:
    """
    Fit the growth of the seed-averaged regret.

    Raises:
        DegenerateRate: With no seeds or ragged rows, or as in ``fit_rate``
    """
    try:
        table = np.asarray(regrets_by_seed, dtype=float)
    except ValueError as exc:
        raise DegenerateRate(f"Ragged checkpoint regrets: {exc}") from exc
    if table.ndim != 2 or table.shape[0] == 0:
        raise DegenerateRate("Need one row of checkpoint regrets per seed")
    return fit_rate(horizons, table.mean(axis=0))

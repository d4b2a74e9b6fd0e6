"""
Update-rule registry for expert kinds.

Update rules register themselves with the @register_update decorator when
``app.experts.updates`` is imported:

    @register_update(ExpertKind.CVX)
    def ogd_update(state, config, ctx, surr_grad):
        ...
"""

from typing import Callable, Dict, List

import numpy as np

from app.errors import ConfigError
from app.experts.base import ExpertConfig, ExpertKind, ExpertState
from app.surrogate.context import SurrogateContext
from app.utils.log import logger

UpdateFn = Callable[[ExpertState, ExpertConfig, SurrogateContext, np.ndarray], ExpertState]


class UpdateRegistry:
    """Singleton mapping each ExpertKind to its update rule."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._updates = {}
        return cls._instance

    def register(self, kind: ExpertKind, func: UpdateFn) -> None:
        """Register ``func`` for ``kind``; the first registration wins."""
        if kind in self._updates:
            logger.debug(f"Update rule for {kind.value} already registered, keeping {self._updates[kind].__name__}")
            return
        self._updates[kind] = func

    def get(self, kind: ExpertKind) -> UpdateFn:
        """
        Look up the update rule for ``kind``.

        Raises:
            ConfigError: If no rule is registered
        """
        try:
            return self._updates[kind]
        except KeyError:
            raise ConfigError(f"No update rule registered for expert kind {kind.value}") from None

    def kinds(self) -> List[ExpertKind]:
        return list(self._updates)

    @property
    def updates(self) -> Dict[ExpertKind, UpdateFn]:
        return dict(self._updates)


def register_update(kind: ExpertKind) -> Callable[[UpdateFn], UpdateFn]:
    """Decorator registering an update rule for one expert kind."""

    def decorator(func: UpdateFn) -> UpdateFn:
        UpdateRegistry().register(kind, func)
        return func

    return decorator


def expert_update(
    state: ExpertState,
    config: ExpertConfig,
    ctx: SurrogateContext,
    surr_grad: np.ndarray,
) -> ExpertState:
    """
    Advance one expert by a round.

    Returns a new ExpertState; ``state`` is left untouched so that a failed
    round can be discarded. No projection onto the inner domain happens here.

    Raises:
        SingularMatrix: If the ONS matrix cannot be inverted
    """
    return UpdateRegistry().get(config.kind)(state, config, ctx, surr_grad)

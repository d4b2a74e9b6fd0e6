"""Algorithms selectable with ``uoco run --algo``."""

from app.experts.base import ExpertKind
from app.harness.registry import AlgorithmContext, register_algorithm
from app.universal.config import LearnerBuilder, Mode, UniversalConfig


def _builder(context: AlgorithmContext) -> LearnerBuilder:
    return (
        LearnerBuilder(context.horizon)
        .with_domain(context.domain)
        .with_gradient_bound(context.certificates.G)
        .with_seed(context.seed)
        .with_ons_projection(context.ons_projection)
        .tracking(context.certificates.lam or None)
    )


@register_algorithm("universal", tags=["one-projection"])
def create_universal(context: AlgorithmContext) -> UniversalConfig:
    """Minimax grid of experts with one projection per round."""
    return _builder(context).with_mode(Mode.MINIMAX).build()


@register_algorithm("universal-smooth", tags=["one-projection", "small-loss"])
def create_universal_smooth(context: AlgorithmContext) -> UniversalConfig:
    """Small-loss grid (smooth expert variants) with one projection per round."""
    return _builder(context).with_mode(Mode.SMALL_LOSS).build()


@register_algorithm("baseline", tags=["multi-projection"])
def create_baseline(context: AlgorithmContext) -> UniversalConfig:
    """Minimax grid with every expert projected onto X each round."""
    return _builder(context).with_mode(Mode.MINIMAX).with_baseline().build()


@register_algorithm("ogd", tags=["single-expert"])
def create_ogd(context: AlgorithmContext) -> UniversalConfig:
    """Projected online gradient descent with step 1/sqrt(t)."""
    return _builder(context).with_experts((ExpertKind.CVX, None)).with_baseline().build()


@register_algorithm("ons", tags=["single-expert"])
def create_ons(context: AlgorithmContext) -> UniversalConfig:
    """Online Newton step tuned to the stream's exp-concavity, projected onto X."""
    T = context.horizon
    alpha = context.certificates.alpha if context.certificates.alpha is not None else 1.0 / T
    alpha = min(1.0, max(1.0 / T, alpha))
    return _builder(context).with_experts((ExpertKind.EXP, alpha)).with_baseline().build()

"""
Two-layer universal algorithm with one projection onto the feasible domain per round.

Usage:
    from app.universal import LearnerBuilder, run

    config = LearnerBuilder(horizon=256).with_domain(domain).with_gradient_bound(G).build()
    trace = run(config, stream)
"""

from .algorithm import (
    RoundOutcome,
    UniversalState,
    baseline_round,
    init_state,
    universal_round,
)
from .audit import AuditInput, decomposition_audit
from .config import LearnerBuilder, Mode, UniversalConfig
from .grid import build_expert_grid, convex_expert_index, matched_expert_index, modulus_grid
from .runner import run, tracked_expert_index

__all__ = [
    "AuditInput",
    "LearnerBuilder",
    "Mode",
    "RoundOutcome",
    "UniversalConfig",
    "UniversalState",
    "baseline_round",
    "build_expert_grid",
    "convex_expert_index",
    "decomposition_audit",
    "init_state",
    "matched_expert_index",
    "modulus_grid",
    "run",
    "tracked_expert_index",
    "universal_round",
]

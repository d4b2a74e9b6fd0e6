"""Run a configured learner over a loss stream and record its trace."""

import time
from typing import List, Optional

import numpy as np

from app.domains.projection import CountingDomain
from app.errors import ConfigError, UocoError
from app.harness.comparator import comparator_loss
from app.harness.families import LossStream
from app.harness.records import RoundRecord, Trace
from app.universal.algorithm import UniversalState, baseline_round, init_state, universal_round
from app.universal.audit import AuditInput, decomposition_audit
from app.universal.config import UniversalConfig
from app.universal.grid import convex_expert_index, matched_expert_index
from app.utils.log import logger


def tracked_expert_index(config: UniversalConfig, state: UniversalState) -> Optional[int]:
    """The matched strongly convex expert, else the convex expert, else None."""
    index = matched_expert_index(state.experts, config.tracked_modulus)
    if index is None:
        index = convex_expert_index(state.experts)
    return index


def run(config: UniversalConfig, stream: LossStream, algo: str = "universal", record_timing: bool = True) -> Trace:
    """
    Play all rounds of ``stream`` and build the trace.

    Regret is measured against the best fixed point of the completed rounds.
    An error inside a round stops the run; the trace then covers the
    completed rounds and is flagged ``partial``.

    Raises:
        ConfigError: If the stream and configuration disagree on T or d
    """
    if stream.horizon != config.horizon or stream.dimension != config.dimension:
        raise ConfigError(
            f"Stream (T={stream.horizon}, d={stream.dimension}) does not match "
            f"configuration (T={config.horizon}, d={config.dimension})"
        )

    counter = CountingDomain(config.inner_domain)
    round_fn = baseline_round if config.baseline else universal_round
    state = init_state(config)
    tracked = tracked_expert_index(config, state)

    trace = Trace(
        algo=algo,
        horizon=config.horizon,
        dimension=config.dimension,
        n_experts=state.n_experts,
        tracked_expert=state.experts[tracked].label if tracked is not None else None,
    )
    logger.info(
        f"Starting {algo}: T={config.horizon}, d={config.dimension}, |A|={state.n_experts}, "
        f"domain={config.inner_domain.kind.value}"
    )

    losses: List[float] = []
    walls: List[int] = []
    projections: List[int] = []
    deltas: List[float] = []
    metas: List[float] = []
    audit_inputs: List[AuditInput] = []

    for t in range(1, config.horizon + 1):
        start = time.perf_counter_ns()
        try:
            outcome = round_fn(state, config, lambda x, t=t: stream.gradient(t, x), domain=counter)
        except UocoError as exc:
            logger.error(f"{algo} aborted at round {t}: {exc}")
            trace.partial = True
            trace.error = str(exc)
            trace.error_type = type(exc).__name__
            break
        walls.append(time.perf_counter_ns() - start if record_timing else 0)

        state = outcome.state
        losses.append(stream.loss(t, outcome.x_t))
        projections.append(state.projection_count)
        deltas.append(outcome.delta)
        if tracked is not None:
            y_i = outcome.expert_iterates[tracked]
            metas.append(float(outcome.surr_grad @ (outcome.y_t - y_i)))
            audit_inputs.append(
                AuditInput(t=t, ctx=outcome.ctx, surr_grad=outcome.surr_grad, tracked_iterate=y_i, delta=outcome.delta)
            )

    completed = len(losses)
    comparator = comparator_loss(stream, config.inner_domain, rounds=completed, seed=config.seed)
    trace.comparator = comparator
    trace.counted_projections = counter.calls

    cum_loss = np.cumsum(losses)
    comp_cum = np.cumsum(stream.losses_at(comparator.x, completed))
    delta_sum = np.cumsum(deltas)
    meta_sum = np.cumsum(metas) if metas else None
    for i in range(completed):
        trace.records.append(
            RoundRecord(
                t=i + 1,
                loss=float(losses[i]),
                cum_loss=float(cum_loss[i]),
                comp_cum_loss=float(comp_cum[i]),
                regret=float(cum_loss[i] - comp_cum[i]),
                proj_count=int(projections[i]),
                delta_sum=float(delta_sum[i]),
                wall_ns=int(walls[i]),
                meta_regret=float(meta_sum[i]) if meta_sum is not None else None,
            )
        )

    if tracked is not None and completed:
        trace.audit = decomposition_audit(audit_inputs, state.experts[tracked], stream, comparator.x)

    logger.info(
        f"Finished {algo}: {completed}/{config.horizon} rounds, regret {trace.final_regret:.6g}, "
        f"projections {trace.total_projections} (counted {counter.calls})"
    )
    return trace

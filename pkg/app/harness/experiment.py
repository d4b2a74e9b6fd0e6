"""
Config-file driven experiments.

A YAML file holds either one run

    algo: universal
    T: 1024
    d: 4
    seed: 0
    family: {kind: sc-quadratic, modulus: 1.0}
    domain: {kind: ball, radius: 1.0}

or a ``runs:`` list whose entries are merged over the file's other top-level
keys. Each run writes its trace CSV and a sibling ``<stem>.summary.csv``.
"""

import copy
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.domains.base import BallDomain, BoxDomain, DomainKind, DomainSpec, HalfspaceDomain, SimplexDomain
from app.domains.factory import random_halfspace_domain, validate_diameter
from app.errors import ConfigError, DegenerateRate, UocoError
from app.harness.families import FamilyKind, ProblemFamily, check_certificates, generate_stream
from app.harness.rates import CHECKPOINT_HORIZONS, RateFit, fit_rate
from app.harness.records import SummaryRow, Trace, summary_path_for, write_summary_csv, write_trace_csv
from app.harness.registry import AlgorithmContext, build_algorithm
from app.settings import UocoSettings, get_settings
from app.universal.runner import run
from app.utils.log import logger


class DomainConfig(BaseModel):
    """
    Feasible domain section of a run config.

    A ``halfspaces`` domain is either random (``n_halfspaces`` rows around
    [-1, 1]^d) or explicit ``normals``/``offsets`` rows with a declared
    ``diameter``, which is checked by sampling projected points.
    """

    model_config = ConfigDict(extra="forbid")

    kind: DomainKind = DomainKind.BALL
    radius: float = Field(default=1.0, gt=0)
    lower: Union[float, List[float]] = -1.0
    upper: Union[float, List[float]] = 1.0
    scale: float = Field(default=1.0, gt=0)
    n_halfspaces: int = Field(default=50, gt=0)
    normals: Optional[List[List[float]]] = None
    offsets: Optional[List[float]] = None
    diameter: Optional[float] = Field(default=None, gt=0)
    diameter_samples: int = Field(default=256, gt=1)
    seed: Optional[int] = None
    projection_tolerance: Optional[float] = Field(default=None, ge=0)
    max_projection_iterations: Optional[int] = Field(default=None, gt=0)

    def build(self, dimension: int, seed: int, settings: UocoSettings) -> DomainSpec:
        """
        Instantiate the domain.

        Raises:
            ConfigError: If the parameters do not describe a valid domain, or
                sampled projections exceed the declared diameter
        """
        tolerance = self.projection_tolerance
        iterations = self.max_projection_iterations or settings.max_projection_iterations
        if self.kind is DomainKind.BALL:
            return BallDomain(dimension=dimension, radius=self.radius, max_projection_iterations=iterations)
        if self.kind is DomainKind.BOX:
            return BoxDomain(
                dimension=dimension,
                lower=np.broadcast_to(np.asarray(self.lower, dtype=float), (dimension,)).copy(),
                upper=np.broadcast_to(np.asarray(self.upper, dtype=float), (dimension,)).copy(),
                max_projection_iterations=iterations,
            )
        if self.kind is DomainKind.SIMPLEX:
            return SimplexDomain(dimension=dimension, scale=self.scale, max_projection_iterations=iterations)
        rng = np.random.default_rng(self.seed if self.seed is not None else seed)
        tolerance = tolerance if tolerance is not None else settings.projection_tolerance
        if self.normals is None and self.offsets is None:
            return random_halfspace_domain(
                dimension,
                self.n_halfspaces,
                rng,
                projection_tolerance=tolerance,
                max_projection_iterations=iterations,
            )
        if self.normals is None or self.offsets is None or self.diameter is None:
            raise ConfigError("Explicit halfspaces need normals, offsets and a diameter")
        try:
            normals = np.asarray(self.normals, dtype=float)
        except ValueError as exc:
            raise ConfigError(f"Halfspace normals must be rows of equal length: {exc}") from exc
        # HalfspaceDomain rejects negative offsets, so the origin is always feasible
        domain = HalfspaceDomain(
            dimension=dimension,
            normals=normals,
            offsets=np.asarray(self.offsets, dtype=float),
            diameter=self.diameter,
            projection_tolerance=tolerance,
            max_projection_iterations=iterations,
        )
        validate_diameter(domain, rng, samples=self.diameter_samples)
        return domain


class FamilyConfig(BaseModel):
    """Loss-stream section of a run config."""

    model_config = ConfigDict(extra="forbid")

    kind: FamilyKind
    modulus: Optional[float] = None
    drift: bool = False
    noise: float = Field(default=0.1, ge=0)
    target: Optional[List[float]] = None

    def to_family(self, dimension: int, horizon: int, seed: int) -> ProblemFamily:
        return ProblemFamily(
            kind=self.kind,
            dimension=dimension,
            horizon=horizon,
            seed=seed,
            modulus=self.modulus,
            drift=self.drift,
            noise=self.noise,
            target=None if self.target is None else np.asarray(self.target, dtype=float),
        )


class RunConfig(BaseModel):
    """One experiment: algorithm, stream family, domain, horizon and seed."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    algo: str = "universal"
    family: FamilyConfig
    domain: DomainConfig = Field(default_factory=DomainConfig)
    horizon: int = Field(alias="T", ge=2)
    dimension: int = Field(alias="d", ge=1)
    seed: int = 0
    out: Optional[str] = None
    ons_projection: Optional[Literal["exact", "paper_formula"]] = None
    record_timing: Optional[bool] = None
    check_certificates: bool = True
    certificate_samples: int = Field(default=1000, gt=0)

    @property
    def stem(self) -> str:
        return (
            f"{self.algo}_{self.family.kind.value}_{self.domain.kind.value}"
            f"_T{self.horizon}_d{self.dimension}_s{self.seed}"
        )

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """
        Copy with CLI-style overrides; None values are ignored.

        Accepts ``family`` and ``domain`` as kind names and ``T``/``d`` as
        aliases of ``horizon``/``dimension``.
        """
        data = self.model_dump()
        aliases = {"T": "horizon", "d": "dimension"}
        for key, value in overrides.items():
            if value is None:
                continue
            key = aliases.get(key, key)
            if key in ("family", "domain") and not isinstance(value, dict):
                data[key]["kind"] = value
            else:
                data[key] = value
        return _validate(data)


def _validate(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration: {exc}") from exc


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_configs(path: Union[str, Path]) -> List[RunConfig]:
    """
    Load one run or a ``runs:`` list from a YAML file.

    Raises:
        ConfigError: If the file is missing, is not valid YAML or fails validation
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"Config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config file {path} is not valid YAML: {exc}") from exc

    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must contain a mapping")
    if "runs" not in raw:
        return [_validate(raw)]

    runs = raw["runs"]
    if not isinstance(runs, list) or not runs:
        raise ConfigError("'runs' must be a non-empty list")
    defaults = {k: v for k, v in raw.items() if k != "runs"}
    return [_validate(_deep_merge(defaults, entry or {})) for entry in runs]


@dataclass
class ExperimentResult:
    config: RunConfig
    trace: Trace
    summary: SummaryRow
    trace_path: Optional[Path] = None
    summary_path: Optional[Path] = None


def trace_growth_exponent(trace: Trace) -> Optional[float]:
    """Growth exponent over the prefixes T/16, T/8, T/4, T/2, T of one trace."""
    if trace.partial or not trace.records:
        return None
    horizons = sorted({trace.horizon >> k for k in range(5) if trace.horizon >> k >= 2})
    try:
        fit = fit_rate(horizons, [trace.regret_at(h) for h in horizons])
    except DegenerateRate:
        return None
    return fit.exponent


def summarize(config: RunConfig, trace: Trace) -> SummaryRow:
    return SummaryRow(
        algo=config.algo,
        family=config.family.kind.value,
        domain=config.domain.kind.value,
        T=config.horizon,
        d=config.dimension,
        seed=config.seed,
        final_regret=trace.final_regret,
        n_experts=trace.n_experts,
        total_projections=trace.total_projections,
        total_wall_ns=trace.total_wall_ns,
        growth_exponent=trace_growth_exponent(trace),
        partial=trace.partial,
    )


def run_experiment(
    config: RunConfig,
    settings: Optional[UocoSettings] = None,
    write: bool = True,
) -> ExperimentResult:
    """
    Build domain, stream and learner from ``config``, run it and write its CSVs.

    Raises:
        ConfigError: Invalid domain, algorithm or parameters
        InfeasibleFamily: Stream parameters or certificates fail on the domain
    """
    settings = settings or get_settings()
    domain = config.domain.build(config.dimension, config.seed, settings)
    stream = generate_stream(config.family.to_family(config.dimension, config.horizon, config.seed), domain)
    if config.check_certificates:
        check_certificates(stream, domain, np.random.default_rng([config.seed, 1]), samples=config.certificate_samples)

    context = AlgorithmContext(
        horizon=config.horizon,
        domain=domain,
        certificates=stream.certificates,
        seed=config.seed,
        ons_projection=config.ons_projection or settings.ons_projection,
    )
    learner = build_algorithm(config.algo, context)
    record_timing = settings.record_timing if config.record_timing is None else config.record_timing
    trace = run(learner, stream, algo=config.algo, record_timing=record_timing)

    result = ExperimentResult(config=config, trace=trace, summary=summarize(config, trace))
    if write:
        trace_path = Path(config.out) if config.out else Path(settings.output_dir) / f"{config.stem}.csv"
        result.trace_path = write_trace_csv(trace, trace_path)
        result.summary_path = write_summary_csv([result.summary], summary_path_for(trace_path))
        logger.info(f"Wrote {result.trace_path} and {result.summary_path}")
    return result


@dataclass
class BatchResult:
    """Picklable outcome of one batch entry."""

    index: int
    summary: Optional[SummaryRow] = None
    trace_path: Optional[Path] = None
    error_type: Optional[str] = None
    error: Optional[str] = None


def _run_entry(index: int, config: RunConfig, write: bool) -> BatchResult:
    try:
        result = run_experiment(config, write=write)
    except UocoError as exc:
        logger.error(f"Run {config.stem} failed: {exc}")
        return BatchResult(index=index, error_type=type(exc).__name__, error=str(exc))
    return BatchResult(
        index=index,
        summary=result.summary,
        trace_path=result.trace_path,
        error_type=result.trace.error_type,
        error=result.trace.error,
    )


def run_batch(configs: Sequence[RunConfig], workers: int = 1, write: bool = True) -> List[BatchResult]:
    """
    Run independent experiments, in worker processes when ``workers > 1``.

    Results come back in input order; a failing entry is reported in its
    BatchResult instead of stopping the batch.
    """
    if workers <= 1 or len(configs) <= 1:
        return [_run_entry(i, c, write) for i, c in enumerate(configs)]

    results: List[BatchResult] = []
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(_run_entry, i, c, write): i for i, c in enumerate(configs)}
        for future in as_completed(futures):
            results.append(future.result())
    return sorted(results, key=lambda r: r.index)


@dataclass(frozen=True)
class RateStudyResult:
    seed: int
    horizons: Tuple[int, ...]
    regrets: Tuple[float, ...]
    fit: Optional[RateFit]


def run_rate_study(
    config: RunConfig,
    horizons: Sequence[int] = CHECKPOINT_HORIZONS,
    seeds: Sequence[int] = (0,),
    workers: int = 1,
) -> List[RateStudyResult]:
    """
    Run ``config`` separately at every checkpoint horizon and fit the growth exponent.

    Each horizon is a fresh run (its own grid and comparator). Nothing is written.
    """
    plan = [(seed, h) for seed in seeds for h in horizons]
    configs = [config.with_overrides(seed=seed, T=h, record_timing=False) for seed, h in plan]
    outcomes = run_batch(configs, workers=workers, write=False)

    results = []
    for seed in seeds:
        regrets = []
        for (s, h), outcome in zip(plan, outcomes):
            if s != seed:
                continue
            if outcome.summary is None or outcome.summary.partial:
                raise ConfigError(f"Rate study run T={h}, seed={seed} failed: {outcome.error}")
            regrets.append(outcome.summary.final_regret)
        try:
            fit = fit_rate(list(horizons), regrets)
        except DegenerateRate as exc:
            logger.warning(f"Rate fit for seed {seed} is degenerate: {exc}")
            fit = None
        results.append(RateStudyResult(seed=seed, horizons=tuple(horizons), regrets=tuple(regrets), fit=fit))
        if fit is not None:
            logger.info(f"Seed {seed}: growth exponent {fit.describe()}, log slope {fit.log_slope:.4g}")
    return results

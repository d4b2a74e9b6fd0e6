"""
Command-line interface.

    uoco run --config configs/example.yaml --T 4096 --algo baseline
    uoco batch --config configs/batch.yaml --workers 4
    uoco rate --config configs/example.yaml --seeds 0 --seeds 1
    uoco grid --T 100

Exit codes: 0 success, 2 configuration error, 3 oracle or projection failure.
"""

from pathlib import Path
from typing import List, NoReturn, Optional

import typer
from rich.console import Console
from rich.table import Table

from app.domains.base import DomainKind
from app.errors import (
    ConfigError,
    DegenerateRate,
    DimensionMismatch,
    InfeasibleFamily,
    RangeViolation,
    UocoError,
)
from app.experts.base import EXPERT_KIND_METADATA
from app.harness.experiment import load_run_configs, run_batch, run_experiment, run_rate_study
from app.harness.families import FamilyKind
from app.harness.rates import CHECKPOINT_HORIZONS, pooled_rate_fit
from app.harness.records import write_summary_csv
from app.settings import get_settings
from app.universal.config import Mode
from app.universal.grid import build_expert_grid
from app.utils.log import set_log_level

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3

CONFIG_ERRORS = (ConfigError, InfeasibleFamily, RangeViolation, DimensionMismatch, DegenerateRate)

cli_app = typer.Typer(
    name="uoco",
    help="Universal online convex optimization with one projection per round.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()


def exit_code_for(error_type: Optional[str]) -> int:
    """Map an error class name to the CLI exit code; unlisted errors count as failures."""
    if error_type is None:
        return EXIT_OK
    if error_type in {cls.__name__ for cls in CONFIG_ERRORS}:
        return EXIT_CONFIG
    return EXIT_FAILURE


def _fail(exc: UocoError) -> NoReturn:
    console.print(f"[red]Error:[/red] {exc}")
    raise typer.Exit(code=exit_code_for(type(exc).__name__))


@cli_app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Overrides UOCO_LOG_LEVEL"),
) -> None:
    set_log_level(log_level or get_settings().log_level)


@cli_app.command()
def run(
    config: Path = typer.Option(..., "--config", help="YAML run configuration"),
    family: Optional[FamilyKind] = typer.Option(None, "--family"),
    domain: Optional[DomainKind] = typer.Option(None, "--domain"),
    T: Optional[int] = typer.Option(None, "--T", help="Horizon"),
    d: Optional[int] = typer.Option(None, "--d", help="Dimension"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    algo: Optional[str] = typer.Option(None, "--algo", help="universal, universal-smooth, baseline, ogd or ons"),
    out: Optional[Path] = typer.Option(None, "--out", help="Trace CSV path"),
) -> None:
    """Run one experiment and write its trace and summary CSVs."""
    try:
        configs = load_run_configs(config)
        if len(configs) != 1:
            raise ConfigError(f"{config} holds {len(configs)} runs; use 'uoco batch'")
        run_config = configs[0].with_overrides(
            family=family.value if family else None,
            domain=domain.value if domain else None,
            T=T,
            d=d,
            seed=seed,
            algo=algo,
            out=str(out) if out else None,
        )
        result = run_experiment(run_config)
    except UocoError as exc:
        _fail(exc)

    summary = result.summary
    console.print(
        f"[bold]{summary.algo}[/bold] on {summary.family}/{summary.domain}: "
        f"regret {summary.final_regret:.6g}, |A|={summary.n_experts}, projections {summary.total_projections}"
    )
    console.print(f"Trace: {result.trace_path}\nSummary: {result.summary_path}")
    if result.trace.partial:
        console.print(f"[red]Run aborted:[/red] {result.trace.error}")
        raise typer.Exit(code=exit_code_for(result.trace.error_type))


@cli_app.command()
def batch(
    config: Path = typer.Option(..., "--config", help="YAML file with a 'runs:' list"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker processes (default UOCO_WORKERS)"),
    summary: Optional[Path] = typer.Option(None, "--summary", help="Aggregated summary CSV path"),
) -> None:
    """Run every entry of a config file and aggregate the summaries."""
    settings = get_settings()
    try:
        configs = load_run_configs(config)
    except UocoError as exc:
        _fail(exc)

    results = run_batch(configs, workers=workers or settings.workers)
    rows = [r.summary for r in results if r.summary is not None]
    summary_path = write_summary_csv(rows, summary or Path(settings.output_dir) / "batch.summary.csv")

    table = Table(title=f"{len(results)} run(s)")
    for column in ("run", "algo", "family", "T", "d", "seed", "regret", "projections", "status"):
        table.add_column(column)
    for result in results:
        cfg = configs[result.index]
        row = result.summary
        status = "ok" if result.error_type is None else f"[red]{result.error_type}[/red]"
        table.add_row(
            str(result.index),
            cfg.algo,
            cfg.family.kind.value,
            str(cfg.horizon),
            str(cfg.dimension),
            str(cfg.seed),
            f"{row.final_regret:.6g}" if row else "-",
            str(row.total_projections) if row else "-",
            status,
        )
    console.print(table)
    console.print(f"Summary: {summary_path}")

    code = max((exit_code_for(r.error_type) for r in results), default=EXIT_OK)
    if code:
        raise typer.Exit(code=code)


@cli_app.command()
def rate(
    config: Path = typer.Option(..., "--config", help="YAML run configuration"),
    seeds: List[int] = typer.Option([0], "--seeds", help="Repeat for several seeds"),
    horizons: Optional[List[int]] = typer.Option(None, "--horizons", help="Checkpoint horizons"),
    workers: Optional[int] = typer.Option(None, "--workers"),
) -> None:
    """Fit the regret growth exponent over checkpoint horizons."""
    settings = get_settings()
    try:
        configs = load_run_configs(config)
        if len(configs) != 1:
            raise ConfigError(f"{config} holds {len(configs)} runs; rate studies take one")
        results = run_rate_study(
            configs[0],
            horizons=horizons or CHECKPOINT_HORIZONS,
            seeds=seeds,
            workers=workers or settings.workers,
        )
    except UocoError as exc:
        _fail(exc)

    table = Table(title=f"{configs[0].algo} on {configs[0].family.kind.value}")
    table.add_column("seed")
    table.add_column("regrets")
    table.add_column("exponent")
    table.add_column("slope vs ln T")
    for result in results:
        table.add_row(
            str(result.seed),
            ", ".join(f"{r:.4g}" for r in result.regrets),
            result.fit.describe() if result.fit else "-",
            f"{result.fit.log_slope:.4g}" if result.fit else "-",
        )
    if len(results) > 1:
        try:
            pooled = pooled_rate_fit(results[0].horizons, [r.regrets for r in results])
        except DegenerateRate:
            pooled = None
        if pooled is not None:
            table.add_row("mean", "-", pooled.describe(), f"{pooled.log_slope:.4g}")
    console.print(table)


@cli_app.command()
def grid(
    T: int = typer.Option(..., "--T", help="Horizon"),
    mode: Mode = typer.Option(Mode.MINIMAX, "--mode"),
    G: float = typer.Option(1.0, "--G"),
    D: float = typer.Option(1.0, "--D"),
) -> None:
    """Print the expert grid for a horizon."""
    try:
        experts = build_expert_grid(T, G, D, mode)
    except UocoError as exc:
        _fail(exc)

    table = Table(title=f"|A| = {len(experts)} (T={T}, {mode.value})")
    table.add_column("#")
    table.add_column("kind")
    table.add_column("algorithm")
    table.add_column("modulus")
    for index, expert in enumerate(experts):
        table.add_row(
            str(index),
            expert.kind.value,
            EXPERT_KIND_METADATA[expert.kind].algorithm,
            "-" if expert.modulus is None else f"{expert.modulus:.6g}",
        )
    console.print(table)


def cli() -> None:
    cli_app()

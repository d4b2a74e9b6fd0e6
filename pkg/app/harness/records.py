"""Per-round records, traces and their CSV files."""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

from app.harness.comparator import ComparatorResult

TRACE_HEADER = ("t", "loss", "cum_loss", "comp_cum_loss", "regret", "proj_count", "delta_sum", "wall_ns")
SUMMARY_HEADER = (
    "algo",
    "family",
    "domain",
    "T",
    "d",
    "seed",
    "final_regret",
    "n_experts",
    "total_projections",
    "total_wall_ns",
    "growth_exponent",
    "partial",
)


@dataclass(frozen=True)
class RoundRecord:
    """
    One row of a trace.

    ``meta_regret`` is the running sum of <s_t, y_t - y_t^i> for the tracked
    expert i (None when no expert is tracked); it is kept in memory only.
    """

    t: int
    loss: float
    cum_loss: float
    comp_cum_loss: float
    regret: float
    proj_count: int
    delta_sum: float
    wall_ns: int
    meta_regret: Optional[float] = None

    def row(self) -> List[str]:
        return [
            str(self.t),
            repr(self.loss),
            repr(self.cum_loss),
            repr(self.comp_cum_loss),
            repr(self.regret),
            str(self.proj_count),
            repr(self.delta_sum),
            str(self.wall_ns),
        ]


@dataclass(frozen=True)
class AuditRow:
    """
    Per-round terms of the regret decomposition for the tracked expert.

    The decomposition claims lhs <= meta + expert_regret - quadratic - delta;
    ``residual`` is lhs minus the right-hand side.
    """

    t: int
    lhs: float
    meta: float
    expert_regret: float
    quadratic: float
    delta: float

    @property
    def residual(self) -> float:
        return self.lhs - (self.meta + self.expert_regret - self.quadratic - self.delta)


@dataclass
class Trace:
    """Full record of one run; ``partial`` marks a run aborted by an error."""

    algo: str
    horizon: int
    dimension: int
    n_experts: int
    records: List[RoundRecord] = field(default_factory=list)
    comparator: Optional[ComparatorResult] = None
    audit: List[AuditRow] = field(default_factory=list)
    tracked_expert: Optional[str] = None
    counted_projections: int = 0
    partial: bool = False
    error: Optional[str] = None
    error_type: Optional[str] = None

    @property
    def rounds(self) -> int:
        return len(self.records)

    @property
    def final_regret(self) -> float:
        return self.records[-1].regret if self.records else 0.0

    @property
    def total_projections(self) -> int:
        return self.records[-1].proj_count if self.records else 0

    @property
    def total_wall_ns(self) -> int:
        return sum(r.wall_ns for r in self.records)

    def regret_at(self, t: int) -> float:
        return self.records[t - 1].regret


@dataclass(frozen=True)
class SummaryRow:
    algo: str
    family: str
    domain: str
    T: int
    d: int
    seed: int
    final_regret: float
    n_experts: int
    total_projections: int
    total_wall_ns: int
    growth_exponent: Optional[float]
    partial: bool

    def row(self) -> List[str]:
        exponent = "" if self.growth_exponent is None else repr(self.growth_exponent)
        return [
            self.algo,
            self.family,
            self.domain,
            str(self.T),
            str(self.d),
            str(self.seed),
            repr(self.final_regret),
            str(self.n_experts),
            str(self.total_projections),
            str(self.total_wall_ns),
            exponent,
            str(self.partial).lower(),
        ]


PathLike = Union[str, Path]


def write_trace_csv(trace: Trace, path: PathLike) -> Path:
    """Write one row per round under the fixed trace header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for record in trace.records:
            writer.writerow(record.row())
    return path


def summary_path_for(trace_path: PathLike) -> Path:
    """``runs/x.csv`` -> ``runs/x.summary.csv``."""
    trace_path = Path(trace_path)
    return trace_path.with_name(f"{trace_path.stem}.summary.csv")


def write_summary_csv(rows: Sequence[SummaryRow], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow(row.row())
    return path


def read_trace_csv(path: PathLike) -> List[dict]:
    """Read a trace back as a list of dicts keyed by the header."""
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))

"""
Benchmark harness: synthetic streams, comparator oracle, traces and rate fits.

The algorithm registry and experiment runner live in
``app.harness.registry`` and ``app.harness.experiment``; they depend on
``app.universal`` and are imported from there directly.
"""

from .comparator import ComparatorResult, comparator_loss
from .families import (
    FamilyKind,
    LossStream,
    ProblemFamily,
    StreamCertificates,
    check_certificates,
    generate_stream,
    sample_feasible,
)
from .rates import CHECKPOINT_HORIZONS, REGRET_NOISE_FLOOR, RateFit, fit_rate, pooled_rate_fit
from .records import (
    SUMMARY_HEADER,
    TRACE_HEADER,
    AuditRow,
    RoundRecord,
    SummaryRow,
    Trace,
    read_trace_csv,
    summary_path_for,
    write_summary_csv,
    write_trace_csv,
)

__all__ = [
    "CHECKPOINT_HORIZONS",
    "REGRET_NOISE_FLOOR",
    "SUMMARY_HEADER",
    "TRACE_HEADER",
    "AuditRow",
    "ComparatorResult",
    "FamilyKind",
    "LossStream",
    "ProblemFamily",
    "RateFit",
    "RoundRecord",
    "StreamCertificates",
    "SummaryRow",
    "Trace",
    "check_certificates",
    "comparator_loss",
    "fit_rate",
    "generate_stream",
    "pooled_rate_fit",
    "read_trace_csv",
    "sample_feasible",
    "summary_path_for",
    "write_summary_csv",
    "write_trace_csv",
]

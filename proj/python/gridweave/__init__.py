"""Discrete-event simulator for distributed computing grids.

Thin Python facade over the compiled core: platform loading, workload
generation and parsing, simulation runs, telemetry metrics, and per-site
parameter calibration.
"""

from ._core import (
    CalibrationMode,
    CalibrationObjective,
    CalibrationParameter,
    CalibrationProblem,
    CalibrationResult,
    EventRecord,
    Job,
    JobOutcome,
    JobState,
    PlatformSpec,
    SimulationOptions,
    SimulationResult,
    SiteSpec,
    SiteStats,
    SiteSummary,
    SnapshotMode,
    SnapshotRow,
    SummaryMetrics,
    WorkloadGenSpec,
    __version__,
    cma_es_calibrate,
    compute_summary,
    evaluate,
    event_log_to_csv,
    event_log_to_jsonl,
    generate_workload,
    geomean,
    grid_search,
    load_platform,
    parse_event_log_csv,
    parse_event_log_jsonl,
    parse_trace,
    parse_trace_text,
    per_class_rel_mae,
    random_search,
    rel_mae,
    run_simulation,
    summary_to_csv,
    synthesize_truth,
    target_sites,
    trace_to_text,
    utilization_series,
    write_trace,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

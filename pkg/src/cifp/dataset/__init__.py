"""Dataset acquisition, persistence, filtering, and telemetry summaries.

Network-facing pieces (the probe and sampling ops) live in
cifp.dataset.github and cifp.dataset.sampling; import them explicitly so the
core record/archive layer stays dependency-light.
"""

from cifp.dataset.archive import DATASET_SCHEMA, load_dataset, store_dataset
from cifp.dataset.records import (
    CONCLUSION_CANCELLED,
    CONCLUSION_FAILURE,
    CONCLUSION_SKIPPED,
    CONCLUSION_SUCCESS,
    MAX_JOB_DURATION_S,
    TRIGGER_PULL_REQUEST,
    TRIGGER_PUSH,
    TRIGGER_SCHEDULE,
    TRIGGER_WORKFLOW_DISPATCH,
    Dataset,
    RepositoryRecord,
    SampleSummary,
    WorkflowJob,
    WorkflowRun,
    filter_jobs,
)
from cifp.dataset.telemetry import (
    TELEMETRY_SCHEMA,
    TelemetrySample,
    TelemetryTrace,
    load_traces,
    store_traces,
    summarize_telemetry,
)

__all__ = [
    "CONCLUSION_CANCELLED",
    "CONCLUSION_FAILURE",
    "CONCLUSION_SKIPPED",
    "CONCLUSION_SUCCESS",
    "DATASET_SCHEMA",
    "Dataset",
    "MAX_JOB_DURATION_S",
    "RepositoryRecord",
    "SampleSummary",
    "TELEMETRY_SCHEMA",
    "TRIGGER_PULL_REQUEST",
    "TRIGGER_PUSH",
    "TRIGGER_SCHEDULE",
    "TRIGGER_WORKFLOW_DISPATCH",
    "TelemetrySample",
    "TelemetryTrace",
    "WorkflowJob",
    "WorkflowRun",
    "filter_jobs",
    "load_dataset",
    "load_traces",
    "store_dataset",
    "store_traces",
    "summarize_telemetry",
]

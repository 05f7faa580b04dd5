"""Telemetry traces from instrumented job replicas and their summary.

Trace files share the archive framing: one JSON object per line after a
schema header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

from cifp.energy import BASELINE, UsageMetrics
from cifp.errors import ArchiveError, EmptyDataError

TELEMETRY_SCHEMA = "cifp.telemetry.v1"

# Samples must arrive on a (near) fixed cadence for the plain sample mean to
# equal the time-weighted mean; tolerate this much drift between intervals.
MAX_INTERVAL_DEVIATION = 0.10


@dataclass(frozen=True)
class TelemetrySample:
    offset_seconds: float
    cpu_load_fraction: float
    memory_gb: float

    def __post_init__(self):
        if self.offset_seconds < 0:
            raise ValueError("offset_seconds must be >= 0")
        if not 0 <= self.cpu_load_fraction <= 1:
            raise ValueError("cpu_load_fraction must be within [0, 1]")
        if self.memory_gb < 0:
            raise ValueError("memory_gb must be >= 0")


@dataclass(frozen=True)
class TelemetryTrace:
    """Resource samples collected while re-running one job."""

    job_ref: str
    samples: tuple[TelemetrySample, ...]
    network_total_gb: float

    def __post_init__(self):
        if self.network_total_gb < 0:
            raise ValueError("network_total_gb must be >= 0")
        offsets = [sample.offset_seconds for sample in self.samples]
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("sample offsets must be strictly increasing")

    @classmethod
    def from_rows(
        cls, job_ref: str, rows: Iterable[tuple[float, float, float]], network_total_gb: float
    ) -> "TelemetryTrace":
        samples = tuple(TelemetrySample(*row) for row in rows)
        return cls(job_ref=job_ref, samples=samples, network_total_gb=network_total_gb)


def _check_fixed_intervals(trace: TelemetryTrace) -> None:
    offsets = [sample.offset_seconds for sample in trace.samples]
    deltas = [b - a for a, b in zip(offsets, offsets[1:])]
    if len(deltas) < 2:
        return
    mean_delta = sum(deltas) / len(deltas)
    worst = max(abs(delta - mean_delta) for delta in deltas)
    if worst > MAX_INTERVAL_DEVIATION * mean_delta:
        raise ValueError(
            f"trace {trace.job_ref!r}: sampling intervals vary by more than "
            f"{MAX_INTERVAL_DEVIATION:.0%}; the sample mean would not be time-weighted"
        )


def summarize_telemetry(traces: Sequence[TelemetryTrace], vcpu_count: int) -> UsageMetrics:
    """Fleet usage averages: sample-mean CPU load scaled to vCPUs, sample-mean
    memory, and per-trace mean network transfer."""
    if not traces or all(not trace.samples for trace in traces):
        raise EmptyDataError("cannot summarize an empty set of telemetry traces")
    load_sum = 0.0
    memory_sum = 0.0
    sample_count = 0
    network_sum = 0.0
    for trace in traces:
        _check_fixed_intervals(trace)
        for sample in trace.samples:
            load_sum += sample.cpu_load_fraction
            memory_sum += sample.memory_gb
            sample_count += 1
        network_sum += trace.network_total_gb
    if sample_count == 0:
        raise EmptyDataError("traces contain no samples")
    return UsageMetrics(
        avg_vcpus=load_sum / sample_count * vcpu_count,
        avg_memory_gb=memory_sum / sample_count,
        network_gb_per_job=network_sum / len(traces),
        setting=BASELINE,
    )


def store_traces(traces: Sequence[TelemetryTrace], target: str | Path | IO[str]) -> None:
    if hasattr(target, "write"):
        _write_traces(traces, target)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        _write_traces(traces, fh)


def _write_traces(traces: Sequence[TelemetryTrace], fh: IO[str]) -> None:
    fh.write(f"#schema={TELEMETRY_SCHEMA}\n")
    for trace in traces:
        payload = {
            "job_ref": trace.job_ref,
            "network_total_gb": trace.network_total_gb,
            "samples": [
                [sample.offset_seconds, sample.cpu_load_fraction, sample.memory_gb]
                for sample in trace.samples
            ],
        }
        fh.write(json.dumps(payload, sort_keys=True) + "\n")


def load_traces(source: str | Path | IO[str]) -> list[TelemetryTrace]:
    if hasattr(source, "read"):
        return _read_traces(source)
    with open(source, encoding="utf-8") as fh:
        return _read_traces(fh)


def _read_traces(fh: IO[str]) -> list[TelemetryTrace]:
    lines = iter(enumerate(fh, start=1))
    try:
        _, header = next(lines)
    except StopIteration:
        raise ArchiveError("empty telemetry file", 1) from None
    if header.strip() != f"#schema={TELEMETRY_SCHEMA}":
        raise ArchiveError(f"expected '#schema={TELEMETRY_SCHEMA}' header", 1)
    traces = []
    for line_no, line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ArchiveError(f"invalid JSON: {exc.msg}", line_no) from exc
        try:
            traces.append(
                TelemetryTrace.from_rows(
                    job_ref=payload["job_ref"],
                    rows=[tuple(sample) for sample in payload["samples"]],
                    network_total_gb=payload["network_total_gb"],
                )
            )
        except KeyError as exc:
            raise ArchiveError("missing field", line_no, field=str(exc)) from exc
        except (TypeError, ValueError) as exc:
            raise ArchiveError(str(exc), line_no) from exc
    return traces

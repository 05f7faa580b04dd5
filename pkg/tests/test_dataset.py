"""Records, filtering, archives, and telemetry summaries."""

import io
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hour, make_job, make_run
from cifp.dataset.archive import load_dataset, store_dataset
from cifp.dataset.records import (
    MAX_JOB_DURATION_S,
    TRIGGER_PUSH,
    TRIGGER_SCHEDULE,
    Dataset,
    RepositoryRecord,
    SampleSummary,
    WorkflowJob,
    WorkflowRun,
    filter_jobs,
)
from cifp.dataset.telemetry import (
    TelemetryTrace,
    load_traces,
    store_traces,
    summarize_telemetry,
)
from cifp.errors import ArchiveError, EmptyDataError

UTC = timezone.utc


class TestRecords:
    def test_repo_invariants(self):
        with pytest.raises(ValueError):
            RepositoryRecord(0, "o/r", False, False, None, hour(1, 0), False)
        with pytest.raises(ValueError):
            RepositoryRecord(1, "o/r", False, False, hour(2, 0), hour(1, 0), False)

    def test_naive_timestamps_coerced_to_utc(self):
        job = WorkflowJob(1, 1, datetime(2024, 3, 1, 10), datetime(2024, 3, 1, 11))
        assert job.started_at.tzinfo == UTC
        assert job.duration_seconds() == 3600

    def test_duplicate_run_id_rejected(self):
        runs = [make_run(1, 1, TRIGGER_PUSH, hour(1, 0)), make_run(1, 2, TRIGGER_PUSH, hour(1, 1))]
        with pytest.raises(ValueError):
            Dataset.build([], runs, [])

    def test_sample_summary_ordering(self):
        with pytest.raises(ValueError):
            SampleSummary(total_drawn=5, public_active=6, using_actions=1, draw_seed=0)
        SampleSummary(total_drawn=6, public_active=5, using_actions=1, draw_seed=0)


class TestFilterJobs:
    def test_negative_duration_removed(self):
        start = hour(1, 10)
        job = WorkflowJob(1, 1, start, start - timedelta(seconds=1))
        assert filter_jobs([job]) == []

    def test_exactly_seven_hours_kept(self):
        start = hour(1, 1)
        job = WorkflowJob(1, 1, start, start + timedelta(hours=7))
        assert filter_jobs([job]) == [job]
        over = WorkflowJob(2, 1, start, start + timedelta(hours=7, seconds=1))
        assert filter_jobs([over]) == []

    def test_mixed_batch_of_five(self):
        start = hour(1, 10)
        jobs = [
            WorkflowJob(1, 1, start, None),
            WorkflowJob(2, 1, start, start - timedelta(seconds=5)),
            WorkflowJob(3, 1, start, start + timedelta(hours=8)),
            WorkflowJob(4, 1, start, start + timedelta(minutes=12)),
            WorkflowJob(5, 1, start, start + timedelta(hours=2)),
        ]
        kept = filter_jobs(jobs)
        assert [j.job_id for j in kept] == [4, 5]

    def test_zero_duration_kept(self):
        start = hour(1, 10)
        job = WorkflowJob(1, 1, start, start)
        assert filter_jobs([job]) == [job]

    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=1, max_value=10_000),
                st.one_of(st.none(), st.integers(min_value=-3600, max_value=9 * 3600)),
            ),
            max_size=40,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_idempotent_and_never_grows(self, raw):
        start = hour(1, 0)
        jobs = [
            WorkflowJob(i + 1, 1, start, None if dur is None else start + timedelta(seconds=dur))
            for i, (_seed, dur) in enumerate(raw)
        ]
        once = filter_jobs(jobs)
        assert len(once) <= len(jobs)
        assert filter_jobs(once) == once
        assert all(0 <= j.duration_seconds() <= MAX_JOB_DURATION_S for j in once)


def _sample_dataset() -> Dataset:
    repos = [
        RepositoryRecord(1, "o/a", False, False, hour(1, 0), hour(20, 0), True),
        RepositoryRecord(2, "o/b", True, True, None, hour(20, 0), False),
    ]
    runs = [
        make_run(10, 1, TRIGGER_PUSH, hour(1, 9)),
        make_run(11, 1, TRIGGER_SCHEDULE, hour(2, 3)),
    ]
    jobs = [
        make_job(100, 10, hour(1, 9, 5), 42),
        WorkflowJob(101, 11, hour(2, 3), None, runner_label="ubuntu-latest", conclusion="failure"),
        WorkflowJob(102, 11, hour(2, 3), hour(2, 4), is_self_hosted=True),
    ]
    return Dataset.build(repos, runs, jobs, unretrievable_repo_ids=[7])


class TestArchive:
    def test_round_trip_identity(self):
        dataset = _sample_dataset()
        buffer = io.StringIO()
        store_dataset(dataset, buffer)
        loaded = load_dataset(io.StringIO(buffer.getvalue()))
        assert loaded.repositories == dataset.repositories
        assert loaded.runs == dataset.runs
        assert loaded.jobs == dataset.jobs
        assert loaded.unretrievable_repo_ids == dataset.unretrievable_repo_ids

    def test_empty_round_trip(self):
        buffer = io.StringIO()
        store_dataset(Dataset.build(), buffer)
        loaded = load_dataset(io.StringIO(buffer.getvalue()))
        assert loaded.repositories == ()
        assert loaded.runs == ()
        assert loaded.jobs == ()

    def test_truncated_final_line_names_line(self):
        buffer = io.StringIO()
        store_dataset(_sample_dataset(), buffer)
        text = buffer.getvalue().rstrip("\n")
        with pytest.raises(ArchiveError) as excinfo:
            load_dataset(io.StringIO(text[:-8]))
        assert excinfo.value.line_no == text.count("\n") + 1

    def test_missing_field_names_field(self):
        text = '#schema=cifp.dataset.v1\n{"kind":"run","run_id":1}\n'
        with pytest.raises(ArchiveError) as excinfo:
            load_dataset(io.StringIO(text))
        assert excinfo.value.field == "repo_id"
        assert excinfo.value.line_no == 2

    def test_wrong_header_rejected(self):
        with pytest.raises(ArchiveError):
            load_dataset(io.StringIO("#schema=something.else\n"))

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "dataset.jsonl"
        store_dataset(_sample_dataset(), path)
        assert load_dataset(path).jobs == _sample_dataset().jobs

    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=1, max_value=10**9),
                st.booleans(),
                st.booleans(),
                st.integers(min_value=0, max_value=10**6),
                st.booleans(),
            ),
            max_size=20,
            unique_by=lambda t: t[0],
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_round_trip_property(self, raw):
        collected = hour(20, 0)
        repos = [
            RepositoryRecord(
                repo_id,
                f"owner/repo{repo_id}",
                fork,
                archived,
                collected - timedelta(seconds=push_age),
                collected,
                uses,
            )
            for repo_id, fork, archived, push_age, uses in raw
        ]
        dataset = Dataset.build(repos)
        buffer = io.StringIO()
        store_dataset(dataset, buffer)
        assert load_dataset(io.StringIO(buffer.getvalue())).repositories == dataset.repositories


class TestTelemetry:
    def test_trace_validation(self):
        with pytest.raises(ValueError):
            TelemetryTrace.from_rows("x", [(0, 1.5, 0.0)], 0.0)  # load > 1
        with pytest.raises(ValueError):
            TelemetryTrace.from_rows("x", [(10, 0.5, 1.0), (5, 0.5, 1.0)], 0.0)
        with pytest.raises(ValueError):
            TelemetryTrace.from_rows("x", [(0, 0.5, -1.0)], 0.0)

    def test_hand_averaged_pair(self):
        trace_a = TelemetryTrace.from_rows("a", [(0, 0.25, 1.0), (30, 0.75, 3.0)], 0.4)
        trace_b = TelemetryTrace.from_rows("b", [(0, 0.5, 2.0)], 0.2)
        metrics = summarize_telemetry([trace_a, trace_b], vcpu_count=4)
        assert metrics.avg_vcpus == pytest.approx(2.0)
        assert metrics.avg_memory_gb == pytest.approx(2.0)
        assert metrics.network_gb_per_job == pytest.approx(0.3)

    def test_single_zero_sample(self):
        trace = TelemetryTrace.from_rows("a", [(0, 0.0, 0.0)], 0.0)
        metrics = summarize_telemetry([trace], vcpu_count=4)
        assert (metrics.avg_vcpus, metrics.avg_memory_gb, metrics.network_gb_per_job) == (0, 0, 0)

    def test_empty_errors(self):
        with pytest.raises(EmptyDataError):
            summarize_telemetry([], vcpu_count=4)
        empty_trace = TelemetryTrace.from_rows("a", [], 1.0)
        with pytest.raises(EmptyDataError):
            summarize_telemetry([empty_trace], vcpu_count=4)

    def test_irregular_intervals_rejected(self):
        trace = TelemetryTrace.from_rows("a", [(0, 0.5, 1.0), (30, 0.5, 1.0), (200, 0.5, 1.0)], 0.0)
        with pytest.raises(ValueError):
            summarize_telemetry([trace], vcpu_count=4)

    def test_mild_jitter_tolerated(self):
        trace = TelemetryTrace.from_rows(
            "a", [(0, 0.5, 1.0), (30, 0.5, 1.0), (61, 0.5, 1.0), (91, 0.5, 1.0)], 0.0
        )
        summarize_telemetry([trace], vcpu_count=4)

    @given(
        st.lists(
            st.lists(
                st.tuples(
                    st.floats(min_value=0.0, max_value=1.0),
                    st.floats(min_value=0.0, max_value=64.0),
                ),
                min_size=1,
                max_size=10,
            ),
            min_size=1,
            max_size=5,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_summary_bounds(self, payload):
        traces = [
            TelemetryTrace.from_rows(
                f"t{i}",
                [(j * 30.0, load, mem) for j, (load, mem) in enumerate(samples)],
                0.1,
            )
            for i, samples in enumerate(payload)
        ]
        metrics = summarize_telemetry(traces, vcpu_count=4)
        assert 0.0 <= metrics.avg_vcpus <= 4.0
        assert metrics.avg_memory_gb >= 0.0

    def test_trace_file_round_trip(self, tmp_path):
        traces = [
            TelemetryTrace.from_rows("job-1", [(0, 0.25, 1.0), (30, 0.75, 3.0)], 0.4),
            TelemetryTrace.from_rows("job-2", [(0, 0.5, 2.0)], 0.2),
        ]
        path = tmp_path / "traces.jsonl"
        store_traces(traces, path)
        assert load_traces(path) == traces

    def test_trace_file_bad_line(self):
        text = '#schema=cifp.telemetry.v1\n{"job_ref": "x"}\n'
        with pytest.raises(ArchiveError) as excinfo:
            load_traces(io.StringIO(text))
        assert excinfo.value.line_no == 2

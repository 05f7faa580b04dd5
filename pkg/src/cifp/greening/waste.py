"""Waste accounting: scheduled time, inactive repositories, forks."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from cifp.dataset.records import Dataset
from cifp.errors import EmptyDataError

DEFAULT_INACTIVITY_DAYS = 30


def scheduled_share(dataset: Dataset) -> float:
    """Fraction of total filtered job time attributed to scheduled runs.

    Jobs whose run cannot be resolved count as non-scheduled time.
    """
    total = 0.0
    scheduled = 0.0
    for job in dataset.filtered_jobs():
        duration = job.duration_seconds()
        total += duration
        run = dataset.runs_by_id.get(job.run_id)
        if run is not None and run.is_scheduled:
            scheduled += duration
    if total == 0:
        raise EmptyDataError("scheduled share is undefined: total execution time is zero")
    return scheduled / total


@dataclass(frozen=True)
class InactivityReport:
    """Scheduled time sunk into repositories that look abandoned."""

    scheduled_time_fraction: float
    flagged_repo_ids: tuple[int, ...]
    unknown_repo_ids: tuple[int, ...]


def detect_inactive_scheduled_waste(
    dataset: Dataset,
    collection_date: datetime,
    inactivity_days: int = DEFAULT_INACTIVITY_DAYS,
) -> InactivityReport:
    """Flag repositories where some job ran more than inactivity_days after
    the last push (and no push followed before collection), and report the
    share of scheduled execution time they account for.

    last_push_at reflects collection time, so a single comparison covers
    both conditions. Repositories without a known last push go into the
    unknown bucket and are never flagged.
    """
    window = timedelta(days=inactivity_days)
    flagged: set[int] = set()
    unknown: set[int] = set()
    scheduled_total = 0.0
    scheduled_flagged = 0.0

    jobs_by_repo = dataset.jobs_by_repo()
    for repo_id, jobs in jobs_by_repo.items():
        repo = dataset.repos_by_id.get(repo_id)
        if repo is None or repo.last_push_at is None:
            unknown.add(repo_id)
            continue
        for job in jobs:
            if job.started_at > repo.last_push_at + window and job.started_at <= collection_date:
                flagged.add(repo_id)
                break

    for repo_id, jobs in jobs_by_repo.items():
        for job in jobs:
            run = dataset.runs_by_id.get(job.run_id)
            if run is None or not run.is_scheduled:
                continue
            duration = job.duration_seconds()
            scheduled_total += duration
            if repo_id in flagged:
                scheduled_flagged += duration

    fraction = scheduled_flagged / scheduled_total if scheduled_total > 0 else 0.0
    return InactivityReport(
        scheduled_time_fraction=fraction,
        flagged_repo_ids=tuple(sorted(flagged)),
        unknown_repo_ids=tuple(sorted(unknown)),
    )


@dataclass(frozen=True)
class ForkShare:
    """How much execution time runs on forks, and how scheduled it is."""

    fork_time_fraction: float
    scheduled_fraction_within_forks: float | None


def fork_share(dataset: Dataset) -> ForkShare:
    """Fraction of total job time spent in forks, plus the scheduled share
    inside that fork time (None when there is no fork time at all)."""
    total = 0.0
    fork_time = 0.0
    fork_scheduled = 0.0
    for job in dataset.filtered_jobs():
        duration = job.duration_seconds()
        total += duration
        run = dataset.runs_by_id.get(job.run_id)
        repo = dataset.repo_for_run(run) if run is not None else None
        if repo is None or not repo.is_fork:
            continue
        fork_time += duration
        if run.is_scheduled:
            fork_scheduled += duration
    if total == 0:
        return ForkShare(0.0, None)
    return ForkShare(
        fork_time_fraction=fork_time / total,
        scheduled_fraction_within_forks=fork_scheduled / fork_time if fork_time > 0 else None,
    )

"""Domain records for repositories, workflow runs, and jobs.

Records are immutable after construction and safe to share across threads.
All timestamps are timezone-aware UTC.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

# Trigger events we classify specially; anything else is carried verbatim.
TRIGGER_PUSH = "push"
TRIGGER_PULL_REQUEST = "pull_request"
TRIGGER_SCHEDULE = "schedule"
TRIGGER_WORKFLOW_DISPATCH = "workflow_dispatch"

CONCLUSION_SUCCESS = "success"
CONCLUSION_FAILURE = "failure"
CONCLUSION_SKIPPED = "skipped"
CONCLUSION_CANCELLED = "cancelled"

# Jobs longer than this are treated as artifacts of delayed completion
# reporting (provider enforces a 6h limit; the 7th hour is buffer).
MAX_JOB_DURATION_S = 7 * 3600


def _as_utc(instant: datetime | None) -> datetime | None:
    if instant is None:
        return None
    if instant.tzinfo is None:
        return instant.replace(tzinfo=timezone.utc)
    return instant.astimezone(timezone.utc)


@dataclass(frozen=True)
class RepositoryRecord:
    """One repository as observed at collection time."""

    repo_id: int
    full_name: str
    is_fork: bool
    is_archived: bool
    last_push_at: datetime | None
    collected_at: datetime
    uses_actions_in_year: bool

    def __post_init__(self):
        if self.repo_id <= 0:
            raise ValueError("repo_id must be positive")
        object.__setattr__(self, "last_push_at", _as_utc(self.last_push_at))
        object.__setattr__(self, "collected_at", _as_utc(self.collected_at))
        if self.last_push_at is not None and self.last_push_at > self.collected_at:
            raise ValueError("last_push_at cannot be after collected_at")


@dataclass(frozen=True)
class WorkflowRun:
    """One workflow run; the trigger decides whether it was scheduled."""

    run_id: int
    repo_id: int
    trigger_event: str
    created_at: datetime
    workflow_path: str | None = None

    def __post_init__(self):
        if self.run_id <= 0 or self.repo_id <= 0:
            raise ValueError("run_id and repo_id must be positive")
        object.__setattr__(self, "created_at", _as_utc(self.created_at))

    @property
    def is_scheduled(self) -> bool:
        return self.trigger_event == TRIGGER_SCHEDULE


@dataclass(frozen=True)
class WorkflowJob:
    """One job execution on a runner."""

    job_id: int
    run_id: int
    started_at: datetime
    completed_at: datetime | None
    runner_label: str = ""
    is_self_hosted: bool = False
    conclusion: str = CONCLUSION_SUCCESS

    def __post_init__(self):
        if self.job_id <= 0 or self.run_id <= 0:
            raise ValueError("job_id and run_id must be positive")
        object.__setattr__(self, "started_at", _as_utc(self.started_at))
        object.__setattr__(self, "completed_at", _as_utc(self.completed_at))

    def duration_seconds(self) -> int | None:
        """Whole-second duration, or None when the job never completed."""
        if self.completed_at is None:
            return None
        return int((self.completed_at - self.started_at).total_seconds())


@dataclass(frozen=True)
class SampleSummary:
    """Counters from one random-sampling pass over the repository space."""

    total_drawn: int
    public_active: int
    using_actions: int
    draw_seed: int

    def __post_init__(self):
        if not 0 <= self.using_actions <= self.public_active <= self.total_drawn:
            raise ValueError("need using_actions <= public_active <= total_drawn")


def filter_jobs(jobs: Sequence[WorkflowJob]) -> list[WorkflowJob]:
    """Drop jobs with no completion, negative duration, or duration above
    the 7-hour bound (inclusive bound: exactly 7h is kept). Order-preserving
    and idempotent."""
    kept = []
    for job in jobs:
        duration = job.duration_seconds()
        if duration is None or duration < 0 or duration > MAX_JOB_DURATION_S:
            continue
        kept.append(job)
    return kept


@dataclass(frozen=True)
class Dataset:
    """A joined collection of repositories, runs, and jobs with index maps.

    unretrievable_repo_ids lists sampled repositories whose run data could
    not be fetched (e.g. access forbidden); they are excluded from sample
    means, unlike repositories that simply had zero runs.
    """

    repositories: tuple[RepositoryRecord, ...]
    runs: tuple[WorkflowRun, ...]
    jobs: tuple[WorkflowJob, ...]
    unretrievable_repo_ids: tuple[int, ...] = ()
    repos_by_id: dict[int, RepositoryRecord] = field(init=False, repr=False, compare=False)
    runs_by_id: dict[int, WorkflowRun] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        repos = {repo.repo_id: repo for repo in self.repositories}
        runs = {}
        for run in self.runs:
            if run.run_id in runs:
                raise ValueError(f"duplicate run_id {run.run_id}")
            runs[run.run_id] = run
        object.__setattr__(self, "repos_by_id", repos)
        object.__setattr__(self, "runs_by_id", runs)

    @classmethod
    def build(
        cls,
        repositories: Iterable[RepositoryRecord] = (),
        runs: Iterable[WorkflowRun] = (),
        jobs: Iterable[WorkflowJob] = (),
        unretrievable_repo_ids: Iterable[int] = (),
    ) -> "Dataset":
        return cls(tuple(repositories), tuple(runs), tuple(jobs), tuple(unretrievable_repo_ids))

    def sample_basis_repo_ids(self) -> list[int]:
        """Repositories that count in the sample mean: qualified by actions
        usage and successfully fetched (zero runs still counts as zero)."""
        excluded = set(self.unretrievable_repo_ids)
        return [
            repo.repo_id
            for repo in self.repositories
            if repo.uses_actions_in_year and repo.repo_id not in excluded
        ]

    def run_for(self, job: WorkflowJob) -> WorkflowRun:
        run = self.runs_by_id.get(job.run_id)
        if run is None:
            raise KeyError(f"job {job.job_id} references unknown run {job.run_id}")
        return run

    def repo_for_run(self, run: WorkflowRun) -> RepositoryRecord | None:
        return self.repos_by_id.get(run.repo_id)

    def filtered_jobs(self) -> list[WorkflowJob]:
        return filter_jobs(self.jobs)

    def jobs_by_repo(self) -> dict[int, list[WorkflowJob]]:
        """Filtered jobs grouped by repository id, in input order."""
        grouped: dict[int, list[WorkflowJob]] = {}
        for job in self.filtered_jobs():
            run = self.runs_by_id.get(job.run_id)
            if run is None:
                continue
            grouped.setdefault(run.repo_id, []).append(job)
        return grouped

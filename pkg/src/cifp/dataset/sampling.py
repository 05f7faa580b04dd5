"""Random repository sampling and workflow-run acquisition."""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from typing import Sequence

from cifp.dataset.github import ForbiddenError, RepositoryProbe, RetryPolicy, utc_now
from cifp.dataset.records import RepositoryRecord, SampleSummary, WorkflowJob, WorkflowRun
from cifp.errors import AcquisitionError

log = logging.getLogger(__name__)


def resolve_population_size(probe: RepositoryProbe) -> int:
    """Total repository count, taken as the newest repository's numeric id
    (ids are allocated incrementally across public and private repos)."""
    try:
        population = probe.latest_repository_id()
    except AcquisitionError:
        raise
    except Exception as exc:
        raise AcquisitionError(f"population probe failed: {exc}") from exc
    if population <= 0:
        raise AcquisitionError(f"probe returned non-positive population size {population}")
    return population


@dataclass
class SampleResult:
    summary: SampleSummary
    records: list[RepositoryRecord] = field(default_factory=list)


def sample_repositories(
    population_size: int,
    target_using_actions: int,
    seed: int,
    probe: RepositoryProbe,
    year: int,
    collected_at: datetime | None = None,
    retry: RetryPolicy | None = None,
    max_draws: int | None = None,
) -> SampleResult:
    """Draw ids uniformly without replacement (duplicates are redrawn) until
    the target number of public, non-archived repositories with at least one
    run created in the year is reached.

    Every public repository encountered is recorded (with classification
    flags), so population proportions can be recomputed from the archive.
    """
    if population_size <= 0:
        raise ValueError("population_size must be positive")
    if target_using_actions < 0:
        raise ValueError("target_using_actions must be >= 0")
    rng = random.Random(seed)
    retry = retry or RetryPolicy()
    collected_at = collected_at or utc_now()
    if max_draws is None:
        max_draws = population_size
    seen: set[int] = set()
    records: list[RepositoryRecord] = []
    total_drawn = 0
    public_active = 0
    using_actions = 0
    while using_actions < target_using_actions:
        if total_drawn >= max_draws or len(seen) >= population_size:
            summary = SampleSummary(total_drawn, public_active, using_actions, seed)
            raise AcquisitionError(
                f"exhausted draw budget after {total_drawn} draws with only "
                f"{using_actions}/{target_using_actions} qualifying repositories "
                f"(partial summary: {summary})"
            )
        repo_id = rng.randint(1, population_size)
        if repo_id in seen:
            continue
        seen.add(repo_id)
        total_drawn += 1
        try:
            info = retry.run(lambda rid=repo_id: probe.lookup_repository(rid))
        except ForbiddenError:
            info = None  # blocked repos count like private/deleted ones
        if info is None:
            continue  # private or deleted
        active = not info.is_archived
        if active:
            public_active += 1
        uses_actions = False
        if active:
            run_count = retry.run(lambda name=info.full_name: probe.count_runs_in_year(name, year))
            uses_actions = run_count > 0
            if uses_actions:
                using_actions += 1
        records.append(
            RepositoryRecord(
                repo_id=info.repo_id,
                full_name=info.full_name,
                is_fork=info.is_fork,
                is_archived=info.is_archived,
                last_push_at=info.last_push_at,
                collected_at=collected_at,
                uses_actions_in_year=uses_actions,
            )
        )
    summary = SampleSummary(total_drawn, public_active, using_actions, seed)
    return SampleResult(summary=summary, records=records)


@dataclass
class RepoRunData:
    """Runs and jobs of one repository, or an unretrievable marker."""

    repo_id: int
    runs: list[WorkflowRun] = field(default_factory=list)
    jobs: list[WorkflowJob] = field(default_factory=list)
    unretrievable: bool = False
    error: str | None = None


def fetch_workflow_runs(
    repo: RepositoryRecord,
    year: int,
    probe: RepositoryProbe,
    retry: RetryPolicy | None = None,
) -> RepoRunData:
    """All runs created in the year plus their jobs, following pagination.

    Permanently forbidden repositories are returned as unretrievable markers
    rather than raised, so a batch fetch can proceed past them.
    """
    retry = retry or RetryPolicy()
    result = RepoRunData(repo_id=repo.repo_id)
    try:
        page: int | None = 1
        while page is not None:
            runs, page = retry.run(
                lambda p=page: probe.list_runs_page(repo.repo_id, repo.full_name, year, p)
            )
            result.runs.extend(runs)
        for run in result.runs:
            page = 1
            while page is not None:
                jobs, page = retry.run(
                    lambda p=page, r=run: probe.list_jobs_page(repo.full_name, r.run_id, p)
                )
                result.jobs.extend(jobs)
    except ForbiddenError as exc:
        log.warning("repository %s unretrievable: %s", repo.full_name, exc)
        return RepoRunData(repo_id=repo.repo_id, unretrievable=True, error=str(exc))
    return result


def fetch_many(
    repos: Sequence[RepositoryRecord],
    year: int,
    probe: RepositoryProbe,
    workers: int = 4,
    retry: RetryPolicy | None = None,
) -> list[RepoRunData]:
    """Fetch several repositories concurrently; output order matches input."""
    if workers <= 1 or len(repos) <= 1:
        return [fetch_workflow_runs(repo, year, probe, retry) for repo in repos]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda repo: fetch_workflow_runs(repo, year, probe, retry), repos))

"""Aggregation: per-repo sums, sample means, and ecosystem extrapolation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime
from typing import Mapping, Sequence

from cifp.dataset.records import Dataset, WorkflowJob, WorkflowRun
from cifp.energy import cloud_energy
from cifp.errors import CoverageGapError, EmptyDataError
from cifp.estimator.population import PopulationEstimate
from cifp.estimator.scenarios import Scenario
from cifp.footprint import (
    FootprintResult,
    embodied_emissions,
    embodied_water,
    intensity_at,
    job_footprint,
)
from cifp.griddata import GridData

log = logging.getLogger(__name__)

GRAMS_PER_MTCO2E = 1e6


def operational_factor(scenario: Scenario, grid: GridData, instant: datetime) -> float:
    """Region-averaged PUE x intensity at the instant's hour, in MTCO2e/kWh.

    Multiplying a job's kWh (or a kWh component) by this factor yields its
    scenario operational emissions.
    """
    total = 0.0
    for region in scenario.regions:
        series = grid.series_for(region)
        total += region.pue * intensity_at(series, instant)
    return total / len(scenario.regions) / GRAMS_PER_MTCO2E


def scenario_job_footprint(
    job: WorkflowJob,
    scenario: Scenario,
    grid: GridData,
    run_start: datetime | None = None,
) -> FootprintResult:
    """Job footprint under a scenario: per-region results averaged field-wise."""
    per_region = [
        job_footprint(job, scenario.metrics, grid.machine, region, grid.series_for(region), grid.mix, run_start)
        for region in scenario.regions
    ]
    return FootprintResult.mean(per_region)


def repo_footprint(
    jobs: Sequence[WorkflowJob],
    scenario: Scenario,
    grid: GridData,
    runs_by_id: Mapping[int, WorkflowRun] | None = None,
) -> FootprintResult:
    """Field-wise sum of job footprints for one repository's filtered jobs.

    When the run index is provided, each job is priced at its run's creation
    hour; otherwise at its own start hour. Coverage gaps propagate annotated
    with the offending job id.
    """
    total = FootprintResult.zero()
    for job in jobs:
        run_start = None
        if runs_by_id is not None:
            run = runs_by_id.get(job.run_id)
            run_start = run.created_at if run is not None else None
        try:
            total = total + scenario_job_footprint(job, scenario, grid, run_start)
        except CoverageGapError as exc:
            raise CoverageGapError(exc.zone, exc.instant, f"while pricing job {job.job_id}") from exc
    return total


def average_repo_footprint(sample: Sequence[FootprintResult]) -> FootprintResult:
    """Field-wise mean over sampled repositories.

    Repositories with zero retrievable runs must be included as zero results
    by the caller; unretrievable repositories are excluded upstream.
    """
    if not sample:
        raise EmptyDataError("average footprint of an empty sample is undefined")
    return FootprintResult.mean(sample)


def extrapolate_ecosystem(avg: FootprintResult, population: PopulationEstimate) -> FootprintResult:
    """Scale the per-repository average to the estimated population."""
    if population.extrapolated_count <= 0:
        raise ValueError("extrapolated_count must be positive")
    return avg.scaled(float(population.extrapolated_count))


def scenario_energy_components(
    job: WorkflowJob, scenario: Scenario, grid: GridData
):
    """EnergyBreakdown of one job under the scenario's metrics."""
    duration = job.duration_seconds()
    if duration is None:
        raise ValueError(f"job {job.job_id} has no completion time; filter jobs first")
    return cloud_energy(duration / 3600.0, scenario.metrics, grid.machine)


def scenario_embodied(job: WorkflowJob, grid: GridData) -> tuple[float, float]:
    """(embodied carbon MTCO2e, embodied water L) for one job."""
    duration = job.duration_seconds()
    if duration is None:
        raise ValueError(f"job {job.job_id} has no completion time; filter jobs first")
    carbon = embodied_emissions(duration, grid.machine)
    return carbon, embodied_water(carbon, grid.mix)


@dataclass(frozen=True)
class DatasetEvaluation:
    """All-repo totals for one scenario, with skip accounting.

    Jobs whose run hour falls into an intensity coverage gap are skipped and
    listed rather than aborting the whole evaluation.
    """

    scenario_name: str
    total: FootprintResult
    per_repo: dict[int, FootprintResult]
    skipped_job_ids: tuple[int, ...]
    skipped_job_seconds: float
    evaluated_job_seconds: float

    @property
    def skipped_time_fraction(self) -> float:
        denominator = self.skipped_job_seconds + self.evaluated_job_seconds
        return self.skipped_job_seconds / denominator if denominator > 0 else 0.0


def evaluate_dataset(dataset: Dataset, scenario: Scenario, grid: GridData) -> DatasetEvaluation:
    """Price every filtered job of every repository under one scenario."""
    per_repo: dict[int, FootprintResult] = {}
    total = FootprintResult.zero()
    skipped: list[int] = []
    skipped_seconds = 0.0
    evaluated_seconds = 0.0
    for repo_id, jobs in sorted(dataset.jobs_by_repo().items()):
        repo_total = FootprintResult.zero()
        for job in jobs:
            run = dataset.runs_by_id.get(job.run_id)
            run_start = run.created_at if run is not None else None
            try:
                result = scenario_job_footprint(job, scenario, grid, run_start)
            except CoverageGapError as exc:
                log.warning("scenario %s: skipping job %s: %s", scenario.name, job.job_id, exc)
                skipped.append(job.job_id)
                skipped_seconds += job.duration_seconds()
                continue
            evaluated_seconds += job.duration_seconds()
            repo_total = repo_total + result
        per_repo[repo_id] = repo_total
        total = total + repo_total
    return DatasetEvaluation(
        scenario_name=scenario.name,
        total=total,
        per_repo=per_repo,
        skipped_job_ids=tuple(skipped),
        skipped_job_seconds=skipped_seconds,
        evaluated_job_seconds=evaluated_seconds,
    )


def sample_mean_footprint(dataset: Dataset, evaluation: DatasetEvaluation) -> FootprintResult:
    """Mean over the sample basis: actions-using repositories minus the
    unretrievable ones; repos with zero runs contribute zero results."""
    basis = dataset.sample_basis_repo_ids()
    if not basis:
        raise EmptyDataError("no retrievable actions-using repositories in the dataset")
    zero = FootprintResult.zero()
    return average_repo_footprint([evaluation.per_repo.get(repo_id, zero) for repo_id in basis])

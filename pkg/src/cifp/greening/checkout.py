"""Network attribution of the repository-checkout step.

Clone sizes are measured externally (compressed transfer size of a shallow
clone); each job is assumed to run the checkout step once. Rows in the
clone-size file without a size mark repositories known to use checkout whose
clone failed: they widen the extrapolation target without contributing
measurements.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from cifp.dataset.records import Dataset
from cifp.errors import CoverageGapError, EmptyDataError, TableError
from cifp.estimator.aggregate import operational_factor, scenario_embodied, scenario_energy_components
from cifp.estimator.scenarios import Scenario
from cifp.griddata import GridData

CLONE_SIZE_COLUMNS = ("full_name", "compressed_clone_gb", "measured_at")

# Share of total execution time spent in the checkout step. Not derivable
# from job-level data; measured externally (step-level telemetry).
DEFAULT_CHECKOUT_TIME_SHARE = 0.122


@dataclass(frozen=True)
class CheckoutStats:
    """Checkout transfer volume and its share of network and emissions."""

    checkout_executions: int
    measured_executions: int
    repos_measured: int
    total_clone_gb: float
    avg_gb_per_checkout: float
    extrapolated_total_gb: float
    network_share: float
    emission_share: float
    skipped_job_ids: tuple[int, ...] = ()


def checkout_emission_share(
    time_share: float,
    network_share: float,
    network_fraction: float,
    nonnetwork_operational_fraction: float,
) -> float:
    """Checkout's share of total emissions: its execution-time share applied
    to compute/storage/memory operational emissions plus its traffic share
    applied to network emissions. Embodied emissions get no attribution."""
    return time_share * nonnetwork_operational_fraction + network_share * network_fraction


def checkout_attribution(
    dataset: Dataset,
    clone_sizes: Mapping[str, float | None],
    scenario: Scenario,
    grid: GridData,
    time_share: float = DEFAULT_CHECKOUT_TIME_SHARE,
) -> CheckoutStats:
    """Extrapolate measured clone sizes to all checkout executions and
    attribute the matching slice of the dataset's emissions."""
    repo_by_name = {repo.full_name: repo.repo_id for repo in dataset.repositories}
    jobs_by_repo = dataset.jobs_by_repo()

    measured_executions = 0
    repos_measured = 0
    total_clone_gb = 0.0
    checkout_executions = 0
    for full_name, size_gb in clone_sizes.items():
        repo_id = repo_by_name.get(full_name)
        if repo_id is None:
            continue
        job_count = len(jobs_by_repo.get(repo_id, []))
        checkout_executions += job_count
        if size_gb is None:
            continue
        repos_measured += 1
        measured_executions += job_count
        total_clone_gb += size_gb * job_count
    if measured_executions == 0:
        raise EmptyDataError("no measured checkout executions; cannot estimate clone volume")

    avg_gb = total_clone_gb / measured_executions
    extrapolated_gb = avg_gb * checkout_executions

    all_jobs = dataset.filtered_jobs()
    total_network_gb = len(all_jobs) * scenario.metrics.network_gb_per_job
    network_share = extrapolated_gb / total_network_gb if total_network_gb > 0 else 0.0

    network_op = 0.0
    csm_op = 0.0
    embodied = 0.0
    skipped: list[int] = []
    for job in all_jobs:
        run = dataset.runs_by_id.get(job.run_id)
        instant = run.created_at if run is not None else job.started_at
        try:
            factor = operational_factor(scenario, grid, instant)
        except CoverageGapError:
            skipped.append(job.job_id)
            continue
        energy = scenario_energy_components(job, scenario, grid)
        network_op += energy.network_kwh * factor
        csm_op += energy.non_network_kwh * factor
        embodied += scenario_embodied(job, grid)[0]

    total_emissions = network_op + csm_op + embodied
    if total_emissions > 0:
        emission_share = checkout_emission_share(
            time_share=time_share,
            network_share=network_share,
            network_fraction=network_op / total_emissions,
            nonnetwork_operational_fraction=csm_op / total_emissions,
        )
    else:
        emission_share = 0.0

    return CheckoutStats(
        checkout_executions=checkout_executions,
        measured_executions=measured_executions,
        repos_measured=repos_measured,
        total_clone_gb=total_clone_gb,
        avg_gb_per_checkout=avg_gb,
        extrapolated_total_gb=extrapolated_gb,
        network_share=network_share,
        emission_share=emission_share,
        skipped_job_ids=tuple(skipped),
    )


def load_clone_sizes(source: str | Path | IO[str]) -> dict[str, float | None]:
    """Clone-size file: (full_name, compressed_clone_gb, measured_at); a
    blank size marks a known checkout user whose clone failed."""
    if hasattr(source, "read"):
        return _parse_rows(source, path="<stream>")
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_rows(fh, path=str(source))


def _parse_rows(fh: Iterable[str], path: str) -> dict[str, float | None]:
    sizes: dict[str, float | None] = {}
    header_seen = False
    for row_no, row in enumerate(csv.reader(fh), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if tuple(cells) != CLONE_SIZE_COLUMNS:
                raise TableError(f"expected header {','.join(CLONE_SIZE_COLUMNS)}", path, row_no)
            header_seen = True
            continue
        if len(cells) != 3:
            raise TableError(f"expected 3 columns, got {len(cells)}", path, row_no)
        full_name, raw_size, _measured_at = cells
        if raw_size:
            try:
                size: float | None = float(raw_size)
            except ValueError as exc:
                raise TableError(f"bad size: {exc}", path, row_no) from exc
            if size < 0:
                raise TableError("clone size must be >= 0", path, row_no)
        else:
            size = None
        sizes[full_name] = size
    if not header_seen:
        raise TableError("empty table: missing header line", path, 1)
    return sizes

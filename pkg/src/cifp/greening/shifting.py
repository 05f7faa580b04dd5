"""Same-day carbon-aware shifting of scheduled runs.

A scheduled run is re-priced as if it had started at the cleanest hour of
its own UTC calendar day; everything else about the run (duration, energy,
embodied emissions) stays fixed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import IO

from cifp.dataset.records import Dataset
from cifp.errors import CoverageGapError
from cifp.estimator.aggregate import operational_factor, scenario_energy_components
from cifp.estimator.scenarios import Scenario
from cifp.griddata import GridData, floor_to_hour, format_rfc3339
from cifp.griddata.intensity import bucket_value

GRAMS_PER_MTCO2E = 1e6


@dataclass(frozen=True)
class ShiftMove:
    run_id: int
    original_hour: datetime
    target_hour: datetime
    baseline_g: float
    shifted_g: float


@dataclass(frozen=True)
class ShiftPlan:
    moves: tuple[ShiftMove, ...]
    baseline_operational_mtco2e: float
    shifted_operational_mtco2e: float
    skipped_run_ids: tuple[int, ...]

    @property
    def reduction_fraction(self) -> float:
        if self.baseline_operational_mtco2e <= 0:
            return 0.0
        return 1.0 - self.shifted_operational_mtco2e / self.baseline_operational_mtco2e


def scenario_daily_min_hour(scenario: Scenario, grid: GridData, day: datetime) -> datetime:
    """Hour of the day minimizing the region-averaged pue x intensity.

    Only hours covered by every region's series qualify; ties resolve to the
    earliest hour. For a single-region scenario this is exactly the region's
    daily minimum-intensity hour.
    """
    day_start = floor_to_hour(day).replace(hour=0)
    best: tuple[float, datetime] | None = None
    for offset in range(24):
        hour = day_start + timedelta(hours=offset)
        score = 0.0
        covered = True
        for region in scenario.regions:
            match = bucket_value(grid.series_for(region), hour)
            if match is None:
                covered = False
                break
            score += region.pue * match
        if not covered:
            continue
        if best is None or score < best[0]:
            best = (score, hour)
    if best is None:
        zones = ",".join(sorted({r.intensity_zone for r in scenario.regions}))
        raise CoverageGapError(zones, day_start, "no hour of this day is covered by all regions")
    return best[1]


def simulate_temporal_shift(dataset: Dataset, scenario: Scenario, grid: GridData) -> ShiftPlan:
    """Re-price every scheduled run at its day's cleanest hour.

    Runs are moved only when the move strictly reduces emissions, so the
    per-run shifted value never exceeds the baseline and an already-optimal
    dataset yields an identity plan. Runs with intensity coverage gaps are
    skipped and listed.
    """
    jobs_by_run: dict[int, list] = {}
    for job in dataset.filtered_jobs():
        jobs_by_run.setdefault(job.run_id, []).append(job)

    baseline_total = 0.0
    shifted_total = 0.0
    moves: list[ShiftMove] = []
    skipped: list[int] = []
    min_hour_by_day: dict[datetime, datetime | CoverageGapError] = {}

    def cached_min_hour(instant: datetime) -> datetime:
        day = floor_to_hour(instant).replace(hour=0)
        cached = min_hour_by_day.get(day)
        if cached is None:
            try:
                cached = scenario_daily_min_hour(scenario, grid, day)
            except CoverageGapError as exc:
                cached = exc
            min_hour_by_day[day] = cached
        if isinstance(cached, CoverageGapError):
            raise cached
        return cached

    for run_id in sorted(jobs_by_run):
        run = dataset.runs_by_id.get(run_id)
        if run is None:
            skipped.append(run_id)
            continue
        kwh = sum(
            scenario_energy_components(job, scenario, grid).total_kwh for job in jobs_by_run[run_id]
        )
        try:
            baseline_factor = operational_factor(scenario, grid, run.created_at)
        except CoverageGapError:
            skipped.append(run_id)
            continue
        baseline = baseline_factor * kwh
        shifted = baseline
        if run.is_scheduled:
            try:
                target_hour = cached_min_hour(run.created_at)
                target_factor = operational_factor(scenario, grid, target_hour)
            except CoverageGapError:
                skipped.append(run_id)
                continue
            original_hour = floor_to_hour(run.created_at)
            if target_factor < baseline_factor and target_hour != original_hour:
                shifted = target_factor * kwh
                moves.append(
                    ShiftMove(
                        run_id=run_id,
                        original_hour=original_hour,
                        target_hour=target_hour,
                        baseline_g=baseline * GRAMS_PER_MTCO2E,
                        shifted_g=shifted * GRAMS_PER_MTCO2E,
                    )
                )
        baseline_total += baseline
        shifted_total += shifted

    return ShiftPlan(
        moves=tuple(moves),
        baseline_operational_mtco2e=baseline_total,
        shifted_operational_mtco2e=shifted_total,
        skipped_run_ids=tuple(skipped),
    )


def export_shift_plan(plan: ShiftPlan, target: str | Path | IO[str]) -> None:
    """Write the moves as delimited text (grams CO2e per run)."""
    if hasattr(target, "write"):
        _write_plan(plan, target)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        _write_plan(plan, fh)


def _write_plan(plan: ShiftPlan, fh: IO[str]) -> None:
    fh.write("run_id,original_hour,target_hour,baseline_g,shifted_g\n")
    for move in plan.moves:
        fh.write(
            f"{move.run_id},{format_rfc3339(move.original_hour)},"
            f"{format_rfc3339(move.target_hour)},{move.baseline_g!r},{move.shifted_g!r}\n"
        )

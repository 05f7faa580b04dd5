"""Shared fixtures: regions, intensity series, and small datasets."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from cifp.dataset.records import WorkflowJob, WorkflowRun
from cifp.energy import UsageMetrics
from cifp.griddata import (
    AMERICAS,
    DEFAULT_MACHINE,
    CarbonIntensitySeries,
    GridData,
    ManufacturingMix,
    MixEntry,
    RegionProfile,
)

UTC = timezone.utc


def hour(day: int, h: int, minute: int = 0, second: int = 0) -> datetime:
    """March 2024 timestamp helper used across the suite."""
    return datetime(2024, 3, day, h, minute, second, tzinfo=UTC)


def make_series(zone: str = "Z", value: float = 400.0, start: datetime | None = None, hours: int = 48):
    start = start or hour(1, 0)
    return CarbonIntensitySeries.from_points(
        zone, [(start + timedelta(hours=i), value) for i in range(hours)]
    )


def make_job(job_id: int, run_id: int, start: datetime, minutes: float) -> WorkflowJob:
    return WorkflowJob(job_id, run_id, start, start + timedelta(minutes=minutes))


def make_run(run_id: int, repo_id: int, trigger: str, created: datetime) -> WorkflowRun:
    return WorkflowRun(run_id, repo_id, trigger, created)


@pytest.fixture
def machine():
    return DEFAULT_MACHINE


@pytest.fixture
def baseline_metrics():
    return UsageMetrics(1.51, 1.78, 0.22)


@pytest.fixture
def americas_region():
    return RegionProfile(
        region_id="us-test",
        geography=AMERICAS,
        pue=1.17,
        wue=0.55,
        ewif=2.0,
        water_scarcity_factor=1.0,
        intensity_zone="Z",
    )


@pytest.fixture
def flat_series():
    return make_series()


@pytest.fixture
def singleton_mix():
    return ManufacturingMix(entries=(MixEntry("X", 0.5, 500.0, 2.0),))


@pytest.fixture
def grid(americas_region, flat_series, singleton_mix):
    return GridData(
        regions={americas_region.region_id: americas_region},
        series={"Z": flat_series},
        mix=singleton_mix,
    )

"""Carbon and water footprint of a single job in a region.

Unit regime: energy in kWh, grid intensity in gCO2e/kWh, carbon in MTCO2e
(grams / 1e6), water in liters. Conversions happen here and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Sequence

from cifp.dataset.records import WorkflowJob
from cifp.energy import EnergyBreakdown, UsageMetrics, cloud_energy
from cifp.errors import DegenerateMixError, EmptyDataError, MissingCoefficientError
from cifp.griddata import (
    CarbonIntensitySeries,
    MachineProfile,
    ManufacturingMix,
    RegionProfile,
    intensity_at,
    weighted_manufacturing_factors,
)

GRAMS_PER_MTCO2E = 1e6


@dataclass(frozen=True)
class FootprintResult:
    """Per-job (or aggregated) carbon and water footprint.

    Totals are derived, so the additivity invariants hold by construction.
    """

    operational_carbon_mtco2e: float
    embodied_carbon_mtco2e: float
    offsite_water_l: float
    onsite_water_l: float
    embodied_water_l: float

    @property
    def total_carbon_mtco2e(self) -> float:
        return self.operational_carbon_mtco2e + self.embodied_carbon_mtco2e

    @property
    def total_water_l(self) -> float:
        return self.offsite_water_l + self.onsite_water_l + self.embodied_water_l

    def __add__(self, other: "FootprintResult") -> "FootprintResult":
        return FootprintResult(
            operational_carbon_mtco2e=self.operational_carbon_mtco2e + other.operational_carbon_mtco2e,
            embodied_carbon_mtco2e=self.embodied_carbon_mtco2e + other.embodied_carbon_mtco2e,
            offsite_water_l=self.offsite_water_l + other.offsite_water_l,
            onsite_water_l=self.onsite_water_l + other.onsite_water_l,
            embodied_water_l=self.embodied_water_l + other.embodied_water_l,
        )

    def scaled(self, factor: float) -> "FootprintResult":
        return FootprintResult(
            operational_carbon_mtco2e=self.operational_carbon_mtco2e * factor,
            embodied_carbon_mtco2e=self.embodied_carbon_mtco2e * factor,
            offsite_water_l=self.offsite_water_l * factor,
            onsite_water_l=self.onsite_water_l * factor,
            embodied_water_l=self.embodied_water_l * factor,
        )

    @classmethod
    def zero(cls) -> "FootprintResult":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def sum(cls, items: Iterable["FootprintResult"]) -> "FootprintResult":
        total = cls.zero()
        for item in items:
            total = total + item
        return total

    @classmethod
    def mean(cls, items: Sequence["FootprintResult"]) -> "FootprintResult":
        if not items:
            raise EmptyDataError("mean footprint of an empty sample is undefined")
        return cls.sum(items).scaled(1.0 / len(items))


def operational_emissions(
    energy: EnergyBreakdown,
    region: RegionProfile,
    series: CarbonIntensitySeries,
    run_start: datetime,
) -> float:
    """PUE x grid intensity at the run's start hour x energy, in MTCO2e.

    The start-hour intensity prices the whole job even when it spans hours.
    """
    grams = region.pue * intensity_at(series, run_start) * energy.total_kwh
    return grams / GRAMS_PER_MTCO2E


def embodied_emissions(duration_s: float, machine: MachineProfile) -> float:
    """Manufacturing emissions amortized over lifespan and reserved share."""
    if duration_s < 0:
        raise ValueError("duration_s must be >= 0")
    time_share = duration_s / machine.lifespan_seconds
    resource_share = machine.reserved_vcpus / machine.total_vcpus_on_host
    return machine.total_embodied_mtco2e * time_share * resource_share


def offsite_water(energy: EnergyBreakdown, region: RegionProfile) -> float:
    """Water consumed producing the electricity (liters)."""
    if region.ewif is None:
        raise MissingCoefficientError(region.region_id, "ewif")
    return energy.total_kwh * region.pue * region.ewif


def onsite_water(energy: EnergyBreakdown, region: RegionProfile) -> float:
    """Cooling water consumed in the data center (liters)."""
    return energy.total_kwh * region.wue


def embodied_water(embodied_carbon_mtco2e: float, mix: ManufacturingMix) -> float:
    """Water embodied in hardware manufacturing, back-estimated from the
    embodied carbon via the manufacturing mix's grid factors."""
    intensity, ewif = weighted_manufacturing_factors(mix)
    if intensity <= 0:
        raise DegenerateMixError("weighted manufacturing carbon intensity is zero")
    manufacturing_kwh = embodied_carbon_mtco2e * GRAMS_PER_MTCO2E / intensity
    return manufacturing_kwh * ewif


def job_footprint(
    job: WorkflowJob,
    metrics: UsageMetrics,
    machine: MachineProfile,
    region: RegionProfile,
    series: CarbonIntensitySeries,
    mix: ManufacturingMix,
    run_start: datetime | None = None,
) -> FootprintResult:
    """Full footprint of one filtered job in one region.

    run_start is the instant whose hour prices the operational emissions;
    pass the parent run's creation time when known (it defaults to the
    job's own start).
    """
    duration_s = job.duration_seconds()
    if duration_s is None:
        raise ValueError(f"job {job.job_id} has no completion time; filter jobs first")
    energy = cloud_energy(duration_s / 3600.0, metrics, machine)
    embodied_carbon = embodied_emissions(duration_s, machine)
    start = run_start if run_start is not None else job.started_at
    return FootprintResult(
        operational_carbon_mtco2e=operational_emissions(energy, region, series, start),
        embodied_carbon_mtco2e=embodied_carbon,
        offsite_water_l=offsite_water(energy, region),
        onsite_water_l=onsite_water(energy, region),
        embodied_water_l=embodied_water(embodied_carbon, mix),
    )

"""Region, grid, and hardware coefficient tables.

Everything here is immutable after loading; lookups are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from cifp.errors import CoverageGapError
from cifp.griddata.intensity import (
    CarbonIntensitySeries,
    daily_min_hour,
    floor_to_hour,
    format_rfc3339,
    intensity_at,
    load_intensity_series,
    parse_rfc3339,
)
from cifp.griddata.machines import DEFAULT_MACHINE, FOUR_YEAR_LIFESPAN_S, MachineProfile
from cifp.griddata.manufacturing import (
    ManufacturingMix,
    MixEntry,
    load_manufacturing_mix,
    weighted_manufacturing_factors,
)
from cifp.griddata.regions import (
    AMERICAS,
    ASIA_PACIFIC,
    DEFAULT_PUE,
    DEFAULT_WUE,
    EMEA,
    GEOGRAPHIES,
    RegionProfile,
    load_region_table,
)

__all__ = [
    "AMERICAS",
    "ASIA_PACIFIC",
    "CarbonIntensitySeries",
    "DEFAULT_MACHINE",
    "DEFAULT_PUE",
    "DEFAULT_WUE",
    "EMEA",
    "FOUR_YEAR_LIFESPAN_S",
    "GEOGRAPHIES",
    "GridData",
    "MachineProfile",
    "ManufacturingMix",
    "MixEntry",
    "RegionProfile",
    "daily_min_hour",
    "default_data_path",
    "floor_to_hour",
    "format_rfc3339",
    "intensity_at",
    "load_grid",
    "load_intensity_series",
    "load_manufacturing_mix",
    "load_region_table",
    "parse_rfc3339",
]


@dataclass(frozen=True)
class GridData:
    """All region- and grid-dependent inputs needed to price a job."""

    regions: dict[str, RegionProfile]
    series: dict[str, CarbonIntensitySeries]
    mix: ManufacturingMix
    machine: MachineProfile = field(default=DEFAULT_MACHINE)

    def region(self, region_id: str) -> RegionProfile:
        try:
            return self.regions[region_id]
        except KeyError:
            raise KeyError(f"unknown region {region_id!r}") from None

    def series_for(self, region: RegionProfile) -> CarbonIntensitySeries:
        series = self.series.get(region.intensity_zone)
        if series is None:
            raise CoverageGapError(
                region.intensity_zone or "<unset>",
                detail=f"region {region.region_id!r} references a zone with no loaded series",
            )
        return series


def load_grid(
    region_table: str | Path,
    intensity_file: str | Path,
    mix_file: str | Path,
    machine: MachineProfile = DEFAULT_MACHINE,
) -> GridData:
    regions = {profile.region_id: profile for profile in load_region_table(region_table)}
    series = load_intensity_series(intensity_file)
    mix = load_manufacturing_mix(mix_file)
    return GridData(regions=regions, series=series, mix=mix, machine=machine)


def default_data_path(name: str) -> Path:
    """Path of a bundled default table (regions, mix, equivalences, scenarios)."""
    return Path(str(resources.files("cifp.griddata").joinpath("data", name)))

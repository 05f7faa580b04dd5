"""Deployment scenarios: region sets and usage settings."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from cifp.energy import BASELINE, HIGH_USAGE, LOW_USAGE, SETTINGS, UsageMetrics
from cifp.errors import TableError
from cifp.griddata import RegionProfile

log = logging.getLogger(__name__)

SCENARIO_COLUMNS = ("name", "setting", "regions")

_SETTING_FACTORS = {BASELINE: 1.0, LOW_USAGE: 0.5, HIGH_USAGE: 2.0}


def apply_setting(metrics: UsageMetrics, setting: str, vcpu_count: int) -> UsageMetrics:
    """Transform baseline metrics for a setting: low halves and high doubles
    all three usage fields; avg_vcpus is clamped to the machine's vCPUs."""
    try:
        factor = _SETTING_FACTORS[setting]
    except KeyError:
        raise ValueError(f"unknown usage setting {setting!r}; expected one of {SETTINGS}") from None
    transformed = metrics if factor == 1.0 and metrics.setting == setting else metrics.scaled(factor, setting)
    if transformed.avg_vcpus > vcpu_count:
        log.warning(
            "setting %s pushes avg_vcpus to %.3f; clamping to the %d reserved vCPUs",
            setting,
            transformed.avg_vcpus,
            vcpu_count,
        )
        transformed = UsageMetrics(
            avg_vcpus=float(vcpu_count),
            avg_memory_gb=transformed.avg_memory_gb,
            network_gb_per_job=transformed.network_gb_per_job,
            setting=setting,
        )
    return transformed


@dataclass(frozen=True)
class Scenario:
    """Named evaluation: where runners are assumed to live and under which
    usage setting. Multi-region scenarios average per-region results."""

    name: str
    regions: tuple[RegionProfile, ...]
    setting: str
    metrics: UsageMetrics

    def __post_init__(self):
        if not self.regions:
            raise ValueError("a scenario needs at least one region")

    @classmethod
    def build(
        cls,
        name: str,
        regions: Iterable[RegionProfile],
        setting: str,
        baseline_metrics: UsageMetrics,
        vcpu_count: int,
    ) -> "Scenario":
        return cls(
            name=name,
            regions=tuple(regions),
            setting=setting,
            metrics=apply_setting(baseline_metrics, setting, vcpu_count),
        )


@dataclass(frozen=True)
class ScenarioSpec:
    """One scenario file row, before regions are resolved against a table."""

    name: str
    setting: str
    region_ids: tuple[str, ...]

    def resolve(
        self, regions: Mapping[str, RegionProfile], baseline_metrics: UsageMetrics, vcpu_count: int
    ) -> Scenario:
        missing = [rid for rid in self.region_ids if rid not in regions]
        if missing:
            raise TableError(f"scenario {self.name!r} references unknown regions {missing}", "<scenarios>", 0)
        return Scenario.build(
            name=self.name,
            regions=[regions[rid] for rid in self.region_ids],
            setting=self.setting,
            baseline_metrics=baseline_metrics,
            vcpu_count=vcpu_count,
        )


def load_scenarios(source: str | Path | IO[str]) -> list[ScenarioSpec]:
    """Scenario file: CSV of (name, setting, regions) with regions joined
    by ';'."""
    if hasattr(source, "read"):
        return _parse_scenarios(source, path="<stream>")
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_scenarios(fh, path=str(source))


def _parse_scenarios(fh: Iterable[str], path: str) -> list[ScenarioSpec]:
    specs = []
    header_seen = False
    for row_no, row in enumerate(csv.reader(fh), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if tuple(cells) != SCENARIO_COLUMNS:
                raise TableError(f"expected header {','.join(SCENARIO_COLUMNS)}", path, row_no)
            header_seen = True
            continue
        if len(cells) != 3:
            raise TableError(f"expected 3 columns, got {len(cells)}", path, row_no)
        name, setting, regions_raw = cells
        if setting not in SETTINGS:
            raise TableError(f"unknown setting {setting!r}", path, row_no)
        region_ids = tuple(rid.strip() for rid in regions_raw.split(";") if rid.strip())
        if not region_ids:
            raise TableError(f"scenario {name!r} lists no regions", path, row_no)
        specs.append(ScenarioSpec(name=name, setting=setting, region_ids=region_ids))
    if not header_seen:
        raise TableError("empty table: missing header line", path, 1)
    return specs

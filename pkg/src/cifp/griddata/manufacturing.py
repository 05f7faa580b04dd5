"""Semiconductor manufacturing mix used for embodied-water estimation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from cifp.errors import DegenerateMixError, TableError

MIX_COLUMNS = ("country", "share", "carbon_intensity_g_per_kwh", "ewif_l_per_kwh")


@dataclass(frozen=True)
class MixEntry:
    country: str
    share: float
    carbon_intensity_g_per_kwh: float
    ewif_l_per_kwh: float

    def __post_init__(self):
        if self.share < 0:
            raise ValueError("share must be >= 0")
        if self.carbon_intensity_g_per_kwh < 0 or self.ewif_l_per_kwh < 0:
            raise ValueError("intensity and ewif must be >= 0")


@dataclass(frozen=True)
class ManufacturingMix:
    """Country shares of manufacturing capacity; shares are renormalized to
    sum to 1 whenever weighted factors are computed."""

    entries: tuple[MixEntry, ...]


def weighted_manufacturing_factors(mix: ManufacturingMix) -> tuple[float, float]:
    """Share-weighted mean carbon intensity (g/kWh) and EWIF (L/kWh)."""
    if not mix.entries:
        raise DegenerateMixError("manufacturing mix is empty")
    total_share = sum(entry.share for entry in mix.entries)
    if total_share <= 0:
        raise DegenerateMixError("manufacturing mix shares sum to zero")
    intensity = sum(e.share * e.carbon_intensity_g_per_kwh for e in mix.entries) / total_share
    ewif = sum(e.share * e.ewif_l_per_kwh for e in mix.entries) / total_share
    return intensity, ewif


def load_manufacturing_mix(source: str | Path | IO[str]) -> ManufacturingMix:
    if hasattr(source, "read"):
        return _parse_mix_rows(source, path="<stream>")
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_mix_rows(fh, path=str(source))


def _parse_mix_rows(fh: Iterable[str], path: str) -> ManufacturingMix:
    entries = []
    header_seen = False
    for row_no, row in enumerate(csv.reader(fh), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if tuple(cells) != MIX_COLUMNS:
                raise TableError(f"expected header {','.join(MIX_COLUMNS)}", path, row_no)
            header_seen = True
            continue
        if len(cells) != 4:
            raise TableError(f"expected 4 columns, got {len(cells)}", path, row_no)
        try:
            entries.append(
                MixEntry(
                    country=cells[0],
                    share=float(cells[1]),
                    carbon_intensity_g_per_kwh=float(cells[2]),
                    ewif_l_per_kwh=float(cells[3]),
                )
            )
        except ValueError as exc:
            raise TableError(str(exc), path, row_no) from exc
    if not header_seen:
        raise TableError("empty table: missing header line", path, 1)
    return ManufacturingMix(entries=tuple(entries))

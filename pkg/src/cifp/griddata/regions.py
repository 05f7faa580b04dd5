"""Deployment-region profiles and the delimited region table loader."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from cifp.errors import TableError

AMERICAS = "Americas"
ASIA_PACIFIC = "AsiaPacific"
EMEA = "EMEA"
GEOGRAPHIES = (AMERICAS, ASIA_PACIFIC, EMEA)

# Geography-level defaults applied when a region row leaves pue/wue blank.
DEFAULT_PUE = {AMERICAS: 1.17, ASIA_PACIFIC: 1.405, EMEA: 1.185}
DEFAULT_WUE = {AMERICAS: 0.55, ASIA_PACIFIC: 1.65, EMEA: 0.1}

REGION_COLUMNS = ("region_id", "geography", "pue", "wue", "ewif", "wsf", "intensity_zone")


@dataclass(frozen=True)
class RegionProfile:
    """One deployment region with its efficiency and water coefficients.

    ewif and water_scarcity_factor are optional: analyses that need a
    missing coefficient fail loudly instead of assuming a value.
    """

    region_id: str
    geography: str
    pue: float
    wue: float
    ewif: float | None = None
    water_scarcity_factor: float | None = None
    intensity_zone: str = ""

    def __post_init__(self):
        if self.geography not in GEOGRAPHIES:
            raise ValueError(f"unknown geography {self.geography!r}")
        if self.pue < 1:
            raise ValueError(f"pue must be >= 1, got {self.pue}")
        if self.wue < 0:
            raise ValueError("wue must be >= 0")
        if self.ewif is not None and self.ewif < 0:
            raise ValueError("ewif must be >= 0")
        if self.water_scarcity_factor is not None and self.water_scarcity_factor < 0:
            raise ValueError("water_scarcity_factor must be >= 0")


def _parse_optional_float(raw: str) -> float | None:
    raw = raw.strip()
    if not raw:
        return None
    return float(raw)


def load_region_table(source: str | Path | IO[str]) -> list[RegionProfile]:
    """Parse a region table; blank pue/wue inherit the geography default.

    Rows violating the profile invariants raise TableError naming the row.
    Lines starting with '#' are comments; the first data line must be the
    column header.
    """
    if hasattr(source, "read"):
        return _parse_region_rows(source, path="<stream>")
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_region_rows(fh, path=str(source))


def _parse_region_rows(fh: Iterable[str], path: str) -> list[RegionProfile]:
    profiles = []
    header_seen = False
    for row_no, row in enumerate(csv.reader(fh), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if tuple(cells) != REGION_COLUMNS:
                raise TableError(
                    f"expected header {','.join(REGION_COLUMNS)}", path, row_no
                )
            header_seen = True
            continue
        if len(cells) != len(REGION_COLUMNS):
            raise TableError(f"expected {len(REGION_COLUMNS)} columns, got {len(cells)}", path, row_no)
        region_id, geography, pue_raw, wue_raw, ewif_raw, wsf_raw, zone = cells
        if geography not in GEOGRAPHIES:
            raise TableError(f"unknown geography {geography!r}", path, row_no)
        try:
            pue = _parse_optional_float(pue_raw)
            wue = _parse_optional_float(wue_raw)
            ewif = _parse_optional_float(ewif_raw)
            wsf = _parse_optional_float(wsf_raw)
        except ValueError as exc:
            raise TableError(f"bad numeric cell: {exc}", path, row_no) from exc
        try:
            profiles.append(
                RegionProfile(
                    region_id=region_id,
                    geography=geography,
                    pue=pue if pue is not None else DEFAULT_PUE[geography],
                    wue=wue if wue is not None else DEFAULT_WUE[geography],
                    ewif=ewif,
                    water_scarcity_factor=wsf,
                    intensity_zone=zone,
                )
            )
        except ValueError as exc:
            raise TableError(str(exc), path, row_no) from exc
    if not header_seen:
        raise TableError("empty table: missing header line", path, 1)
    return profiles

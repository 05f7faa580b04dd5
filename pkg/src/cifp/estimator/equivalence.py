"""Real-world equivalences for footprint totals (trees, showers, ...)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from cifp.errors import TableError
from cifp.footprint import FootprintResult

EQUIVALENCE_COLUMNS = ("label", "unit_amount", "unit", "citation")

# The unit column doubles as the dimension selector.
UNIT_CARBON = "MTCO2e"
UNIT_WATER = "L"


@dataclass(frozen=True)
class EquivalenceEntry:
    label: str
    unit_amount: float
    unit: str
    basis: str

    def __post_init__(self):
        if self.unit_amount <= 0:
            raise ValueError("unit_amount must be positive")
        if self.unit not in (UNIT_CARBON, UNIT_WATER):
            raise ValueError(f"unit must be {UNIT_CARBON} or {UNIT_WATER}, got {self.unit!r}")


@dataclass(frozen=True)
class EquivalenceTable:
    entries: tuple[EquivalenceEntry, ...]


def equivalences(result: FootprintResult, table: EquivalenceTable) -> list[tuple[str, int]]:
    """Whole-unit counts: total carbon or total water divided by each entry's
    unit amount, floored (all shipped entries are count-like)."""
    rows = []
    for entry in table.entries:
        quantity = result.total_carbon_mtco2e if entry.unit == UNIT_CARBON else result.total_water_l
        rows.append((entry.label, math.floor(quantity / entry.unit_amount)))
    return rows


def load_equivalence_table(source: str | Path | IO[str]) -> EquivalenceTable:
    if hasattr(source, "read"):
        return _parse_rows(source, path="<stream>")
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_rows(fh, path=str(source))


def _parse_rows(fh: Iterable[str], path: str) -> EquivalenceTable:
    entries = []
    header_seen = False
    for row_no, row in enumerate(csv.reader(fh), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if tuple(cells) != EQUIVALENCE_COLUMNS:
                raise TableError(f"expected header {','.join(EQUIVALENCE_COLUMNS)}", path, row_no)
            header_seen = True
            continue
        if len(cells) != 4:
            raise TableError(f"expected 4 columns, got {len(cells)}", path, row_no)
        try:
            entries.append(
                EquivalenceEntry(
                    label=cells[0],
                    unit_amount=float(cells[1]),
                    unit=cells[2],
                    basis=cells[3],
                )
            )
        except ValueError as exc:
            raise TableError(str(exc), path, row_no) from exc
    if not header_seen:
        raise TableError("empty table: missing header line", path, 1)
    return EquivalenceTable(entries=tuple(entries))

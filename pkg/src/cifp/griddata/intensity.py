"""Hourly grid carbon-intensity series and lookups.

All timestamps are UTC; a bucket labelled 10:00 covers [10:00, 11:00).
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterable

from cifp.errors import CoverageGapError, TableError

INTENSITY_COLUMNS = ("hour_start", "zone", "intensity_g_per_kwh")

# How far back intensity_at may fall when the exact hour bucket is missing.
FALLBACK_WINDOW = timedelta(hours=24)


def _require_utc(instant: datetime) -> datetime:
    if instant.tzinfo is None:
        return instant.replace(tzinfo=timezone.utc)
    return instant.astimezone(timezone.utc)


def floor_to_hour(instant: datetime) -> datetime:
    return _require_utc(instant).replace(minute=0, second=0, microsecond=0)


@dataclass(frozen=True)
class CarbonIntensitySeries:
    """Hour-aligned intensity points for one grid zone, strictly increasing."""

    zone: str
    points: tuple[tuple[datetime, float], ...]
    _hours: list[datetime] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        previous = None
        for hour_start, intensity in self.points:
            hour_start = _require_utc(hour_start)
            if hour_start != floor_to_hour(hour_start):
                raise ValueError(f"{hour_start.isoformat()} is not hour-aligned")
            if previous is not None and hour_start <= previous:
                raise ValueError("hour_start values must be strictly increasing")
            if intensity < 0:
                raise ValueError("intensity must be >= 0")
            previous = hour_start
        object.__setattr__(self, "_hours", [_require_utc(h) for h, _ in self.points])

    @classmethod
    def from_points(cls, zone: str, points: Iterable[tuple[datetime, float]]) -> "CarbonIntensitySeries":
        normalized = tuple((_require_utc(h), float(v)) for h, v in points)
        return cls(zone=zone, points=normalized)


def intensity_at(series: CarbonIntensitySeries, instant: datetime) -> float:
    """Intensity of the hour bucket containing instant, falling back to the
    nearest earlier bucket within 24 hours when that bucket is missing."""
    if not series.points:
        raise CoverageGapError(series.zone, instant, "series is empty")
    instant = _require_utc(instant)
    hour = floor_to_hour(instant)
    idx = bisect_right(series._hours, hour) - 1
    if idx < 0:
        raise CoverageGapError(series.zone, instant, "no bucket at or before instant")
    bucket_start, value = series.points[idx]
    if hour - _require_utc(bucket_start) > FALLBACK_WINDOW:
        raise CoverageGapError(
            series.zone,
            instant,
            f"nearest earlier bucket {bucket_start.isoformat()} is more than 24h old",
        )
    return value


def bucket_value(series: CarbonIntensitySeries, hour_start: datetime) -> float | None:
    """Exact-bucket intensity, or None when that hour has no bucket."""
    hour_start = floor_to_hour(hour_start)
    idx = bisect_right(series._hours, hour_start) - 1
    if idx < 0 or series._hours[idx] != hour_start:
        return None
    return series.points[idx][1]


def daily_min_hour(series: CarbonIntensitySeries, day: datetime) -> datetime:
    """Hour-start with the lowest intensity within the given UTC calendar
    day; ties resolve to the earliest hour."""
    day_start = _require_utc(day).replace(hour=0, minute=0, second=0, microsecond=0)
    day_end = day_start + timedelta(days=1)
    best = None
    for hour_start, value in series.points:
        if hour_start < day_start or hour_start >= day_end:
            continue
        if best is None or value < best[1]:
            best = (hour_start, value)
    if best is None:
        raise CoverageGapError(series.zone, day_start, "no buckets in this calendar day")
    return best[0]


def parse_rfc3339(raw: str) -> datetime:
    raw = raw.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    parsed = datetime.fromisoformat(raw)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} lacks a UTC offset")
    return parsed.astimezone(timezone.utc)


def format_rfc3339(instant: datetime) -> str:
    return _require_utc(instant).strftime("%Y-%m-%dT%H:%M:%SZ")


def load_intensity_series(source: str | Path | IO[str]) -> dict[str, CarbonIntensitySeries]:
    """Read an hourly intensity export; returns one series per zone.

    Rows may arrive unsorted; they are sorted per zone. Duplicate hours for
    a zone are rejected.
    """
    if hasattr(source, "read"):
        return _parse_intensity_rows(source, path="<stream>")
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_intensity_rows(fh, path=str(source))


def _parse_intensity_rows(fh: Iterable[str], path: str) -> dict[str, CarbonIntensitySeries]:
    buckets: dict[str, list[tuple[datetime, float]]] = {}
    header_seen = False
    for row_no, row in enumerate(csv.reader(fh), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        cells = [cell.strip() for cell in row]
        if not header_seen:
            if tuple(cells) != INTENSITY_COLUMNS:
                raise TableError(f"expected header {','.join(INTENSITY_COLUMNS)}", path, row_no)
            header_seen = True
            continue
        if len(cells) != 3:
            raise TableError(f"expected 3 columns, got {len(cells)}", path, row_no)
        try:
            hour_start = parse_rfc3339(cells[0])
            value = float(cells[2])
        except ValueError as exc:
            raise TableError(str(exc), path, row_no) from exc
        buckets.setdefault(cells[1], []).append((hour_start, value))
    if not header_seen:
        raise TableError("empty table: missing header line", path, 1)
    series = {}
    for zone, points in buckets.items():
        points.sort(key=lambda point: point[0])
        try:
            series[zone] = CarbonIntensitySeries(zone=zone, points=tuple(points))
        except ValueError as exc:
            raise TableError(f"zone {zone!r}: {exc}", path, 0) from exc
    return series

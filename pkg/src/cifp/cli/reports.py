"""Deterministic delimited report emission.

Every file starts with a provenance header (tool version, config hash,
input digests) so reports are traceable and reproducible byte-for-byte.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import cifp


def fmt(value) -> str:
    """Render one cell; floats use repr for exact, platform-stable output."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def provenance_lines(config_digest: str, input_digests: dict[str, str]) -> list[str]:
    lines = [
        f"# cifp-version: {cifp.__version__}",
        f"# config-sha256: {config_digest}",
    ]
    for name in sorted(input_digests):
        lines.append(f"# input {name} sha256: {input_digests[name]}")
    return lines


def write_report(
    path: Path,
    provenance: Sequence[str],
    columns: Sequence[str],
    rows: Iterable[Sequence],
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(cell) for cell in row) + "\n")


def write_json_report(path: Path, provenance: Sequence[str], payload) -> None:
    """Structured export variant: provenance comments then one JSON document."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in provenance:
            fh.write(line + "\n")
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")

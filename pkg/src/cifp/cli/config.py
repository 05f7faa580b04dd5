"""Run configuration: INI file plus command-line overrides.

Every referenced input file must exist and parse before any computation
starts; build_inputs() is that fail-fast pass.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field, fields
from datetime import datetime
from pathlib import Path

from cifp.dataset.archive import load_dataset
from cifp.dataset.github import TOKEN_ENV_VAR
from cifp.dataset.records import Dataset
from cifp.energy import DEFAULT_BASELINE_METRICS, UsageMetrics
from cifp.errors import CifpError, ConfigError
from cifp.estimator.equivalence import EquivalenceTable, load_equivalence_table
from cifp.estimator.population import PopulationEstimate
from cifp.estimator.scenarios import ScenarioSpec, load_scenarios
from cifp.greening.checkout import DEFAULT_CHECKOUT_TIME_SHARE, load_clone_sizes
from cifp.greening.waste import DEFAULT_INACTIVITY_DAYS
from cifp.griddata import (
    DEFAULT_MACHINE,
    GridData,
    MachineProfile,
    default_data_path,
    load_grid,
    parse_rfc3339,
)


@dataclass
class RunConfig:
    """Resolved settings for one command invocation."""

    config_path: Path | None = None
    dataset_path: Path | None = None
    region_table: Path = field(default_factory=lambda: default_data_path("regions.csv"))
    intensity_series: Path | None = None
    manufacturing_mix: Path = field(default_factory=lambda: default_data_path("manufacturing_mix.csv"))
    equivalences_table: Path = field(default_factory=lambda: default_data_path("equivalences.csv"))
    scenarios_file: Path = field(default_factory=lambda: default_data_path("scenarios.csv"))
    clone_sizes: Path | None = None
    machine: MachineProfile = DEFAULT_MACHINE
    baseline_metrics: UsageMetrics = DEFAULT_BASELINE_METRICS
    population_size: int | None = None
    population_sample_size: int | None = None
    population_successes: int | None = None
    confidence: float = 0.99
    year: int = 2024
    seed: int = 0
    target: int = 0
    workers: int = 4
    base_url: str = "https://api.github.com"
    max_requests_per_second: float = 10.0
    offline: bool = False
    inactivity_days: int = DEFAULT_INACTIVITY_DAYS
    collection_date: datetime | None = None
    checkout_time_share: float = DEFAULT_CHECKOUT_TIME_SHARE
    skip_fraction_limit: float = 0.01
    output_dir: Path = Path("cifp-out")

    def token(self) -> str | None:
        return os.environ.get(TOKEN_ENV_VAR) or None


_MACHINE_FIELDS = {f.name for f in fields(MachineProfile)}


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read the INI config (when given) and apply non-None overrides."""
    config = RunConfig()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        config.config_path = path
        _apply_ini(config, parser, path.parent)
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(config, key, value)
    return config


def _apply_ini(config: RunConfig, parser: configparser.ConfigParser, base_dir: Path) -> None:
    def path_of(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base_dir / p

    if parser.has_section("data"):
        section = parser["data"]
        for key, attr in (
            ("dataset", "dataset_path"),
            ("region_table", "region_table"),
            ("intensity_series", "intensity_series"),
            ("manufacturing_mix", "manufacturing_mix"),
            ("equivalences", "equivalences_table"),
            ("scenarios", "scenarios_file"),
            ("clone_sizes", "clone_sizes"),
        ):
            if key in section:
                setattr(config, attr, path_of(section[key]))
    if parser.has_section("machine"):
        values = {}
        for key, raw in parser["machine"].items():
            if key not in _MACHINE_FIELDS:
                raise ConfigError(f"unknown machine field {key!r}")
            values[key] = float(raw)
        base = {f.name: getattr(DEFAULT_MACHINE, f.name) for f in fields(MachineProfile)}
        base.update(values)
        for int_field in ("vcpu_count", "total_vcpus_on_host", "reserved_vcpus"):
            base[int_field] = int(base[int_field])
        try:
            config.machine = MachineProfile(**base)
        except ValueError as exc:
            raise ConfigError(f"bad machine profile: {exc}") from exc
    if parser.has_section("metrics"):
        section = parser["metrics"]
        try:
            config.baseline_metrics = UsageMetrics(
                avg_vcpus=section.getfloat("avg_vcpus", config.baseline_metrics.avg_vcpus),
                avg_memory_gb=section.getfloat("avg_memory_gb", config.baseline_metrics.avg_memory_gb),
                network_gb_per_job=section.getfloat(
                    "network_gb_per_job", config.baseline_metrics.network_gb_per_job
                ),
            )
        except ValueError as exc:
            raise ConfigError(f"bad metrics: {exc}") from exc
    if parser.has_section("population"):
        section = parser["population"]
        config.population_size = section.getint("size", fallback=None)
        config.population_sample_size = section.getint("sample_size", fallback=None)
        config.population_successes = section.getint("successes", fallback=None)
        config.confidence = section.getfloat("confidence", fallback=config.confidence)
    if parser.has_section("sampling"):
        section = parser["sampling"]
        config.year = section.getint("year", fallback=config.year)
        config.seed = section.getint("seed", fallback=config.seed)
        config.target = section.getint("target", fallback=config.target)
        config.workers = section.getint("workers", fallback=config.workers)
        config.base_url = section.get("base_url", fallback=config.base_url)
        config.max_requests_per_second = section.getfloat(
            "max_requests_per_second", fallback=config.max_requests_per_second
        )
    if parser.has_section("inactivity"):
        section = parser["inactivity"]
        config.inactivity_days = section.getint("days", fallback=config.inactivity_days)
        raw_date = section.get("collection_date", fallback=None)
        if raw_date:
            try:
                config.collection_date = parse_rfc3339(raw_date)
            except ValueError as exc:
                raise ConfigError(f"bad collection_date: {exc}") from exc
    if parser.has_section("checkout"):
        config.checkout_time_share = parser["checkout"].getfloat(
            "time_share", fallback=config.checkout_time_share
        )
    if parser.has_section("output"):
        section = parser["output"]
        if "directory" in section:
            config.output_dir = path_of(section["directory"])
        config.skip_fraction_limit = section.getfloat(
            "skip_fraction_limit", fallback=config.skip_fraction_limit
        )


@dataclass
class LoadedInputs:
    """Everything a compute command needs, parsed and validated."""

    dataset: Dataset
    grid: GridData
    scenario_specs: list[ScenarioSpec]
    equivalences: EquivalenceTable
    clone_sizes: dict[str, float | None] | None
    population: PopulationEstimate | None
    digests: dict[str, str]


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def build_inputs(config: RunConfig, need_dataset: bool = True) -> LoadedInputs:
    """Open and parse every referenced input, failing fast on any problem."""
    digests: dict[str, str] = {}

    def require(path: Path | None, what: str) -> Path:
        if path is None:
            raise ConfigError(f"missing required input: {what}")
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"{what} not found: {path}")
        digests[what] = _digest(path)
        return path

    try:
        dataset = Dataset.build()
        if need_dataset:
            dataset = load_dataset(require(config.dataset_path, "dataset"))
        grid = load_grid(
            require(config.region_table, "region_table"),
            require(config.intensity_series, "intensity_series"),
            require(config.manufacturing_mix, "manufacturing_mix"),
            machine=config.machine,
        )
        scenario_specs = load_scenarios(require(config.scenarios_file, "scenarios"))
        equivalences = load_equivalence_table(require(config.equivalences_table, "equivalences"))
        clone_sizes = None
        if config.clone_sizes is not None:
            clone_sizes = load_clone_sizes(require(config.clone_sizes, "clone_sizes"))
    except ConfigError:
        raise
    except CifpError as exc:
        raise ConfigError(f"input validation failed: {exc}") from exc

    for spec in scenario_specs:
        missing = [rid for rid in spec.region_ids if rid not in grid.regions]
        if missing:
            raise ConfigError(f"scenario {spec.name!r} references unknown regions {missing}")
        for rid in spec.region_ids:
            zone = grid.regions[rid].intensity_zone
            if zone not in grid.series:
                raise ConfigError(
                    f"scenario {spec.name!r}: region {rid!r} needs intensity zone {zone!r},"
                    " which the intensity file does not provide"
                )

    population = None
    if config.population_size is not None:
        if config.population_sample_size is None or config.population_successes is None:
            raise ConfigError("population extrapolation needs size, sample_size, and successes")
        try:
            population = PopulationEstimate.from_sample(
                population_size=config.population_size,
                sample_size=config.population_sample_size,
                successes=config.population_successes,
                confidence=config.confidence,
            )
        except ValueError as exc:
            raise ConfigError(f"bad population parameters: {exc}") from exc

    return LoadedInputs(
        dataset=dataset,
        grid=grid,
        scenario_specs=scenario_specs,
        equivalences=equivalences,
        clone_sizes=clone_sizes,
        population=population,
        digests=digests,
    )


# Filesystem locations vary across machines and runs; provenance identifies
# file inputs by content digest instead, so the hash skips path fields.
_PATH_FIELDS = {
    "config_path",
    "dataset_path",
    "region_table",
    "intensity_series",
    "manufacturing_mix",
    "equivalences_table",
    "scenarios_file",
    "clone_sizes",
    "output_dir",
}


def config_hash(config: RunConfig) -> str:
    """Stable digest of the resolved non-path configuration."""
    parts = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        if f.name in _PATH_FIELDS:
            continue
        value = getattr(config, f.name)
        parts.append(f"{f.name}={value!r}")
    return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()

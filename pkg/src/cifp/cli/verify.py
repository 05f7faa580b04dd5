"""Built-in oracle suite: hand-derived expected values re-checked at runtime.

Each check recomputes its expectation from first principles (independent
arithmetic, brute-force sums, linear-scan minima) and compares it against
the library path, so `cifp verify` doubles as an executable acceptance
sheet.
"""

from __future__ import annotations

import io
import math
from datetime import datetime, timedelta, timezone

from cifp.dataset.archive import load_dataset, store_dataset
from cifp.dataset.records import (
    TRIGGER_PUSH,
    TRIGGER_SCHEDULE,
    TRIGGER_WORKFLOW_DISPATCH,
    Dataset,
    RepositoryRecord,
    WorkflowJob,
    WorkflowRun,
    filter_jobs,
)
from cifp.dataset.telemetry import TelemetryTrace, summarize_telemetry
from cifp.energy import BASELINE, HIGH_USAGE, LOW_USAGE, UsageMetrics, cloud_energy
from cifp.errors import ArchiveError
from cifp.estimator.aggregate import repo_footprint
from cifp.estimator.equivalence import EquivalenceEntry, EquivalenceTable, equivalences
from cifp.estimator.population import PopulationEstimate, margin_of_error
from cifp.estimator.scenarios import Scenario, apply_setting
from cifp.footprint import (
    FootprintResult,
    embodied_emissions,
    embodied_water,
    job_footprint,
    offsite_water,
    onsite_water,
    operational_emissions,
)
from cifp.greening.checkout import checkout_emission_share
from cifp.greening.shifting import simulate_temporal_shift
from cifp.greening.waste import detect_inactive_scheduled_waste, fork_share, scheduled_share
from cifp.griddata import (
    AMERICAS,
    DEFAULT_MACHINE,
    CarbonIntensitySeries,
    GridData,
    ManufacturingMix,
    MixEntry,
    RegionProfile,
    daily_min_hour,
    intensity_at,
)

UTC = timezone.utc


def close(actual: float, expected: float, rel: float = 1e-9) -> bool:
    return math.isclose(actual, expected, rel_tol=rel, abs_tol=0.0 if expected else 1e-15)


def check(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def _hour(day: int, hour: int, minute: int = 0, second: int = 0) -> datetime:
    return datetime(2024, 3, day, hour, minute, second, tzinfo=UTC)


def _region(pue=1.17, wue=0.55, ewif=2.0, zone="Z") -> RegionProfile:
    return RegionProfile(
        region_id="test-region", geography=AMERICAS, pue=pue, wue=wue, ewif=ewif, intensity_zone=zone
    )


def _flat_series(value: float = 400.0, days: int = 2) -> CarbonIntensitySeries:
    start = datetime(2024, 3, 1, tzinfo=UTC)
    points = [(start + timedelta(hours=i), value) for i in range(24 * days)]
    return CarbonIntensitySeries.from_points("Z", points)


def _singleton_mix(intensity=500.0, ewif=2.0) -> ManufacturingMix:
    return ManufacturingMix(entries=(MixEntry("X", 0.5, intensity, ewif),))


BASE_METRICS = UsageMetrics(1.51, 1.78, 0.22)


def check_filter_mixed_batch() -> None:
    start = _hour(1, 10)
    jobs = [
        WorkflowJob(1, 1, start, None),
        WorkflowJob(2, 1, start, start - timedelta(seconds=1)),
        WorkflowJob(3, 1, start, start + timedelta(hours=8)),
        WorkflowJob(4, 1, start, start + timedelta(minutes=5)),
        WorkflowJob(5, 1, start, start + timedelta(hours=7)),
    ]
    kept = filter_jobs(jobs)
    check([j.job_id for j in kept] == [4, 5], f"expected jobs [4, 5], got {[j.job_id for j in kept]}")


def check_telemetry_hand_average() -> None:
    trace_a = TelemetryTrace.from_rows("a", [(0, 0.25, 1.0), (30, 0.75, 3.0)], 0.4)
    trace_b = TelemetryTrace.from_rows("b", [(0, 0.5, 2.0)], 0.2)
    metrics = summarize_telemetry([trace_a, trace_b], vcpu_count=4)
    # hand average: loads (0.25+0.75+0.5)/3*4, memory (1+3+2)/3, net (0.4+0.2)/2
    check(close(metrics.avg_vcpus, 2.0), f"avg_vcpus {metrics.avg_vcpus}")
    check(close(metrics.avg_memory_gb, 2.0), f"avg_memory_gb {metrics.avg_memory_gb}")
    check(close(metrics.network_gb_per_job, 0.3), f"network {metrics.network_gb_per_job}")


def check_archive_truncated_line() -> None:
    buffer = io.StringIO()
    store_dataset(
        Dataset.build(
            repositories=[RepositoryRecord(1, "o/r", False, False, None, _hour(1, 0), True)]
        ),
        buffer,
    )
    corrupt = buffer.getvalue().rstrip("\n")[:-10]
    try:
        load_dataset(io.StringIO(corrupt))
    except ArchiveError as exc:
        check(exc.line_no == 2, f"expected failure at line 2, got {exc.line_no}")
        return
    raise AssertionError("truncated archive should not parse")


def check_intensity_lookup() -> None:
    series = CarbonIntensitySeries.from_points(
        "Z", [(_hour(1, 10), 400.0), (_hour(1, 11), 350.0)]
    )
    check(close(intensity_at(series, _hour(1, 10, 59, 59)), 400.0), "bucket membership")
    check(close(intensity_at(series, _hour(1, 11)), 350.0), "hour boundary")
    gapped = CarbonIntensitySeries.from_points(
        "Z", [(_hour(1, 11), 350.0), (_hour(1, 13), 300.0)]
    )
    check(close(intensity_at(gapped, _hour(1, 12, 30)), 350.0), "gap falls back to 11:00")


def check_daily_min_tie() -> None:
    points = []
    for h in range(24):
        value = 210.0 if h in (2, 14) else 500.0
        points.append((_hour(1, h), value))
    series = CarbonIntensitySeries.from_points("Z", points)
    # linear-scan oracle
    oracle = min(points, key=lambda p: (p[1], p[0]))[0]
    got = daily_min_hour(series, _hour(1, 0))
    check(got == oracle == _hour(1, 2), f"expected 02:00, got {got}")


def check_weighted_mix() -> None:
    from cifp.griddata import weighted_manufacturing_factors

    mix = ManufacturingMix(
        entries=(MixEntry("A", 0.5, 100.0, 1.0), MixEntry("B", 0.5, 300.0, 3.0))
    )
    intensity, ewif = weighted_manufacturing_factors(mix)
    check(close(intensity, 200.0) and close(ewif, 2.0), f"got ({intensity}, {ewif})")


def check_energy_baseline() -> None:
    breakdown = cloud_energy(1.0, BASE_METRICS, DEFAULT_MACHINE)
    # independent evaluation of the four formulas
    expected_compute = 4.34e-4 * 4 + (1.948e-3 - 4.34e-4) * 1.51
    check(close(breakdown.compute_kwh, expected_compute), f"compute {breakdown.compute_kwh}")
    check(close(breakdown.compute_kwh, 4.02214e-3), "compute vs frozen value")
    check(close(breakdown.storage_kwh, 1.68e-5), f"storage {breakdown.storage_kwh}")
    check(close(breakdown.memory_kwh, 6.9776e-4), f"memory {breakdown.memory_kwh}")
    check(close(breakdown.network_kwh, 2.2e-4), f"network {breakdown.network_kwh}")
    check(close(breakdown.total_kwh, 4.9567e-3), f"total {breakdown.total_kwh}")
    idle_only = cloud_energy(1.0, UsageMetrics(0.0, 0.0, 0.0), DEFAULT_MACHINE)
    check(close(idle_only.compute_kwh, 1.736e-3), f"idle floor {idle_only.compute_kwh}")


def check_energy_low_usage_relation() -> None:
    halved = BASE_METRICS.scaled(0.5, LOW_USAGE)
    low = cloud_energy(1.0, halved, DEFAULT_MACHINE)
    base = cloud_energy(1.0, BASE_METRICS, DEFAULT_MACHINE)
    # halving usage halves only the dynamic terms; floor and storage fixed
    idle = DEFAULT_MACHINE.vcpu_min_kw * DEFAULT_MACHINE.vcpu_count
    expected = idle + base.storage_kwh + (base.total_kwh - idle - base.storage_kwh) / 2
    check(close(low.total_kwh, expected), f"low total {low.total_kwh} vs relation {expected}")
    check(close(low.total_kwh, 3.35475e-3, rel=1e-6), f"low total {low.total_kwh}")


def check_embodied() -> None:
    value = embodied_emissions(3600.0, DEFAULT_MACHINE)
    expected = 1.61079 * (3600.0 / 126_230_400.0) * (4.0 / 112.0)
    check(close(value, expected), f"embodied {value}")
    # 1.64066e-6 is the 6-significant-digit rendering of the exact value
    check(f"{value:.6g}" == "1.64066e-06", f"embodied vs frozen {value:.6g}")
    full_life = embodied_emissions(DEFAULT_MACHINE.lifespan_seconds, DEFAULT_MACHINE)
    check(close(full_life * 112 / 4, 1.61079), "full-lifespan proportionality")


def check_carbon_and_water() -> None:
    region = _region()
    series = _flat_series(400.0)
    energy = cloud_energy(1.0, BASE_METRICS, DEFAULT_MACHINE)
    operational = operational_emissions(energy, region, series, _hour(1, 10))
    check(close(operational, 1.17 * 400 * 4.9567e-3 / 1e6), f"operational {operational}")
    check(close(offsite_water(energy, region), 4.9567e-3 * 1.17 * 2.0), "offsite")
    check(close(onsite_water(energy, region), 4.9567e-3 * 0.55), "onsite")
    emb_carbon = embodied_emissions(3600.0, DEFAULT_MACHINE)
    emb_water = embodied_water(emb_carbon, _singleton_mix())
    check(close(emb_water, emb_carbon * 1e6 / 500.0 * 2.0), f"embodied water {emb_water}")


def check_job_footprint_sums() -> None:
    region = _region()
    series = _flat_series(400.0)
    mix = _singleton_mix()
    job = WorkflowJob(1, 1, _hour(1, 10), _hour(1, 11))
    result = job_footprint(job, BASE_METRICS, DEFAULT_MACHINE, region, series, mix)
    # totals must equal the independently computed component sums
    operational = 1.17 * 400 * 4.9567e-3 / 1e6
    embodied = 1.61079 * (3600.0 / 126_230_400.0) * (4.0 / 112.0)
    water = 4.9567e-3 * 1.17 * 2.0 + 4.9567e-3 * 0.55 + embodied * 1e6 / 500.0 * 2.0
    check(close(result.total_carbon_mtco2e, operational + embodied), "carbon total")
    check(close(result.total_carbon_mtco2e, 3.96040e-6, rel=1e-5), "carbon vs frozen")
    check(close(result.total_water_l, water), f"water total {result.total_water_l}")


def check_repo_footprint_brute_force() -> None:
    region = _region()
    series = _flat_series(400.0)
    mix = _singleton_mix()
    grid = GridData(regions={region.region_id: region}, series={"Z": series}, mix=mix)
    scenario = Scenario.build("s", [region], BASELINE, BASE_METRICS, DEFAULT_MACHINE.vcpu_count)
    jobs = [
        WorkflowJob(i, i, _hour(1, 9 + i), _hour(1, 9 + i) + timedelta(minutes=10 * i))
        for i in (1, 2, 3)
    ]
    runs = {i: WorkflowRun(i, 7, TRIGGER_PUSH, _hour(1, 9 + i)) for i in (1, 2, 3)}
    total = repo_footprint(jobs, scenario, grid, runs)
    brute = FootprintResult.sum(
        job_footprint(job, BASE_METRICS, DEFAULT_MACHINE, region, series, mix, runs[job.job_id].created_at)
        for job in jobs
    )
    check(close(total.total_carbon_mtco2e, brute.total_carbon_mtco2e), "carbon sum")
    check(close(total.total_water_l, brute.total_water_l), "water sum")


def check_apply_setting() -> None:
    high = apply_setting(BASE_METRICS, HIGH_USAGE, vcpu_count=4)
    check(
        close(high.avg_vcpus, 3.02) and close(high.avg_memory_gb, 3.56) and close(high.network_gb_per_job, 0.44),
        f"high transform {high}",
    )
    unchanged = apply_setting(BASE_METRICS, BASELINE, vcpu_count=4)
    check(unchanged == BASE_METRICS, "baseline must be identity")
    clamped = apply_setting(UsageMetrics(3.0, 1.0, 1.0), HIGH_USAGE, vcpu_count=4)
    check(close(clamped.avg_vcpus, 4.0), f"clamp {clamped.avg_vcpus}")


def check_margin_of_error() -> None:
    n, population = 1_646_552, 910_652_743
    first = margin_of_error(n, population, 626_637, 0.99) * 100
    second = margin_of_error(n, population, 20_001, 0.99) * 100
    check(abs(first - 0.097) <= 0.001, f"first margin {first}%")
    check(abs(second - 0.022) <= 0.001, f"second margin {second}%")
    census = margin_of_error(100, 100, 37, 0.99)
    check(census == 0.0, "census margin must vanish")


def check_extrapolation() -> None:
    estimate = PopulationEstimate.from_sample(910_652_743, 1_646_552, 20_001)
    check(estimate.extrapolated_count == 11_061_883, f"count {estimate.extrapolated_count}")
    low = 1.36e-5 * estimate.extrapolated_count
    check(abs(low - 150.5) / 150.5 <= 0.01, f"low-end total {low}")
    likely = 4.13e-5 * estimate.extrapolated_count
    check(abs(likely - 456.9) <= 0.5, f"most-likely total {likely}")


def check_equivalences() -> None:
    table = EquivalenceTable(
        entries=(
            EquivalenceEntry("trees", 0.060, "MTCO2e", "epa"),
            EquivalenceEntry("glasses", 0.25, "L", "derived"),
        )
    )
    result = FootprintResult(
        operational_carbon_mtco2e=456.9,
        embodied_carbon_mtco2e=0.0,
        offsite_water_l=5_738_200.0,
        onsite_water_l=0.0,
        embodied_water_l=0.0,
    )
    counts = dict(equivalences(result, table))
    check(counts["trees"] == 7615, f"trees {counts['trees']}")
    check(counts["glasses"] == 22_952_800, f"glasses {counts['glasses']}")


def _waste_fixture() -> Dataset:
    collected = _hour(20, 0)
    repos = [
        RepositoryRecord(1, "o/base", False, False, _hour(19, 0), collected, True),
        RepositoryRecord(2, "o/fork", True, False, _hour(19, 0), collected, True),
        RepositoryRecord(3, "o/stale", False, False, datetime(2023, 11, 1, tzinfo=UTC), collected, True),
    ]

    def run_and_job(run_id, repo_id, trigger, start_hour, hours):
        run = WorkflowRun(run_id, repo_id, trigger, start_hour)
        job = WorkflowJob(run_id, run_id, start_hour, start_hour + timedelta(hours=hours))
        return run, job

    spec = [
        # repo 1: plain pushes, 8.28h
        (1, 1, TRIGGER_PUSH, _hour(1, 1), 5.0),
        (2, 1, TRIGGER_PUSH, _hour(2, 1), 3.28),
        # repo 2 (fork): 7.54h total, 4.64h scheduled
        (3, 2, TRIGGER_SCHEDULE, _hour(3, 1), 4.64),
        (4, 2, TRIGGER_PUSH, _hour(4, 1), 2.9),
        # repo 3 (inactive since 2023-11): scheduled plus a manual trigger
        (5, 3, TRIGGER_SCHEDULE, _hour(5, 1), 2.18),
        (6, 3, TRIGGER_WORKFLOW_DISPATCH, _hour(5, 6), 2.0),
    ]
    runs, jobs = [], []
    for args in spec:
        run, job = run_and_job(*args)
        runs.append(run)
        jobs.append(job)
    return Dataset.build(repos, runs, jobs)


def check_scheduled_share() -> None:
    dataset = _waste_fixture()
    share = scheduled_share(dataset)
    check(close(share, 6.82 / 20.0, rel=1e-9), f"scheduled share {share}")
    # hand-built 30% fixture: 3 of 10 two-hour jobs are scheduled
    start = _hour(1, 1)
    runs = [WorkflowRun(i, 1, TRIGGER_SCHEDULE if i <= 3 else TRIGGER_PUSH, start) for i in range(1, 11)]
    jobs = [WorkflowJob(i, i, start, start + timedelta(hours=2)) for i in range(1, 11)]
    dataset2 = Dataset.build([], runs, jobs)
    check(close(scheduled_share(dataset2), 0.30), "30% fixture")


def check_inactive_share() -> None:
    collected = _hour(20, 0)
    repos = [
        RepositoryRecord(1, "o/live", False, False, _hour(19, 0), collected, True),
        RepositoryRecord(2, "o/stale", False, False, datetime(2023, 11, 1, tzinfo=UTC), collected, True),
    ]
    runs = [
        WorkflowRun(1, 1, TRIGGER_SCHEDULE, _hour(1, 1)),
        WorkflowRun(2, 1, TRIGGER_SCHEDULE, _hour(2, 1)),
        WorkflowRun(3, 1, TRIGGER_SCHEDULE, _hour(3, 1)),
        WorkflowRun(4, 2, TRIGGER_SCHEDULE, _hour(5, 1)),
    ]
    # live repo holds 17.82h of scheduled time, the stale one 2.18h of 20h
    jobs = [
        WorkflowJob(1, 1, _hour(1, 1), _hour(1, 1) + timedelta(hours=6)),
        WorkflowJob(2, 2, _hour(2, 1), _hour(2, 1) + timedelta(hours=6)),
        WorkflowJob(3, 3, _hour(3, 1), _hour(3, 1) + timedelta(hours=5.82)),
        WorkflowJob(4, 4, _hour(5, 1), _hour(5, 1) + timedelta(hours=2.18)),
    ]
    dataset = Dataset.build(repos, runs, jobs)
    report = detect_inactive_scheduled_waste(dataset, collection_date=collected)
    check(report.flagged_repo_ids == (2,), f"flagged {report.flagged_repo_ids}")
    check(close(report.scheduled_time_fraction, 0.109, rel=1e-6), f"fraction {report.scheduled_time_fraction}")


def check_fork_share() -> None:
    dataset = _waste_fixture()
    shares = fork_share(dataset)
    check(close(shares.fork_time_fraction, 7.54 / 20.0), f"fork time {shares.fork_time_fraction}")
    check(
        close(shares.scheduled_fraction_within_forks, 4.64 / 7.54),
        f"scheduled within forks {shares.scheduled_fraction_within_forks}",
    )


def check_shift_linearity() -> None:
    region = _region()
    points = [(_hour(1, h), 100.0 if h == 3 else 500.0) for h in range(24)]
    series = CarbonIntensitySeries.from_points("Z", points)
    grid = GridData(regions={region.region_id: region}, series={"Z": series}, mix=_singleton_mix())
    scenario = Scenario.build("s", [region], BASELINE, BASE_METRICS, 4)
    run = WorkflowRun(1, 1, TRIGGER_SCHEDULE, _hour(1, 10))
    job = WorkflowJob(1, 1, _hour(1, 10), _hour(1, 11))
    plan = simulate_temporal_shift(Dataset.build([], [run], [job]), scenario, grid)
    check(
        close(plan.shifted_operational_mtco2e, plan.baseline_operational_mtco2e * 0.2),
        f"shift ratio {plan.shifted_operational_mtco2e / plan.baseline_operational_mtco2e}",
    )
    flat_grid = GridData(regions={region.region_id: region}, series={"Z": _flat_series()}, mix=_singleton_mix())
    flat_plan = simulate_temporal_shift(Dataset.build([], [run], [job]), scenario, flat_grid)
    check(flat_plan.moves == () and close(flat_plan.reduction_fraction, 0.0), "flat day is identity")


def check_checkout_arithmetic() -> None:
    avg = 42_347.3 / 1_823_639
    check(abs(avg - 0.0232) < 0.0001, f"avg {avg}")
    extrapolated = avg * 2_107_125
    check(abs(extrapolated - 48_930.2) / 48_930.2 <= 0.001, f"extrapolated {extrapolated}")
    share = checkout_emission_share(
        time_share=0.122,
        network_share=0.081,
        network_fraction=0.348,
        nonnetwork_operational_fraction=(1 - 0.348) / 2,
    )
    check(abs(share - 0.068) <= 0.001, f"emission share {share}")


CHECKS = [
    ("filter_jobs mixed batch", check_filter_mixed_batch),
    ("telemetry hand average", check_telemetry_hand_average),
    ("archive truncated line", check_archive_truncated_line),
    ("intensity lookup + gap fallback", check_intensity_lookup),
    ("daily minimum tie-break", check_daily_min_tie),
    ("weighted manufacturing mix", check_weighted_mix),
    ("energy baseline components", check_energy_baseline),
    ("energy low-usage relation", check_energy_low_usage_relation),
    ("embodied emissions", check_embodied),
    ("carbon and water conversions", check_carbon_and_water),
    ("job footprint additivity", check_job_footprint_sums),
    ("repo footprint brute force", check_repo_footprint_brute_force),
    ("usage setting transforms", check_apply_setting),
    ("margin of error", check_margin_of_error),
    ("ecosystem extrapolation", check_extrapolation),
    ("equivalence counts", check_equivalences),
    ("scheduled share", check_scheduled_share),
    ("inactive scheduled waste", check_inactive_share),
    ("fork share", check_fork_share),
    ("temporal shift linearity", check_shift_linearity),
    ("checkout arithmetic", check_checkout_arithmetic),
]


def run_all(out=print) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, func in CHECKS:
        try:
            func()
        except AssertionError as exc:
            failures += 1
            out(f"FAIL {name}: {exc}")
        except Exception as exc:  # defensive: a crash is a failure, not an abort
            failures += 1
            out(f"FAIL {name}: unexpected {type(exc).__name__}: {exc}")
        else:
            out(f"PASS {name}")
    out(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures

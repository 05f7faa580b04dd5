"""cifp command line: sample, fetch, footprint, greening, verify."""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

from cifp.cli.config import RunConfig, build_inputs, config_hash, load_config
from cifp.cli.reports import provenance_lines, write_report
from cifp.cli.verify import run_all
from cifp.dataset.archive import load_dataset, store_dataset
from cifp.dataset.github import GithubProbe, TOKEN_ENV_VAR
from cifp.dataset.records import Dataset
from cifp.dataset.sampling import fetch_many, resolve_population_size, sample_repositories
from cifp.energy import BASELINE
from cifp.errors import CifpError, ConfigError, EmptyDataError
from cifp.estimator.aggregate import (
    DatasetEvaluation,
    evaluate_dataset,
    extrapolate_ecosystem,
    sample_mean_footprint,
    scenario_embodied,
)
from cifp.estimator.equivalence import UNIT_CARBON, equivalences
from cifp.estimator.scenarios import Scenario
from cifp.footprint import FootprintResult
from cifp.greening.checkout import checkout_attribution
from cifp.greening.shifting import simulate_temporal_shift
from cifp.greening.waste import detect_inactive_scheduled_waste, fork_share, scheduled_share
from cifp.griddata import format_rfc3339, parse_rfc3339

log = logging.getLogger(__name__)

FOOTPRINT_COLUMNS = (
    "operational_carbon_mtco2e",
    "embodied_carbon_mtco2e",
    "total_carbon_mtco2e",
    "offsite_water_l",
    "onsite_water_l",
    "embodied_water_l",
    "total_water_l",
    "total_water_kl",
)


def _footprint_cells(result: FootprintResult) -> list:
    return [
        result.operational_carbon_mtco2e,
        result.embodied_carbon_mtco2e,
        result.total_carbon_mtco2e,
        result.offsite_water_l,
        result.onsite_water_l,
        result.embodied_water_l,
        result.total_water_l,
        result.total_water_l / 1000.0,
    ]


def _require_token(config: RunConfig) -> str | None:
    if config.offline:
        return config.token()
    token = config.token()
    if token is None:
        raise ConfigError(
            f"no API token: set {TOKEN_ENV_VAR} or pass --offline with a mock endpoint"
        )
    return token


def _probe(config: RunConfig) -> GithubProbe:
    return GithubProbe(
        token=_require_token(config),
        base_url=config.base_url,
        max_requests_per_second=config.max_requests_per_second,
    )


def cmd_sample(args) -> int:
    config = load_config(
        args.config,
        {
            "year": args.year,
            "seed": args.seed,
            "target": args.target,
            "base_url": args.base_url,
            "offline": True if args.offline else None,
            "population_size": args.population,
            "output_dir": args.out_dir,
        },
    )
    probe = _probe(config)
    population = config.population_size
    if population is None:
        population = resolve_population_size(probe)
    collected_at = parse_rfc3339(args.collected_at) if args.collected_at else None
    result = sample_repositories(
        population_size=population,
        target_using_actions=config.target,
        seed=config.seed,
        probe=probe,
        year=config.year,
        collected_at=collected_at,
        max_draws=args.max_draws,
    )
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    archive_path = Path(args.out) if args.out else out_dir / "sample.jsonl"
    store_dataset(Dataset.build(repositories=result.records), archive_path)
    prov = provenance_lines(config_hash(config), {})
    write_report(
        out_dir / "sample_summary.csv",
        prov,
        ("population_size", "total_drawn", "public_active", "using_actions", "draw_seed", "year"),
        [
            (
                population,
                result.summary.total_drawn,
                result.summary.public_active,
                result.summary.using_actions,
                result.summary.draw_seed,
                config.year,
            )
        ],
    )
    print(
        f"sampled {result.summary.total_drawn} ids: {result.summary.public_active} public+active, "
        f"{result.summary.using_actions} using actions -> {archive_path}"
    )
    return 0


def cmd_fetch(args) -> int:
    config = load_config(
        args.config,
        {
            "year": args.year,
            "base_url": args.base_url,
            "offline": True if args.offline else None,
            "workers": args.workers,
            "dataset_path": args.dataset,
            "output_dir": args.out_dir,
        },
    )
    if config.dataset_path is None:
        raise ConfigError("fetch needs --dataset (a sample archive)")
    sample = load_dataset(config.dataset_path)
    probe = _probe(config)
    targets = [repo for repo in sample.repositories if repo.uses_actions_in_year]
    results = fetch_many(targets, config.year, probe, workers=config.workers)
    runs, jobs, unretrievable = [], [], []
    for repo_data in results:
        if repo_data.unretrievable:
            unretrievable.append(repo_data.repo_id)
            continue
        runs.extend(repo_data.runs)
        jobs.extend(repo_data.jobs)
    merged = Dataset.build(sample.repositories, runs, jobs, unretrievable)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    archive_path = Path(args.out) if args.out else out_dir / "dataset.jsonl"
    store_dataset(merged, archive_path)
    print(
        f"fetched {len(runs)} runs / {len(jobs)} jobs from {len(targets)} repositories "
        f"({len(unretrievable)} unretrievable) -> {archive_path}"
    )
    return 0


def _scenario_of_region(region, config: RunConfig) -> Scenario:
    return Scenario.build(
        name=region.region_id,
        regions=[region],
        setting=BASELINE,
        baseline_metrics=config.baseline_metrics,
        vcpu_count=config.machine.vcpu_count,
    )


def cmd_footprint(args) -> int:
    config = load_config(
        args.config,
        {
            "dataset_path": args.dataset,
            "intensity_series": args.intensity,
            "region_table": args.regions,
            "manufacturing_mix": args.mix,
            "scenarios_file": args.scenarios,
            "equivalences_table": args.equivalences,
            "skip_fraction_limit": args.skip_limit,
            "output_dir": args.out_dir,
        },
    )
    inputs = build_inputs(config)
    prov = provenance_lines(config_hash(config), inputs.digests)
    dataset, grid = inputs.dataset, inputs.grid
    out_dir = Path(config.output_dir)

    worst_skip = 0.0
    skipped_rows: list[tuple] = []

    def account(evaluation: DatasetEvaluation) -> DatasetEvaluation:
        nonlocal worst_skip
        worst_skip = max(worst_skip, evaluation.skipped_time_fraction)
        for job_id in evaluation.skipped_job_ids:
            skipped_rows.append((evaluation.scenario_name, job_id))
        return evaluation

    # Region sweep: every region with intensity coverage, baseline setting.
    region_rows = []
    carbon_plot_rows = []
    water_plot_rows = []
    tree_entry = next((e for e in inputs.equivalences.entries if e.unit == UNIT_CARBON), None)
    uncovered = []
    for region_id, region in grid.regions.items():
        if region.intensity_zone not in grid.series:
            uncovered.append(region_id)
            continue
        evaluation = account(evaluate_dataset(dataset, _scenario_of_region(region, config), grid))
        total = evaluation.total
        scarcity = (
            total.total_water_l * region.water_scarcity_factor
            if region.water_scarcity_factor is not None
            else None
        )
        region_rows.append(
            [region_id, region.geography, BASELINE]
            + _footprint_cells(total)
            + [scarcity, evaluation.skipped_job_seconds]
        )
        carbon_plot_rows.append(
            (
                region_id,
                total.total_carbon_mtco2e,
                tree_entry.label if tree_entry else None,
                int(total.total_carbon_mtco2e / tree_entry.unit_amount) if tree_entry else None,
            )
        )
        water_plot_rows.append(
            (
                region_id,
                total.total_water_l / 1000.0,
                scarcity / 1000.0 if scarcity is not None else None,
            )
        )
    if uncovered:
        log.warning("regions without intensity coverage skipped from sweep: %s", ", ".join(uncovered))

    # Scenario file rows (settings variants, multi-region averages).
    scenario_rows = []
    equivalence_rows = []
    ecosystem_rows = []
    for spec in inputs.scenario_specs:
        scenario = spec.resolve(grid.regions, config.baseline_metrics, config.machine.vcpu_count)
        evaluation = account(evaluate_dataset(dataset, scenario, grid))
        scenario_rows.append(
            [spec.name, spec.setting, ";".join(spec.region_ids)]
            + _footprint_cells(evaluation.total)
            + [evaluation.skipped_job_seconds]
        )
        basis_result = evaluation.total
        basis = "dataset"
        if inputs.population is not None:
            try:
                mean = sample_mean_footprint(dataset, evaluation)
            except EmptyDataError:
                log.warning("no sample basis repositories; ecosystem extrapolation skipped")
            else:
                ecosystem = extrapolate_ecosystem(mean, inputs.population)
                basis_result = ecosystem
                basis = "ecosystem"
                ecosystem_rows.append(
                    [
                        spec.name,
                        spec.setting,
                        len(dataset.sample_basis_repo_ids()),
                        inputs.population.extrapolated_count,
                    ]
                    + _footprint_cells(ecosystem)
                )
        for label, count in equivalences(basis_result, inputs.equivalences):
            entry = next(e for e in inputs.equivalences.entries if e.label == label)
            equivalence_rows.append((spec.name, basis, label, entry.unit, count))

    write_report(
        out_dir / "region_footprints.csv",
        prov,
        ("region_id", "geography", "setting")
        + FOOTPRINT_COLUMNS
        + ("scarcity_adjusted_water_l", "skipped_job_seconds"),
        region_rows,
    )
    write_report(
        out_dir / "scenario_footprints.csv",
        prov,
        ("scenario", "setting", "regions") + FOOTPRINT_COLUMNS + ("skipped_job_seconds",),
        scenario_rows,
    )
    write_report(
        out_dir / "equivalences.csv",
        prov,
        ("scenario", "basis", "label", "unit", "count"),
        equivalence_rows,
    )
    write_report(
        out_dir / "plot_carbon_by_region.csv",
        prov,
        ("region_id", "total_carbon_mtco2e", "equivalence_label", "equivalence_count"),
        carbon_plot_rows,
    )
    write_report(
        out_dir / "plot_water_by_region.csv",
        prov,
        ("region_id", "total_water_kl", "scarcity_adjusted_water_kl"),
        water_plot_rows,
    )
    if inputs.population is not None:
        pop = inputs.population
        write_report(
            out_dir / "population.csv",
            prov,
            (
                "population_size",
                "sample_size",
                "successes",
                "proportion",
                "confidence",
                "margin_of_error",
                "margin_of_error_pct",
                "extrapolated_count",
            ),
            [
                (
                    pop.population_size,
                    pop.sample_size,
                    pop.successes,
                    pop.proportion,
                    pop.confidence,
                    pop.margin_of_error,
                    pop.margin_of_error * 100.0,
                    pop.extrapolated_count,
                )
            ],
        )
        write_report(
            out_dir / "ecosystem_footprints.csv",
            prov,
            ("scenario", "setting", "sample_repos", "extrapolated_repos") + FOOTPRINT_COLUMNS,
            ecosystem_rows,
        )
    write_report(out_dir / "skipped_jobs.csv", prov, ("context", "job_id"), skipped_rows)

    print(f"wrote footprint reports for {len(region_rows)} regions and {len(scenario_rows)} scenarios to {out_dir}")
    if worst_skip > config.skip_fraction_limit:
        print(
            f"error: {worst_skip:.2%} of job time skipped due to coverage gaps "
            f"(limit {config.skip_fraction_limit:.2%})",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_greening(args) -> int:
    config = load_config(
        args.config,
        {
            "dataset_path": args.dataset,
            "intensity_series": args.intensity,
            "region_table": args.regions,
            "manufacturing_mix": args.mix,
            "scenarios_file": args.scenarios,
            "clone_sizes": args.clone_sizes,
            "collection_date": parse_rfc3339(args.collection_date) if args.collection_date else None,
            "output_dir": args.out_dir,
        },
    )
    inputs = build_inputs(config)
    prov = provenance_lines(config_hash(config), inputs.digests)
    dataset, grid = inputs.dataset, inputs.grid
    out_dir = Path(config.output_dir)

    specs = inputs.scenario_specs
    if args.scenario:
        specs = [spec for spec in specs if spec.name == args.scenario]
        if not specs:
            raise ConfigError(f"scenario {args.scenario!r} not found in scenario file")
    spec = specs[0]
    scenario = spec.resolve(grid.regions, config.baseline_metrics, config.machine.vcpu_count)

    metrics: list[tuple[str, object]] = [("scenario", spec.name), ("setting", spec.setting)]

    try:
        metrics.append(("scheduled_time_share", scheduled_share(dataset)))
    except EmptyDataError:
        metrics.append(("scheduled_time_share", None))

    shares = fork_share(dataset)
    metrics.append(("fork_time_share", shares.fork_time_fraction))
    metrics.append(("scheduled_share_within_forks", shares.scheduled_fraction_within_forks))

    collection_date = config.collection_date
    if collection_date is None:
        collected = [repo.collected_at for repo in dataset.repositories]
        collection_date = max(collected) if collected else None
    if collection_date is not None:
        report = detect_inactive_scheduled_waste(dataset, collection_date, config.inactivity_days)
        metrics.append(("inactive_scheduled_share", report.scheduled_time_fraction))
        metrics.append(("inactive_flagged_repos", len(report.flagged_repo_ids)))
        metrics.append(("inactive_unknown_repos", len(report.unknown_repo_ids)))
        metrics.append(("collection_date", format_rfc3339(collection_date)))
    else:
        metrics.append(("inactive_scheduled_share", None))

    plan = simulate_temporal_shift(dataset, scenario, grid)
    metrics.append(("shift_baseline_operational_mtco2e", plan.baseline_operational_mtco2e))
    metrics.append(("shift_shifted_operational_mtco2e", plan.shifted_operational_mtco2e))
    metrics.append(("shift_reduction_fraction_operational", plan.reduction_fraction))
    skipped_runs = set(plan.skipped_run_ids)
    embodied_total = 0.0
    for job in dataset.filtered_jobs():
        if job.run_id in skipped_runs:
            continue
        embodied_total += scenario_embodied(job, grid)[0]
    total_carbon = plan.baseline_operational_mtco2e + embodied_total
    reduction_vs_total = (
        (plan.baseline_operational_mtco2e - plan.shifted_operational_mtco2e) / total_carbon
        if total_carbon > 0
        else 0.0
    )
    metrics.append(("shift_reduction_fraction_total_carbon", reduction_vs_total))
    metrics.append(("shift_moves", len(plan.moves)))
    metrics.append(("shift_skipped_runs", len(plan.skipped_run_ids)))

    write_report(
        out_dir / "shift_plan.csv",
        prov,
        ("run_id", "original_hour", "target_hour", "baseline_g", "shifted_g"),
        [
            (
                move.run_id,
                format_rfc3339(move.original_hour),
                format_rfc3339(move.target_hour),
                move.baseline_g,
                move.shifted_g,
            )
            for move in plan.moves
        ],
    )

    if inputs.clone_sizes is None:
        metrics.append(("checkout_status", "unavailable: no clone-size file supplied"))
    else:
        try:
            stats = checkout_attribution(
                dataset, inputs.clone_sizes, scenario, grid, time_share=config.checkout_time_share
            )
        except EmptyDataError as exc:
            metrics.append(("checkout_status", f"insufficient data: {exc}"))
        else:
            metrics.append(("checkout_status", "ok"))
            write_report(
                out_dir / "checkout.csv",
                prov,
                (
                    "checkout_executions",
                    "measured_executions",
                    "repos_measured",
                    "total_clone_gb",
                    "avg_gb_per_checkout",
                    "extrapolated_total_gb",
                    "network_share",
                    "time_share",
                    "emission_share",
                ),
                [
                    (
                        stats.checkout_executions,
                        stats.measured_executions,
                        stats.repos_measured,
                        stats.total_clone_gb,
                        stats.avg_gb_per_checkout,
                        stats.extrapolated_total_gb,
                        stats.network_share,
                        config.checkout_time_share,
                        stats.emission_share,
                    )
                ],
            )

    write_report(out_dir / "greening_summary.csv", prov, ("metric", "value"), metrics)
    print(f"wrote greening reports to {out_dir}")
    return 0


def cmd_verify(args) -> int:
    failures = run_all()
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cifp",
        description="Estimate carbon and water footprints of CI/CD workflow runs.",
    )
    parser.add_argument("--config", type=Path, default=None, help="INI config file")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="randomly sample the repository population")
    p.add_argument("--year", type=int, default=None)
    p.add_argument("--target", type=int, default=None, help="actions-using repositories to collect")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--population", type=int, default=None, help="population size override (skips probe)")
    p.add_argument("--base-url", default=None)
    p.add_argument("--offline", action="store_true", help="skip the token requirement (mock endpoints)")
    p.add_argument("--max-draws", type=int, default=None)
    p.add_argument("--collected-at", default=None, help="pin the collection timestamp (RFC 3339)")
    p.add_argument("--out", type=Path, default=None, help="sample archive path")
    p.add_argument("--out-dir", type=Path, default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fetch", help="fetch workflow runs and jobs for a sample archive")
    p.add_argument("--dataset", type=Path, default=None, help="sample archive from `cifp sample`")
    p.add_argument("--year", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--base-url", default=None)
    p.add_argument("--offline", action="store_true")
    p.add_argument("--out", type=Path, default=None, help="merged dataset archive path")
    p.add_argument("--out-dir", type=Path, default=None)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("footprint", help="region sweep, scenario totals, equivalences")
    _add_compute_args(p)
    p.add_argument("--equivalences", type=Path, default=None)
    p.add_argument("--skip-limit", type=float, default=None, help="max tolerated skipped job-time fraction")
    p.set_defaults(func=cmd_footprint)

    p = sub.add_parser("greening", help="waste shares, temporal shifting, checkout attribution")
    _add_compute_args(p)
    p.add_argument("--scenario", default=None, help="scenario name (default: first in file)")
    p.add_argument("--clone-sizes", type=Path, default=None)
    p.add_argument("--collection-date", default=None, help="RFC 3339 collection timestamp")
    p.set_defaults(func=cmd_greening)

    p = sub.add_parser("verify", help="run the built-in oracle suite")
    p.set_defaults(func=cmd_verify)

    return parser


def _add_compute_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", type=Path, default=None)
    p.add_argument("--intensity", type=Path, default=None, help="hourly intensity CSV")
    p.add_argument("--regions", type=Path, default=None, help="region table CSV")
    p.add_argument("--mix", type=Path, default=None, help="manufacturing mix CSV")
    p.add_argument("--scenarios", type=Path, default=None, help="scenario list CSV")
    p.add_argument("--out-dir", type=Path, default=None)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CifpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

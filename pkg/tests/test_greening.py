"""Waste shares, temporal shifting, checkout attribution."""

import io
import random
from datetime import timedelta

import pytest

from conftest import hour, make_job, make_run, make_series
from cifp.dataset.records import (
    TRIGGER_PUSH,
    TRIGGER_SCHEDULE,
    TRIGGER_WORKFLOW_DISPATCH,
    Dataset,
    RepositoryRecord,
)
from cifp.energy import BASELINE, UsageMetrics
from cifp.errors import EmptyDataError, TableError
from cifp.estimator import Scenario, operational_factor, scenario_energy_components
from cifp.greening import (
    checkout_attribution,
    checkout_emission_share,
    detect_inactive_scheduled_waste,
    export_shift_plan,
    fork_share,
    load_clone_sizes,
    scheduled_share,
    simulate_temporal_shift,
)
from cifp.griddata import CarbonIntensitySeries, GridData

COLLECTED = hour(20, 0)


def repo(repo_id, fork=False, last_push=None, uses=True):
    return RepositoryRecord(repo_id, f"o/r{repo_id}", fork, False, last_push, COLLECTED, uses)


def _scenario(region, metrics, setting=BASELINE):
    return Scenario.build("s", [region], setting, metrics, 4)


class TestScheduledShare:
    def test_all_scheduled(self):
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 1))]
        jobs = [make_job(1, 1, hour(1, 1), 60)]
        assert scheduled_share(Dataset.build([], runs, jobs)) == 1.0

    def test_none_scheduled(self):
        runs = [make_run(1, 1, TRIGGER_PUSH, hour(1, 1))]
        jobs = [make_job(1, 1, hour(1, 1), 60)]
        assert scheduled_share(Dataset.build([], runs, jobs)) == 0.0

    def test_hand_summed_thirty_percent(self):
        # 10 jobs of 2h each; jobs 1-3 are scheduled: 6h of 20h
        runs = [
            make_run(i, 1, TRIGGER_SCHEDULE if i <= 3 else TRIGGER_PUSH, hour(1, 1))
            for i in range(1, 11)
        ]
        jobs = [make_job(i, i, hour(1, 1), 120) for i in range(1, 11)]
        assert scheduled_share(Dataset.build([], runs, jobs)) == pytest.approx(0.30)

    def test_zero_total_duration_errors(self):
        with pytest.raises(EmptyDataError):
            scheduled_share(Dataset.build())

    def test_shares_sum_to_one(self):
        runs = [
            make_run(i, 1, TRIGGER_SCHEDULE if i % 2 else TRIGGER_PUSH, hour(1, 1))
            for i in range(1, 8)
        ]
        jobs = [make_job(i, i, hour(1, 1), 17 * i) for i in range(1, 8)]
        dataset = Dataset.build([], runs, jobs)
        share = scheduled_share(dataset)
        total = sum(j.duration_seconds() for j in jobs)
        non_scheduled = sum(
            j.duration_seconds() for j in jobs if not dataset.runs_by_id[j.run_id].is_scheduled
        )
        assert share + non_scheduled / total == pytest.approx(1.0, rel=1e-15)


class TestInactivity:
    def test_pushed_100_days_before_flagged(self):
        stale = repo(1, last_push=hour(5, 0) - timedelta(days=100))
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(5, 0))]
        jobs = [make_job(1, 1, hour(5, 0), 60)]
        report = detect_inactive_scheduled_waste(Dataset.build([stale], runs, jobs), COLLECTED)
        assert report.flagged_repo_ids == (1,)
        assert report.scheduled_time_fraction == 1.0

    def test_pushed_5_days_before_not_flagged(self):
        fresh = repo(1, last_push=hour(5, 0) - timedelta(days=5))
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(5, 0))]
        jobs = [make_job(1, 1, hour(5, 0), 60)]
        report = detect_inactive_scheduled_waste(Dataset.build([fresh], runs, jobs), COLLECTED)
        assert report.flagged_repo_ids == ()
        assert report.scheduled_time_fraction == 0.0

    def test_missing_push_goes_to_unknown(self):
        unknown = repo(1, last_push=None)
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(5, 0))]
        jobs = [make_job(1, 1, hour(5, 0), 60)]
        report = detect_inactive_scheduled_waste(Dataset.build([unknown], runs, jobs), COLLECTED)
        assert report.unknown_repo_ids == (1,)
        assert report.flagged_repo_ids == ()

    def test_constructed_corpus_point_one_zero_nine(self):
        live = repo(1, last_push=hour(19, 0))
        stale = repo(2, last_push=hour(1, 0) - timedelta(days=120))
        runs = [
            make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 1)),
            make_run(2, 1, TRIGGER_SCHEDULE, hour(2, 1)),
            make_run(3, 1, TRIGGER_SCHEDULE, hour(3, 1)),
            make_run(4, 2, TRIGGER_SCHEDULE, hour(5, 1)),
        ]
        jobs = [
            make_job(1, 1, hour(1, 1), 360),
            make_job(2, 2, hour(2, 1), 360),
            make_job(3, 3, hour(3, 1), 349.2),
            make_job(4, 4, hour(5, 1), 130.8),  # 2.18h of 20h scheduled time
        ]
        report = detect_inactive_scheduled_waste(Dataset.build([live, stale], runs, jobs), COLLECTED)
        assert report.flagged_repo_ids == (2,)
        assert report.scheduled_time_fraction == pytest.approx(0.109, rel=1e-9)

    def test_inactivity_window_configurable(self):
        pushed = hour(5, 0) - timedelta(days=10)
        repo_10d = repo(1, last_push=pushed)
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(5, 0))]
        jobs = [make_job(1, 1, hour(5, 0), 60)]
        dataset = Dataset.build([repo_10d], runs, jobs)
        assert detect_inactive_scheduled_waste(dataset, COLLECTED, inactivity_days=30).flagged_repo_ids == ()
        assert detect_inactive_scheduled_waste(dataset, COLLECTED, inactivity_days=7).flagged_repo_ids == (1,)


class TestForkShare:
    def test_no_forks(self):
        runs = [make_run(1, 1, TRIGGER_PUSH, hour(1, 1))]
        jobs = [make_job(1, 1, hour(1, 1), 60)]
        shares = fork_share(Dataset.build([repo(1)], runs, jobs))
        assert shares.fork_time_fraction == 0.0
        assert shares.scheduled_fraction_within_forks is None

    def test_all_fork_all_scheduled(self):
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 1))]
        jobs = [make_job(1, 1, hour(1, 1), 60)]
        shares = fork_share(Dataset.build([repo(1, fork=True)], runs, jobs))
        assert shares.fork_time_fraction == 1.0
        assert shares.scheduled_fraction_within_forks == 1.0

    def test_paper_proportions_fixture(self):
        repos = [repo(1), repo(2, fork=True), repo(3)]
        runs = [
            make_run(1, 1, TRIGGER_PUSH, hour(1, 1)),
            make_run(2, 1, TRIGGER_PUSH, hour(1, 8)),
            make_run(3, 2, TRIGGER_SCHEDULE, hour(2, 1)),
            make_run(4, 2, TRIGGER_PUSH, hour(3, 1)),
            make_run(5, 3, TRIGGER_WORKFLOW_DISPATCH, hour(4, 1)),
        ]
        jobs = [
            make_job(1, 1, hour(1, 1), 5.0 * 60),
            make_job(2, 2, hour(1, 8), 3.28 * 60),
            make_job(3, 3, hour(2, 1), 4.64 * 60),  # scheduled fork time
            make_job(4, 4, hour(3, 1), 2.9 * 60),
            make_job(5, 5, hour(4, 1), 4.18 * 60),
        ]
        shares = fork_share(Dataset.build(repos, runs, jobs))
        assert shares.fork_time_fraction == pytest.approx(0.377, rel=1e-9)
        assert shares.scheduled_fraction_within_forks == pytest.approx(4.64 / 7.54, rel=1e-9)


def _spiky_series(low_hour=3, low=100.0, high=500.0, day=1):
    points = [(hour(day, h), low if h == low_hour else high) for h in range(24)]
    return CarbonIntensitySeries.from_points("Z", points)


class TestTemporalShift:
    def test_constant_day_no_reduction(self, americas_region, grid, baseline_metrics):
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 10))]
        jobs = [make_job(1, 1, hour(1, 10), 60)]
        plan = simulate_temporal_shift(Dataset.build([], runs, jobs), _scenario(americas_region, baseline_metrics), grid)
        assert plan.moves == ()
        assert plan.reduction_fraction == 0.0
        assert plan.shifted_operational_mtco2e == plan.baseline_operational_mtco2e

    def test_single_run_linear_reduction(self, americas_region, baseline_metrics, singleton_mix):
        grid = GridData(
            regions={americas_region.region_id: americas_region},
            series={"Z": _spiky_series()},
            mix=singleton_mix,
        )
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 10))]
        jobs = [make_job(1, 1, hour(1, 10), 60)]
        plan = simulate_temporal_shift(Dataset.build([], runs, jobs), _scenario(americas_region, baseline_metrics), grid)
        assert plan.shifted_operational_mtco2e == pytest.approx(
            plan.baseline_operational_mtco2e * 0.2, rel=1e-9
        )
        (move,) = plan.moves
        assert move.original_hour == hour(1, 10)
        assert move.target_hour == hour(1, 3)
        assert move.target_hour.date() == move.original_hour.date()

    def test_non_scheduled_runs_unchanged(self, americas_region, baseline_metrics, singleton_mix):
        grid = GridData(
            regions={americas_region.region_id: americas_region},
            series={"Z": _spiky_series()},
            mix=singleton_mix,
        )
        runs = [make_run(1, 1, TRIGGER_PUSH, hour(1, 10))]
        jobs = [make_job(1, 1, hour(1, 10), 60)]
        plan = simulate_temporal_shift(Dataset.build([], runs, jobs), _scenario(americas_region, baseline_metrics), grid)
        assert plan.moves == ()
        assert plan.reduction_fraction == 0.0

    def test_already_optimal_is_identity(self, americas_region, baseline_metrics, singleton_mix):
        grid = GridData(
            regions={americas_region.region_id: americas_region},
            series={"Z": _spiky_series(low_hour=3)},
            mix=singleton_mix,
        )
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 3))]  # already at the minimum
        jobs = [make_job(1, 1, hour(1, 3), 60)]
        plan = simulate_temporal_shift(Dataset.build([], runs, jobs), _scenario(americas_region, baseline_metrics), grid)
        assert plan.moves == ()
        assert plan.reduction_fraction == 0.0

    def test_coverage_gap_skips_run(self, americas_region, baseline_metrics, singleton_mix):
        grid = GridData(
            regions={americas_region.region_id: americas_region},
            series={"Z": _spiky_series(day=1)},
            mix=singleton_mix,
        )
        runs = [
            make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 10)),
            make_run(2, 1, TRIGGER_SCHEDULE, hour(9, 10)),  # day 9 not covered
        ]
        jobs = [make_job(1, 1, hour(1, 10), 60), make_job(2, 2, hour(9, 10), 60)]
        plan = simulate_temporal_shift(Dataset.build([], runs, jobs), _scenario(americas_region, baseline_metrics), grid)
        assert plan.skipped_run_ids == (2,)
        assert len(plan.moves) == 1

    def test_per_run_never_increases_randomized(self, americas_region, baseline_metrics, singleton_mix):
        rng = random.Random(123)
        scenario = _scenario(americas_region, baseline_metrics)
        for _ in range(50):
            points = [(hour(1, h), rng.uniform(20, 800)) for h in range(24)]
            series = CarbonIntensitySeries.from_points("Z", points)
            grid = GridData(
                regions={americas_region.region_id: americas_region},
                series={"Z": series},
                mix=singleton_mix,
            )
            runs, jobs = [], []
            for run_id in range(1, rng.randint(2, 8)):
                created = hour(1, rng.randint(0, 23), rng.randint(0, 59))
                trigger = TRIGGER_SCHEDULE if rng.random() < 0.6 else TRIGGER_PUSH
                runs.append(make_run(run_id, 1, trigger, created))
                jobs.append(make_job(run_id, run_id, created, rng.uniform(1, 120)))
            dataset = Dataset.build([], runs, jobs)
            plan = simulate_temporal_shift(dataset, scenario, grid)
            assert plan.shifted_operational_mtco2e <= plan.baseline_operational_mtco2e + 1e-18
            # re-derive each move's claim from the series itself
            for move in plan.moves:
                energy = sum(
                    scenario_energy_components(j, scenario, grid).total_kwh
                    for j in jobs
                    if j.run_id == move.run_id
                )
                baseline = operational_factor(scenario, grid, move.original_hour) * energy * 1e6
                shifted = operational_factor(scenario, grid, move.target_hour) * energy * 1e6
                assert shifted <= baseline
                assert move.baseline_g == pytest.approx(baseline, rel=1e-9)
                assert move.shifted_g == pytest.approx(shifted, rel=1e-9)

    def test_export_format(self, americas_region, baseline_metrics, singleton_mix):
        grid = GridData(
            regions={americas_region.region_id: americas_region},
            series={"Z": _spiky_series()},
            mix=singleton_mix,
        )
        runs = [make_run(1, 1, TRIGGER_SCHEDULE, hour(1, 10))]
        jobs = [make_job(1, 1, hour(1, 10), 60)]
        plan = simulate_temporal_shift(Dataset.build([], runs, jobs), _scenario(americas_region, baseline_metrics), grid)
        buffer = io.StringIO()
        export_shift_plan(plan, buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "run_id,original_hour,target_hour,baseline_g,shifted_g"
        assert lines[1].startswith("1,2024-03-01T10:00:00Z,2024-03-01T03:00:00Z,")


class TestCheckout:
    def test_pure_attribution_formula(self):
        share = checkout_emission_share(
            time_share=0.122,
            network_share=0.081,
            network_fraction=0.348,
            nonnetwork_operational_fraction=(1 - 0.348) / 2,
        )
        assert share == pytest.approx(0.068, abs=0.001)

    def test_paper_scale_arithmetic(self):
        avg = 42_347.3 / 1_823_639
        assert avg == pytest.approx(0.0232, abs=5e-5)
        assert avg * 2_107_125 == pytest.approx(48_930.2, rel=1e-3)

    def _fixture(self, americas_region, singleton_mix, metrics):
        grid = GridData(
            regions={americas_region.region_id: americas_region},
            series={"Z": make_series()},
            mix=singleton_mix,
        )
        repos = [repo(1), repo(2), repo(3)]
        runs = [
            make_run(1, 1, TRIGGER_PUSH, hour(1, 9)),
            make_run(2, 1, TRIGGER_PUSH, hour(1, 10)),
            make_run(3, 2, TRIGGER_PUSH, hour(1, 11)),
            make_run(4, 3, TRIGGER_PUSH, hour(1, 12)),
        ]
        jobs = [
            make_job(1, 1, hour(1, 9), 30),
            make_job(2, 2, hour(1, 10), 45),
            make_job(3, 3, hour(1, 11), 60),
            make_job(4, 4, hour(1, 12), 15),
        ]
        dataset = Dataset.build(repos, runs, jobs)
        scenario = _scenario(americas_region, metrics)
        return dataset, scenario, grid

    def test_dataset_attribution_hand_checked(self, americas_region, singleton_mix, baseline_metrics):
        dataset, scenario, grid = self._fixture(americas_region, singleton_mix, baseline_metrics)
        sizes = {"o/r1": 0.05, "o/r2": 0.1, "o/r3": None, "o/other": 9.9}
        stats = checkout_attribution(dataset, sizes, scenario, grid, time_share=0.122)
        # measured: repo1 (2 jobs x 0.05) + repo2 (1 job x 0.1) = 0.2 GB over 3 runs
        assert stats.measured_executions == 3
        assert stats.repos_measured == 2
        assert stats.total_clone_gb == pytest.approx(0.2)
        assert stats.avg_gb_per_checkout == pytest.approx(0.2 / 3)
        # repo3 is a known checkout user: 4 executions total
        assert stats.checkout_executions == 4
        assert stats.extrapolated_total_gb == pytest.approx(0.2 / 3 * 4)
        assert stats.network_share == pytest.approx((0.2 / 3 * 4) / (4 * 0.22))
        # independent emission fractions: flat intensity, so factors are equal
        factor = 1.17 * 400 / 1e6
        net_op = sum(
            scenario_energy_components(j, scenario, grid).network_kwh * factor for j in dataset.jobs
        )
        csm_op = sum(
            scenario_energy_components(j, scenario, grid).non_network_kwh * factor for j in dataset.jobs
        )
        from cifp.estimator import scenario_embodied

        embodied = sum(scenario_embodied(j, grid)[0] for j in dataset.jobs)
        total = net_op + csm_op + embodied
        expected = 0.122 * (csm_op / total) + stats.network_share * (net_op / total)
        assert stats.emission_share == pytest.approx(expected, rel=1e-9)

    def test_zero_size_clones_zero_shares(self, americas_region, singleton_mix, baseline_metrics):
        dataset, scenario, grid = self._fixture(americas_region, singleton_mix, baseline_metrics)
        sizes = {"o/r1": 0.0, "o/r2": 0.0, "o/r3": 0.0}
        stats = checkout_attribution(dataset, sizes, scenario, grid, time_share=0.0)
        assert stats.network_share == 0.0
        assert stats.emission_share == 0.0
        assert stats.extrapolated_total_gb == 0.0

    def test_no_measured_executions_errors(self, americas_region, singleton_mix, baseline_metrics):
        dataset, scenario, grid = self._fixture(americas_region, singleton_mix, baseline_metrics)
        with pytest.raises(EmptyDataError):
            checkout_attribution(dataset, {"o/r3": None}, scenario, grid)

    def test_emission_share_monotone_in_avg_size(self, americas_region, singleton_mix, baseline_metrics):
        dataset, scenario, grid = self._fixture(americas_region, singleton_mix, baseline_metrics)
        shares = []
        for size in (0.01, 0.05, 0.1, 0.2):
            stats = checkout_attribution(
                dataset, {"o/r1": size, "o/r2": size, "o/r3": size}, scenario, grid
            )
            shares.append(stats.emission_share)
        assert shares == sorted(shares)

    def test_clone_size_file(self):
        text = (
            "full_name,compressed_clone_gb,measured_at\n"
            "o/a,0.021,2025-07-19T00:00:00Z\n"
            "o/b,,2025-07-19T00:00:00Z\n"
        )
        sizes = load_clone_sizes(io.StringIO(text))
        assert sizes == {"o/a": 0.021, "o/b": None}

    def test_clone_size_file_rejects_negative(self):
        text = "full_name,compressed_clone_gb,measured_at\no/a,-1,2025-07-19T00:00:00Z\n"
        with pytest.raises(TableError):
            load_clone_sizes(io.StringIO(text))

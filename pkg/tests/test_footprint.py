"""Carbon/water conversion oracles and invariants."""

from dataclasses import replace

import pytest

from conftest import hour, make_job
from cifp.energy import UsageMetrics, cloud_energy
from cifp.errors import DegenerateMixError, EmptyDataError, MissingCoefficientError
from cifp.footprint import (
    FootprintResult,
    embodied_emissions,
    embodied_water,
    job_footprint,
    offsite_water,
    onsite_water,
    operational_emissions,
)
from cifp.griddata import EMEA, ManufacturingMix, MixEntry, RegionProfile

REL = 1e-9


@pytest.fixture
def baseline_energy(machine, baseline_metrics):
    return cloud_energy(1.0, baseline_metrics, machine)


def test_operational_emissions_value(baseline_energy, americas_region, flat_series):
    value = operational_emissions(baseline_energy, americas_region, flat_series, hour(1, 10))
    assert value == pytest.approx(1.17 * 400 * 4.9567e-3 / 1e6, rel=REL)
    assert value == pytest.approx(2.31974e-6, rel=1e-5)


def test_operational_emissions_zero_cases(machine, americas_region, flat_series):
    zero_energy = cloud_energy(0.0, UsageMetrics(0.0, 0.0, 0.0), machine)
    assert operational_emissions(zero_energy, americas_region, flat_series, hour(1, 10)) == 0.0


def test_operational_emissions_green_hour(baseline_energy, americas_region):
    from conftest import make_series

    green = make_series(value=0.0)
    assert operational_emissions(baseline_energy, americas_region, green, hour(1, 10)) == 0.0


def test_embodied_emissions_hour(machine):
    value = embodied_emissions(3600.0, machine)
    assert value == pytest.approx(1.61079 * (3600 / 126_230_400) * (4 / 112), rel=REL)
    assert f"{value:.6g}" == "1.64066e-06"


def test_embodied_emissions_extremes(machine):
    assert embodied_emissions(0.0, machine) == 0.0
    full = replace(machine, reserved_vcpus=machine.total_vcpus_on_host)
    assert embodied_emissions(full.lifespan_seconds, full) == pytest.approx(
        full.total_embodied_mtco2e, rel=REL
    )


def test_offsite_water_value(baseline_energy, americas_region):
    assert offsite_water(baseline_energy, americas_region) == pytest.approx(
        4.9567e-3 * 1.17 * 2.0, rel=REL
    )
    assert offsite_water(baseline_energy, americas_region) == pytest.approx(1.15987e-2, rel=1e-5)


def test_offsite_water_missing_ewif(baseline_energy, americas_region):
    no_ewif = replace(americas_region, ewif=None)
    with pytest.raises(MissingCoefficientError) as excinfo:
        offsite_water(baseline_energy, no_ewif)
    assert "us-test" in str(excinfo.value)


def test_onsite_water(baseline_energy, americas_region, machine):
    assert onsite_water(baseline_energy, americas_region) == pytest.approx(2.72619e-3, rel=1e-5)
    emea = RegionProfile("eu-test", EMEA, pue=1.185, wue=0.1, ewif=1.0, intensity_zone="Z")
    one_kwh = cloud_energy(1.0, UsageMetrics(0.0, 0.0, 1000.0), machine)
    # 1 kWh of pure network energy priced at the EMEA wue of 0.1 L/kWh
    assert one_kwh.total_kwh == pytest.approx(1.0 + 1.736e-3 + 1.68e-5, rel=REL)
    assert onsite_water(one_kwh, emea) == pytest.approx(one_kwh.total_kwh * 0.1, rel=REL)


def test_embodied_water_two_step(singleton_mix, machine):
    carbon = embodied_emissions(3600.0, machine)
    value = embodied_water(carbon, singleton_mix)
    assert value == pytest.approx(carbon * 1e6 / 500.0 * 2.0, rel=REL)
    assert value == pytest.approx(6.56265e-3, rel=1e-4)
    assert embodied_water(0.0, singleton_mix) == 0.0


def test_embodied_water_zero_ewif(machine):
    mix = ManufacturingMix(entries=(MixEntry("X", 1.0, 500.0, 0.0),))
    assert embodied_water(embodied_emissions(3600.0, machine), mix) == 0.0


def test_embodied_water_zero_intensity(machine):
    mix = ManufacturingMix(entries=(MixEntry("X", 1.0, 0.0, 2.0),))
    with pytest.raises(DegenerateMixError):
        embodied_water(1e-6, mix)


def test_job_footprint_composition(machine, baseline_metrics, americas_region, flat_series, singleton_mix):
    job = make_job(1, 1, hour(1, 10), 60)
    result = job_footprint(job, baseline_metrics, machine, americas_region, flat_series, singleton_mix)
    # totals frozen from the independently summed component values
    assert result.total_carbon_mtco2e == pytest.approx(3.96040e-6, rel=1e-5)
    assert result.total_water_l == pytest.approx(2.088752e-2, rel=1e-5)
    assert result.total_carbon_mtco2e == pytest.approx(
        result.operational_carbon_mtco2e + result.embodied_carbon_mtco2e, rel=1e-12
    )
    assert result.total_water_l == pytest.approx(
        result.offsite_water_l + result.onsite_water_l + result.embodied_water_l, rel=1e-12
    )


def test_job_footprint_zero_duration(machine, americas_region, flat_series, singleton_mix):
    job = make_job(1, 1, hour(1, 10), 0)
    zero_net = UsageMetrics(1.51, 1.78, 0.0)
    result = job_footprint(job, zero_net, machine, americas_region, flat_series, singleton_mix)
    assert result.total_carbon_mtco2e == 0.0
    assert result.total_water_l == 0.0


def test_job_footprint_halved_intensity(machine, baseline_metrics, americas_region, singleton_mix):
    from conftest import make_series

    job = make_job(1, 1, hour(1, 10), 60)
    full = job_footprint(job, baseline_metrics, machine, americas_region, make_series(value=400.0), singleton_mix)
    half = job_footprint(job, baseline_metrics, machine, americas_region, make_series(value=200.0), singleton_mix)
    assert half.operational_carbon_mtco2e == pytest.approx(full.operational_carbon_mtco2e / 2, rel=REL)
    assert half.embodied_carbon_mtco2e == full.embodied_carbon_mtco2e


def test_job_footprint_uses_run_start(machine, baseline_metrics, americas_region, singleton_mix):
    from cifp.griddata import CarbonIntensitySeries

    series = CarbonIntensitySeries.from_points("Z", [(hour(1, 9), 100.0), (hour(1, 10), 400.0)])
    job = make_job(1, 1, hour(1, 10), 60)
    at_job_start = job_footprint(job, baseline_metrics, machine, americas_region, series, singleton_mix)
    at_run_start = job_footprint(
        job, baseline_metrics, machine, americas_region, series, singleton_mix, run_start=hour(1, 9, 30)
    )
    assert at_run_start.operational_carbon_mtco2e == pytest.approx(
        at_job_start.operational_carbon_mtco2e / 4, rel=REL
    )


def test_region_id_does_not_matter(machine, baseline_metrics, flat_series, singleton_mix, americas_region):
    job = make_job(1, 1, hour(1, 10), 60)
    twin = replace(americas_region, region_id="different-name")
    a = job_footprint(job, baseline_metrics, machine, americas_region, flat_series, singleton_mix)
    b = job_footprint(job, baseline_metrics, machine, twin, flat_series, singleton_mix)
    assert a == b


def test_embodied_scaling(machine, baseline_metrics, americas_region, flat_series, singleton_mix):
    job = make_job(1, 1, hour(1, 10), 60)
    base = job_footprint(job, baseline_metrics, machine, americas_region, flat_series, singleton_mix)
    scaled_machine = replace(machine, total_embodied_mtco2e=machine.total_embodied_mtco2e * 3)
    scaled = job_footprint(job, baseline_metrics, scaled_machine, americas_region, flat_series, singleton_mix)
    assert scaled.embodied_carbon_mtco2e == pytest.approx(3 * base.embodied_carbon_mtco2e, rel=REL)
    assert scaled.embodied_water_l == pytest.approx(3 * base.embodied_water_l, rel=REL)
    assert scaled.operational_carbon_mtco2e == base.operational_carbon_mtco2e


def test_unfiltered_job_rejected(machine, baseline_metrics, americas_region, flat_series, singleton_mix):
    from cifp.dataset.records import WorkflowJob

    job = WorkflowJob(1, 1, hour(1, 10), None)
    with pytest.raises(ValueError):
        job_footprint(job, baseline_metrics, machine, americas_region, flat_series, singleton_mix)


def test_footprint_result_mean_and_sum():
    a = FootprintResult(1.0, 2.0, 3.0, 4.0, 5.0)
    b = FootprintResult(3.0, 2.0, 1.0, 0.0, 5.0)
    mean = FootprintResult.mean([a, b])
    assert mean == FootprintResult(2.0, 2.0, 2.0, 2.0, 5.0)
    assert FootprintResult.sum([a, b]).scaled(0.5) == mean
    with pytest.raises(EmptyDataError):
        FootprintResult.mean([])

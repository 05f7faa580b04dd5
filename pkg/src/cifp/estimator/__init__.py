"""Scenario evaluation, aggregation, and ecosystem extrapolation."""

from cifp.estimator.aggregate import (
    DatasetEvaluation,
    average_repo_footprint,
    evaluate_dataset,
    extrapolate_ecosystem,
    operational_factor,
    repo_footprint,
    sample_mean_footprint,
    scenario_embodied,
    scenario_energy_components,
    scenario_job_footprint,
)
from cifp.estimator.equivalence import (
    UNIT_CARBON,
    UNIT_WATER,
    EquivalenceEntry,
    EquivalenceTable,
    equivalences,
    load_equivalence_table,
)
from cifp.estimator.population import PopulationEstimate, margin_of_error, z_value
from cifp.estimator.scenarios import (
    Scenario,
    ScenarioSpec,
    apply_setting,
    load_scenarios,
)

__all__ = [
    "DatasetEvaluation",
    "EquivalenceEntry",
    "EquivalenceTable",
    "PopulationEstimate",
    "Scenario",
    "ScenarioSpec",
    "UNIT_CARBON",
    "UNIT_WATER",
    "apply_setting",
    "average_repo_footprint",
    "equivalences",
    "evaluate_dataset",
    "extrapolate_ecosystem",
    "load_equivalence_table",
    "load_scenarios",
    "margin_of_error",
    "operational_factor",
    "repo_footprint",
    "sample_mean_footprint",
    "scenario_embodied",
    "scenario_energy_components",
    "scenario_job_footprint",
    "z_value",
]

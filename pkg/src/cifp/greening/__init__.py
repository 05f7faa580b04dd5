"""Waste and mitigation analyses over a loaded dataset."""

from cifp.greening.checkout import (
    DEFAULT_CHECKOUT_TIME_SHARE,
    CheckoutStats,
    checkout_attribution,
    checkout_emission_share,
    load_clone_sizes,
)
from cifp.greening.shifting import (
    ShiftMove,
    ShiftPlan,
    export_shift_plan,
    scenario_daily_min_hour,
    simulate_temporal_shift,
)
from cifp.greening.waste import (
    DEFAULT_INACTIVITY_DAYS,
    ForkShare,
    InactivityReport,
    detect_inactive_scheduled_waste,
    fork_share,
    scheduled_share,
)

__all__ = [
    "CheckoutStats",
    "DEFAULT_CHECKOUT_TIME_SHARE",
    "DEFAULT_INACTIVITY_DAYS",
    "ForkShare",
    "InactivityReport",
    "ShiftMove",
    "ShiftPlan",
    "checkout_attribution",
    "checkout_emission_share",
    "detect_inactive_scheduled_waste",
    "export_shift_plan",
    "fork_share",
    "load_clone_sizes",
    "scenario_daily_min_hour",
    "scheduled_share",
    "simulate_temporal_shift",
]

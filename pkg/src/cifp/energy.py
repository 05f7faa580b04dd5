"""Per-job cloud energy model.

A job reserves a fixed virtual machine (vCPUs, SSD slice) for its whole
duration; usage metrics modulate the dynamic share. All functions return
kilowatt-hours and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from cifp.griddata.machines import MachineProfile

# Usage settings recognized by scenario files and apply_setting().
BASELINE = "baseline"
LOW_USAGE = "low"
HIGH_USAGE = "high"
SETTINGS = (BASELINE, LOW_USAGE, HIGH_USAGE)


@dataclass(frozen=True)
class UsageMetrics:
    """Average per-job resource usage under one setting."""

    avg_vcpus: float
    avg_memory_gb: float
    network_gb_per_job: float
    setting: str = BASELINE

    def __post_init__(self):
        if self.avg_vcpus < 0 or self.avg_memory_gb < 0 or self.network_gb_per_job < 0:
            raise ValueError("usage metrics must be non-negative")

    def scaled(self, factor: float, setting: str) -> "UsageMetrics":
        return replace(
            self,
            avg_vcpus=self.avg_vcpus * factor,
            avg_memory_gb=self.avg_memory_gb * factor,
            network_gb_per_job=self.network_gb_per_job * factor,
            setting=setting,
        )


# Measured fleet-wide averages; override via config when you have your own
# telemetry.
DEFAULT_BASELINE_METRICS = UsageMetrics(
    avg_vcpus=1.51,
    avg_memory_gb=1.78,
    network_gb_per_job=0.22,
)


@dataclass(frozen=True)
class EnergyBreakdown:
    """kWh split of one job; total is always the exact component sum."""

    compute_kwh: float
    storage_kwh: float
    memory_kwh: float
    network_kwh: float

    @property
    def total_kwh(self) -> float:
        return self.compute_kwh + self.storage_kwh + self.memory_kwh + self.network_kwh

    @property
    def non_network_kwh(self) -> float:
        return self.compute_kwh + self.storage_kwh + self.memory_kwh


def compute_energy(duration_h: float, metrics: UsageMetrics, machine: MachineProfile) -> float:
    """CPU energy: idle floor for every reserved vCPU plus the dynamic span
    scaled by the mean number of vCPUs actually used."""
    if duration_h < 0:
        raise ValueError("duration_h must be >= 0")
    idle = machine.vcpu_min_kw * machine.vcpu_count
    dynamic = (machine.vcpu_max_kw - machine.vcpu_min_kw) * metrics.avg_vcpus
    return (idle + dynamic) * duration_h


def storage_energy(duration_h: float, machine: MachineProfile) -> float:
    """Reserved-SSD energy; independent of what the job actually writes."""
    if duration_h < 0:
        raise ValueError("duration_h must be >= 0")
    return machine.storage_coeff_kwh_per_tbh * machine.reserved_storage_tb * duration_h


def memory_energy(duration_h: float, metrics: UsageMetrics, machine: MachineProfile) -> float:
    if duration_h < 0:
        raise ValueError("duration_h must be >= 0")
    return machine.memory_coeff_kwh_per_gbh * metrics.avg_memory_gb * duration_h


def network_energy(metrics: UsageMetrics, machine: MachineProfile) -> float:
    """Data-transfer energy; priced per GB moved, not per hour."""
    return machine.network_coeff_kwh_per_gb * metrics.network_gb_per_job


def cloud_energy(duration_h: float, metrics: UsageMetrics, machine: MachineProfile) -> EnergyBreakdown:
    """Full per-job energy breakdown (compute + storage + memory + network)."""
    return EnergyBreakdown(
        compute_kwh=compute_energy(duration_h, metrics, machine),
        storage_kwh=storage_energy(duration_h, machine),
        memory_kwh=memory_energy(duration_h, metrics, machine),
        network_kwh=network_energy(metrics, machine),
    )

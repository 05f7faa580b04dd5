"""Runner hardware profiles: power coefficients and embodied-emission data."""

from __future__ import annotations

from dataclasses import dataclass

# 4 years expressed in Julian years so the amortization denominator is exact.
FOUR_YEAR_LIFESPAN_S = 4 * 365.25 * 24 * 3600  # 126,230,400 s


@dataclass(frozen=True)
class MachineProfile:
    """Coefficients of the virtual machine class a job runs on."""

    vcpu_min_kw: float
    vcpu_max_kw: float
    vcpu_count: int
    reserved_storage_tb: float
    storage_coeff_kwh_per_tbh: float
    memory_coeff_kwh_per_gbh: float
    network_coeff_kwh_per_gb: float
    total_embodied_mtco2e: float
    lifespan_seconds: float
    total_vcpus_on_host: int
    reserved_vcpus: int

    def __post_init__(self):
        if not 0 < self.vcpu_min_kw <= self.vcpu_max_kw:
            raise ValueError("need vcpu_max_kw >= vcpu_min_kw > 0")
        if self.reserved_vcpus > self.total_vcpus_on_host:
            raise ValueError("reserved_vcpus cannot exceed total_vcpus_on_host")
        if self.lifespan_seconds <= 0:
            raise ValueError("lifespan_seconds must be positive")


# Standard 4-vCPU hosted runner on a third-generation EPYC host: SPECpower
# derived idle/full-load per-vCPU draw, 14 GB reserved SSD, LCA total for the
# host amortized over 4 years and the 4/112 reserved-vCPU share.
DEFAULT_MACHINE = MachineProfile(
    vcpu_min_kw=4.34e-4,
    vcpu_max_kw=1.948e-3,
    vcpu_count=4,
    reserved_storage_tb=0.014,
    storage_coeff_kwh_per_tbh=0.0012,
    memory_coeff_kwh_per_gbh=0.000392,
    network_coeff_kwh_per_gb=0.001,
    total_embodied_mtco2e=1.61079,
    lifespan_seconds=FOUR_YEAR_LIFESPAN_S,
    total_vcpus_on_host=112,
    reserved_vcpus=4,
)

"""Finite-population proportion estimates with margins of error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist


def z_value(confidence: float) -> float:
    """Two-sided standard-normal critical value for a confidence level."""
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0, 1)")
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def margin_of_error(n: int, population_size: int, successes: int, confidence: float) -> float:
    """z * sqrt(p(1-p)/n) * sqrt((N-n)/(N-1)) with p = successes/n.

    The finite-population correction makes the margin vanish at a census.
    """
    if n <= 0:
        raise ValueError("sample size must be positive")
    if n > population_size:
        raise ValueError(f"sample size {n} exceeds population size {population_size}")
    if not 0 <= successes <= n:
        raise ValueError("successes must be within [0, n]")
    p = successes / n
    if population_size == 1:
        return 0.0
    fpc = math.sqrt((population_size - n) / (population_size - 1))
    return z_value(confidence) * math.sqrt(p * (1 - p) / n) * fpc


@dataclass(frozen=True)
class PopulationEstimate:
    """Extrapolation of a sampled proportion to the whole population."""

    population_size: int
    sample_size: int
    successes: int
    confidence: float
    proportion: float
    margin_of_error: float
    extrapolated_count: int

    @classmethod
    def from_sample(
        cls, population_size: int, sample_size: int, successes: int, confidence: float = 0.99
    ) -> "PopulationEstimate":
        moe = margin_of_error(sample_size, population_size, successes, confidence)
        p = successes / sample_size
        return cls(
            population_size=population_size,
            sample_size=sample_size,
            successes=successes,
            confidence=confidence,
            proportion=p,
            margin_of_error=moe,
            extrapolated_count=round(p * population_size),
        )

"""Synthetic contributor-pool generator.

Desk-scale substitute for archived GitHub data. Generative model, per
contributor i, month t, dimension d:

    skill_i ~ LogNormal(0, skill_sigma)
    counts[i, t, d] ~ Poisson(rates[d] * skill_i * growth**t)

so the analytic mean of dimension d in month t is
rates[d] * E[skill] * growth**t with E[skill] = exp(skill_sigma**2 / 2).
Generation is bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ingest import MonthlyTrajectory, ProjectDataset
from .schema import DEFAULT_SCHEMA


@dataclass
class SynthConfig:
    dimensions: list[str] = field(default_factory=lambda: list(DEFAULT_SCHEMA))
    n_contributors: int = 100
    horizon: int = 18
    rates: list[float] = field(default_factory=lambda: [4.0, 8.0, 2.0, 3.0, 5.0, 2.0])
    growth: float = 1.03
    skill_sigma: float = 0.4
    project: str = "synthetic"

    def __post_init__(self):
        if len(self.rates) != len(self.dimensions):
            raise ValueError(
                f"rates length {len(self.rates)} != schema length {len(self.dimensions)}"
            )
        if self.n_contributors < 1:
            raise ValueError(f"n_contributors must be positive, got {self.n_contributors}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be positive, got {self.horizon}")

    @property
    def mean_skill(self) -> float:
        return math.exp(self.skill_sigma**2 / 2.0)

    def expected_count(self, month: int, dim: int) -> float:
        return self.rates[dim] * self.mean_skill * self.growth**month


def generate_synthetic(config: SynthConfig, seed: int) -> ProjectDataset:
    """Draw a full synthetic dataset under the documented model."""
    rng = np.random.default_rng(seed)
    m = len(config.dimensions)
    rates = np.asarray(config.rates, dtype=float)
    skills = rng.lognormal(mean=0.0, sigma=config.skill_sigma, size=config.n_contributors)
    growth = config.growth ** np.arange(config.horizon, dtype=float)

    width = len(str(config.n_contributors - 1))
    trajectories = []
    for i in range(config.n_contributors):
        lam = skills[i] * np.outer(growth, rates)  # (horizon, m)
        counts = rng.poisson(lam).astype(np.int64)
        trajectories.append(
            MonthlyTrajectory(
                contributor_id=f"synth-{i:0{width}d}",
                month_indices=np.arange(config.horizon, dtype=np.int64),
                counts=counts.reshape(config.horizon, m),
            )
        )
    return ProjectDataset(
        project=config.project, schema=list(config.dimensions), trajectories=trajectories
    )


def load_synth_config(path) -> SynthConfig:
    with open(path) as f:
        data = json.load(f)
    return SynthConfig(**data)

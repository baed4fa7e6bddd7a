import numpy as np
import pytest

from ossmentor.ingest import ContributorPool, MonthlyTrajectory, ProjectDataset
from ossmentor.schema import DEFAULT_PARENT_MAP
from ossmentor.synth import SynthConfig, generate_synthetic
from ossmentor.weighting import annotate_pool, compute_weights


@pytest.fixture(scope="session")
def synth_dataset() -> ProjectDataset:
    return generate_synthetic(SynthConfig(), seed=7)


@pytest.fixture(scope="session")
def synth_weights(synth_dataset):
    return compute_weights(synth_dataset, DEFAULT_PARENT_MAP)


def make_trajectory(contributor_id: str, counts) -> MonthlyTrajectory:
    counts = np.asarray(counts, dtype=np.int64)
    return MonthlyTrajectory(
        contributor_id=contributor_id,
        month_indices=np.arange(len(counts), dtype=np.int64),
        counts=counts,
    )


def make_pool(weights, *trajectories) -> ContributorPool:
    m = trajectories[0].counts.shape[1]
    pool = ContributorPool(schema=[f"dim{j}" for j in range(m)], trajectories=list(trajectories))
    return annotate_pool(pool, weights)

"""Data-driven contribution weighting.

Per-dimension importance weights come from the entropy-weight method,
with conditional entropy standing in for plain entropy on dimensions that
have a declared parent (e.g. issue comments conditioned on opened issues).
Monthly counts are discretized with quantile bins; a dimension whose
binned distribution carries little entropy is highly discriminative and
receives a large weight.

All entropies are in bits; the weight normalization cancels the log base.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .ingest import ContributorPool, MonthlyTrajectory, ProjectDataset


@dataclass
class BinnedDistribution:
    bin_edges: np.ndarray  # interior thresholds, strictly ascending
    probabilities: np.ndarray  # one entry per (non-empty) bin, sums to 1

    @property
    def n_bins(self) -> int:
        return len(self.probabilities)


@dataclass
class JointBinnedDistribution:
    probabilities: np.ndarray  # (x bins, y bins), total mass 1


@dataclass
class WeightResult:
    schema: list[str]
    weights: np.ndarray
    entropies: np.ndarray  # per-dimension (conditional) entropy, bits


def shannon_entropy(dist: BinnedDistribution) -> float:
    """H(X) = -sum p log2 p, with the 0 log 0 = 0 convention."""
    p = np.asarray(dist.probabilities, dtype=float)
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def conditional_entropy(joint: JointBinnedDistribution) -> float:
    """H(Y|X) = -sum p(x,y) log2(p(x,y)/p(x)); zero-mass cells contribute 0."""
    p = np.asarray(joint.probabilities, dtype=float)
    px = p.sum(axis=1)
    total = 0.0
    for i in range(p.shape[0]):
        if px[i] <= 0.0:
            continue
        row = p[i]
        nz = row[row > 0.0]
        total -= float(np.sum(nz * np.log2(nz / px[i])))
    return total


def _bin_labels(values: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Quantile-bin integer counts; empty bins are merged away.

    Edges use the 'lower' quantile method so they are actual data values,
    which keeps bin membership exactly invariant under positive integer
    scaling of the counts. A value equal to an edge falls in the lower bin.
    Returns (labels relabeled to 0..k-1, retained interior edges).
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    values = np.asarray(values, dtype=float)
    qs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    interior = np.unique(np.quantile(values, qs, method="lower"))
    raw = np.searchsorted(interior, values, side="left")
    present = np.unique(raw)
    remap = np.full(len(interior) + 1, -1, dtype=np.int64)
    remap[present] = np.arange(len(present))
    labels = remap[raw]
    # thresholds separating consecutive retained bins
    edges = np.array([interior[p - 1] for p in present[1:]], dtype=float)
    return labels, edges


def _dimension_values(dataset: ProjectDataset, dimension: int) -> np.ndarray:
    values = np.concatenate([t.counts[:, dimension] for t in dataset.trajectories]) \
        if dataset.trajectories else np.array([], dtype=np.int64)
    if len(values) < 2:
        raise ValueError(
            f"need at least 2 contributor-months to bin dimension {dimension}, "
            f"got {len(values)}"
        )
    return values


def bin_counts(dataset: ProjectDataset, dimension: int, bins: int = 10) -> BinnedDistribution:
    """Empirical quantile-binned distribution of one dimension's monthly counts."""
    values = _dimension_values(dataset, dimension)
    labels, edges = _bin_labels(values, bins)
    masses = np.bincount(labels).astype(float)
    return BinnedDistribution(bin_edges=edges, probabilities=masses / masses.sum())


def joint_bin_counts(
    dataset: ProjectDataset, x_dimension: int, y_dimension: int, bins: int = 10
) -> JointBinnedDistribution:
    """Joint binned distribution of (parent, child) monthly counts."""
    x = _dimension_values(dataset, x_dimension)
    y = _dimension_values(dataset, y_dimension)
    x_labels, _ = _bin_labels(x, bins)
    y_labels, _ = _bin_labels(y, bins)
    nx, ny = x_labels.max() + 1, y_labels.max() + 1
    counts = np.zeros((nx, ny), dtype=float)
    np.add.at(counts, (x_labels, y_labels), 1.0)
    return JointBinnedDistribution(probabilities=counts / counts.sum())


def _check_parent_map(schema: list[str], parent_map: dict[str, str]) -> None:
    for child, parent in parent_map.items():
        if child not in schema or parent not in schema:
            raise ValueError(f"parent map entry {child!r} -> {parent!r} not in schema")
    for start in parent_map:
        seen = {start}
        node = start
        while node in parent_map:
            node = parent_map[node]
            if node in seen:
                raise ValueError(f"parent map has a cycle through {node!r}")
            seen.add(node)


def compute_weights(
    dataset: ProjectDataset,
    parent_map: dict[str, str] | None = None,
    bins: int = 10,
) -> WeightResult:
    """Entropy-weight method over (conditionally) binned monthly counts.

    For each dimension j: H_j is the conditional entropy of j's binned
    counts given its parent's (plain entropy when j has no parent),
    normalized by log2 of j's bin count; the divergence 1 - H_norm is
    renormalized into a weight simplex. A constant dimension (single bin)
    has zero entropy and maximal divergence. All-zero divergences fall
    back to uniform weights.
    """
    parent_map = dict(parent_map or {})
    schema = dataset.schema
    _check_parent_map(schema, parent_map)
    m = len(schema)
    dim_index = {name: j for j, name in enumerate(schema)}

    entropies = np.zeros(m)
    divergences = np.zeros(m)
    for j, name in enumerate(schema):
        marginal = bin_counts(dataset, j, bins)
        if name in parent_map:
            joint = joint_bin_counts(dataset, dim_index[parent_map[name]], j, bins)
            h = conditional_entropy(joint)
        else:
            h = shannon_entropy(marginal)
        entropies[j] = h
        if marginal.n_bins > 1:
            h_norm = h / np.log2(marginal.n_bins)
        else:
            h_norm = 0.0
        divergences[j] = 1.0 - h_norm

    total = divergences.sum()
    if total > 0.0:
        weights = divergences / total
    else:
        weights = np.full(m, 1.0 / m)
    return WeightResult(schema=list(schema), weights=weights, entropies=entropies)


def contribution(weights: np.ndarray, action: np.ndarray) -> float:
    """One month's contribution: the weighted action count W . A."""
    weights = np.asarray(weights, dtype=float)
    action = np.asarray(action, dtype=float)
    if weights.shape != action.shape:
        raise ValueError(f"length mismatch: weights {weights.shape}, action {action.shape}")
    return float(weights @ action)


def annotate_trajectory(trajectory: MonthlyTrajectory, weights: np.ndarray) -> MonthlyTrajectory:
    """Fill cumulative contribution as the prefix sum of monthly scores."""
    weights = np.asarray(weights, dtype=float)
    per_step = trajectory.counts.astype(float) @ weights
    return replace(trajectory, cumulative=np.cumsum(per_step))


def annotate_pool(pool: ContributorPool, weights: np.ndarray) -> ContributorPool:
    return ContributorPool(
        schema=list(pool.schema),
        trajectories=[annotate_trajectory(t, weights) for t in pool.trajectories],
    )


def save_weights(result: WeightResult, path) -> None:
    with open(path, "w") as f:
        json.dump(
            {
                "schema": result.schema,
                "weights": [float(w) for w in result.weights],
                "entropies": [float(h) for h in result.entropies],
                "method": "conditional-entropy-weight",
            },
            f,
        )


def load_weights(path) -> WeightResult:
    with open(path) as f:
        data = json.load(f)
    return WeightResult(
        schema=list(data["schema"]),
        weights=np.asarray(data["weights"], dtype=float),
        entropies=np.asarray(data["entropies"], dtype=float),
    )

"""Contributor-pool environment.

One episode simulates a developer career over a fixed horizon of months.
Each step the developer proposes a monthly action vector; the environment
matches contributor-months at a similar cumulative contribution level
(K-degree relaxation: the window widens geometrically until something
matches), averages them into the expected contributor action, and pays a
reward equal to the weighted action magnitude shaded by a Gaussian-kernel
similarity between the developer's and the matched action.

The environment separately records the developer's historical cumulative
contribution; perturbing the observed state never erases that history,
so matching stays anchored to what the developer actually did.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ingest import ContributorPool
from .weighting import contribution


@dataclass
class EnvState:
    short_term: np.ndarray  # (m,) normalized expected contributor action
    long_term: float  # normalized cumulative contribution
    month_index: int

    def vector(self) -> np.ndarray:
        """Flat network input: short-term features then the long-term one."""
        return np.append(self.short_term, self.long_term)


@dataclass
class MatchConfig:
    k0: float = 0.05  # initial window, fraction of the pool contribution range
    growth: float = 2.0  # window multiplier per empty round
    max_rounds: int = 16

    def __post_init__(self):
        if not 0.0 < self.k0 <= 1.0:
            raise ValueError(f"k0 must be in (0, 1], got {self.k0}")
        if self.growth <= 1.0:
            raise ValueError(f"growth must be > 1, got {self.growth}")


@dataclass
class RewardParams:
    sigma: float = 0.5

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def lam(self) -> float:
        return 1.0 / (2.0 * self.sigma**2)


@dataclass
class StepOutcome:
    next_state: EnvState
    reward: float
    matched_action: np.ndarray  # integer contributor expectation
    similarity: float
    done: bool


@dataclass
class PoolIndex:
    """Flattened contributor-months for matching: parallel cum/action arrays."""

    cumulative: np.ndarray  # (N,)
    actions: np.ndarray  # (N, m)
    scale: np.ndarray  # (m,) per-dimension normalization caps
    cum_norm: float  # normalization for cumulative contribution

    @property
    def contribution_range(self) -> float:
        return float(self.cumulative.max() - self.cumulative.min())


def build_pool_index(pool: ContributorPool) -> PoolIndex:
    """Flatten an annotated pool; every trajectory must carry cumulatives."""
    if not pool.trajectories:
        raise ValueError("contributor pool is empty")
    cums, actions = [], []
    for t in pool.trajectories:
        if t.cumulative is None:
            raise ValueError(f"trajectory {t.contributor_id!r} lacks cumulative annotation")
        cums.append(t.cumulative)
        actions.append(t.counts)
    cumulative = np.concatenate(cums).astype(float)
    stacked = np.concatenate(actions).astype(float)
    scale = np.maximum(stacked.max(axis=0), 1.0)
    cum_norm = max(float(cumulative.max()), 1.0)
    return PoolIndex(cumulative=cumulative, actions=stacked, scale=scale, cum_norm=cum_norm)


def match_contributor_actions(
    cumulative: float, index: PoolIndex, cfg: MatchConfig
) -> np.ndarray:
    """Contributor-month actions within +-K of the cumulative level.

    K starts at k0 times the pool contribution range and is multiplied by
    growth for each empty round; after max_rounds the whole pool is
    returned, so the result is never empty.
    """
    spread = index.contribution_range
    k = cfg.k0 * (spread if spread > 0.0 else 1.0)
    gap = np.abs(index.cumulative - cumulative)
    for _ in range(cfg.max_rounds):
        mask = gap <= k
        if mask.any():
            return index.actions[mask]
        k *= cfg.growth
    return index.actions


def expected_action(matches: np.ndarray) -> np.ndarray:
    """Element-wise mean of the matched contributor actions."""
    matches = np.asarray(matches, dtype=float)
    if matches.size == 0:
        raise ValueError("cannot average an empty match set")
    return matches.mean(axis=0)


def reward(
    a_d: np.ndarray,
    a_e: np.ndarray,
    weights: np.ndarray,
    params: RewardParams,
    scale: np.ndarray | None = None,
) -> tuple[float, float]:
    """Similarity-shaded reward.

    The magnitude term W . a_d uses raw counts; the distance inside the
    Gaussian kernel uses per-dimension normalized counts (a/scale),
    weighted by W. Returns (reward, similarity); reward is in
    [0, W . a_d] and similarity in (0, 1].
    """
    a_d = np.asarray(a_d, dtype=float)
    a_e = np.asarray(a_e, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not (a_d.shape == a_e.shape == weights.shape):
        raise ValueError(
            f"length mismatch: a_d {a_d.shape}, a_e {a_e.shape}, weights {weights.shape}"
        )
    if scale is None:
        scale = np.ones_like(weights)
    diff = (a_d - a_e) / scale
    dist_sq = float(np.sum((diff * weights) ** 2))
    similarity = float(np.exp(-params.lam * dist_sq))
    return float(weights @ a_d) * similarity, similarity


def perturb_state(state: EnvState, initial: EnvState) -> EnvState:
    """Force the observed features back to their initial values.

    Only the observation changes; the month index is preserved and the
    environment's recorded cumulative history is untouched.
    """
    return replace(
        state, short_term=initial.short_term.copy(), long_term=initial.long_term
    )


class MentorEnv:
    """Single-episode environment over a shared, immutable contributor pool."""

    def __init__(
        self,
        pool: ContributorPool,
        weights: np.ndarray,
        horizon: int = 18,
        match_cfg: MatchConfig | None = None,
        reward_params: RewardParams | None = None,
    ):
        if horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self.index = build_pool_index(pool)
        self._trajectories = pool.trajectories
        self.weights = np.asarray(weights, dtype=float)
        self.horizon = horizon
        self.match_cfg = match_cfg or MatchConfig()
        self.reward_params = reward_params or RewardParams()
        self.state: EnvState | None = None
        self.initial_state: EnvState | None = None
        self.hist_cumulative = 0.0
        self.step_contributions: list[float] = []

    @property
    def scale(self) -> np.ndarray:
        return self.index.scale

    def _short_term_at(self, cumulative: float) -> np.ndarray:
        matches = match_contributor_actions(cumulative, self.index, self.match_cfg)
        return np.clip(expected_action(matches) / self.index.scale, 0.0, 1.0)

    def reset(self, seed: int | None = None) -> EnvState:
        """Start a fresh episode at month 0 with zero cumulative contribution.

        The initial short-term feature is the pool-wide mean first-month
        action (normalized). The seed is accepted for interface symmetry;
        the environment itself is deterministic.
        """
        del seed
        first_months = np.stack([t.counts[0].astype(float) for t in self._trajectories])
        short = np.clip(first_months.mean(axis=0) / self.index.scale, 0.0, 1.0)
        self.state = EnvState(short_term=short, long_term=0.0, month_index=0)
        self.initial_state = replace(self.state, short_term=short.copy())
        self.hist_cumulative = 0.0
        self.step_contributions = []
        return self.state

    def step(self, a_d: np.ndarray) -> StepOutcome:
        """Advance one month with the developer's action."""
        if self.state is None:
            raise RuntimeError("call reset() before step()")
        if self.state.month_index >= self.horizon:
            raise RuntimeError("episode is done; call reset()")
        a_d = np.asarray(a_d, dtype=float)

        matches = match_contributor_actions(self.hist_cumulative, self.index, self.match_cfg)
        matched = np.rint(expected_action(matches))
        r, similarity = reward(
            a_d, matched, self.weights, self.reward_params, self.index.scale
        )

        c_step = contribution(self.weights, a_d)
        self.hist_cumulative += c_step
        self.step_contributions.append(c_step)

        next_state = EnvState(
            short_term=self._short_term_at(self.hist_cumulative),
            long_term=self.state.long_term + c_step / self.index.cum_norm,
            month_index=self.state.month_index + 1,
        )
        self.state = next_state
        done = next_state.month_index >= self.horizon
        return StepOutcome(
            next_state=next_state,
            reward=r,
            matched_action=matched,
            similarity=similarity,
            done=done,
        )

    def perturb_to_initial(self) -> EnvState:
        """Apply the intervention: observation back to initial, history kept."""
        if self.state is None or self.initial_state is None:
            raise RuntimeError("call reset() before perturbing")
        self.state = perturb_state(self.state, self.initial_state)
        return self.state

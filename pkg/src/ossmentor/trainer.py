"""Batch-updating clipped-surrogate policy trainer.

The distinguishing trait versus a per-episode PPO update: parameters are
refreshed every batch_size steps *within* an episode (plus once for any
remainder segment at episode end), so later steps of the same episode
already act under improved parameters. The per-episode variant is kept as
the ablation baseline.

Old-policy log-probabilities are recorded at collection time and the old
probability is clamped from below before forming the importance ratio, so
ratios are always finite. Plain gradient ascent/descent, no momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import MatchConfig, MentorEnv, RewardParams
from .ingest import ContributorPool, ProjectDataset, top_contributors
from .policy import (
    ActorParams,
    CriticParams,
    actor_backward,
    actor_forward,
    critic_backward,
    critic_forward,
    init_actor,
    init_critic,
    log_prob_raw,
    sample_action,
)
from .weighting import annotate_pool


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    lr_actor: float = 0.01
    lr_critic: float = 0.01
    batch_size: int = 10
    epsilon: float = 0.3
    # rewards here are dominated by the immediate contribution term; a short
    # credit horizon keeps batch advantages informative
    gamma: float = 0.5
    epochs: int = 4
    episodes: int = 500
    horizon: int = 18
    min_old_prob: float = 1e-5
    seed: int = 0
    pool_size: int = 120

    def __post_init__(self):
        if not 0.0 < self.epsilon:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.min_old_prob <= 0.0:
            raise ValueError(f"min_old_prob must be positive, got {self.min_old_prob}")


@dataclass
class Transition:
    state: np.ndarray
    raw: np.ndarray
    action: np.ndarray
    old_log_prob: float
    reward: float
    value: float


@dataclass
class EpisodeReport:
    rewards: list[float]
    contributions: list[float]
    n_updates: int

    @property
    def mean_reward(self) -> float:
        return float(np.mean(self.rewards)) if self.rewards else 0.0

    @property
    def mean_contribution(self) -> float:
        return float(np.mean(self.contributions)) if self.contributions else 0.0


@dataclass
class TrainResult:
    actor: ActorParams
    critic: CriticParams
    curve: list[dict] = field(default_factory=list)  # one row per episode


def discounted_returns(rewards: list[float], gamma: float) -> np.ndarray:
    """Return-to-go over the collected segment."""
    returns = np.zeros(len(rewards))
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        returns[t] = acc
    return returns


def compute_advantages(
    buffer: list[Transition], gamma: float, normalize: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Advantages (return-to-go minus value baseline) and returns.

    Advantages are normalized to zero mean / unit variance within the
    batch when it holds more than one transition.
    """
    if not buffer:
        raise ValueError("empty transition buffer")
    returns = discounted_returns([tr.reward for tr in buffer], gamma)
    advantages = returns - np.array([tr.value for tr in buffer])
    if normalize and len(buffer) > 1:
        std = advantages.std()
        advantages = (advantages - advantages.mean()) / (std if std > 0.0 else 1.0)
    return advantages, returns


def _ratio(new_log_prob: float, old_log_prob: float, min_old_prob: float) -> float:
    log_old = max(old_log_prob, math.log(min_old_prob))
    try:
        ratio = math.exp(new_log_prob - log_old)
    except OverflowError:
        ratio = math.inf
    if not math.isfinite(ratio):
        raise TrainingDiverged(f"non-finite importance ratio from log probs "
                               f"{new_log_prob}, {old_log_prob}")
    return ratio


def clipped_surrogate(
    new_log_prob: float,
    old_log_prob: float,
    advantage: float,
    epsilon: float,
    min_old_prob: float = 1e-5,
) -> float:
    """min(ratio * A, clip(ratio, 1-eps, 1+eps) * A)."""
    ratio = _ratio(new_log_prob, old_log_prob, min_old_prob)
    clipped = min(max(ratio, 1.0 - epsilon), 1.0 + epsilon)
    return min(ratio * advantage, clipped * advantage)


def _surrogate_grad_logp(
    new_log_prob: float,
    old_log_prob: float,
    advantage: float,
    epsilon: float,
    min_old_prob: float,
) -> float:
    """d surrogate / d new_log_prob (zero when the clip branch is active)."""
    ratio = _ratio(new_log_prob, old_log_prob, min_old_prob)
    clipped = min(max(ratio, 1.0 - epsilon), 1.0 + epsilon)
    if ratio * advantage <= clipped * advantage:
        return advantage * ratio
    return 0.0


def _check_finite(actor: ActorParams, critic: CriticParams) -> None:
    for a in actor.arrays().values():
        if not np.all(np.isfinite(a)):
            raise TrainingDiverged("actor parameters became non-finite")
    for a in critic.arrays().values():
        if not np.all(np.isfinite(a)):
            raise TrainingDiverged("critic parameters became non-finite")


def _update(
    actor: ActorParams,
    critic: CriticParams,
    buffer: list[Transition],
    cfg: TrainConfig,
) -> None:
    """One clipped-surrogate update on a collected segment (in place)."""
    advantages, returns = compute_advantages(buffer, cfg.gamma)
    n = len(buffer)
    for _ in range(cfg.epochs):
        actor_acc = {k: np.zeros_like(v) for k, v in actor.arrays().items()}
        critic_acc = {k: np.zeros_like(v, dtype=float) for k, v in critic.arrays().items()}
        for tr, adv, ret in zip(buffer, advantages, returns):
            out = actor_forward(actor, tr.state)
            new_logp = log_prob_raw(out, tr.raw)
            dlogp = _surrogate_grad_logp(
                new_logp, tr.old_log_prob, float(adv), cfg.epsilon, cfg.min_old_prob
            )
            if dlogp != 0.0:
                grads = actor_backward(actor, tr.state, tr.raw, dlogp / n)
                for k, g in grads.arrays().items():
                    actor_acc[k] += g
            v = critic_forward(critic, tr.state)
            cg = critic_backward(critic, tr.state, 2.0 * (v - ret) / n)
            critic_acc["w1"] += cg.w1
            critic_acc["b1"] += cg.b1
            critic_acc["w2"] += cg.w2
            critic_acc["b2"] += cg.b2
        # ascend the surrogate, descend the squared value error
        actor.w1 += cfg.lr_actor * actor_acc["w1"]
        actor.b1 += cfg.lr_actor * actor_acc["b1"]
        actor.w_mean += cfg.lr_actor * actor_acc["w_mean"]
        actor.b_mean += cfg.lr_actor * actor_acc["b_mean"]
        actor.w_var += cfg.lr_actor * actor_acc["w_var"]
        actor.b_var += cfg.lr_actor * actor_acc["b_var"]
        critic.w1 -= cfg.lr_critic * critic_acc["w1"]
        critic.b1 -= cfg.lr_critic * critic_acc["b1"]
        critic.w2 -= cfg.lr_critic * critic_acc["w2"]
        critic.b2 -= cfg.lr_critic * float(critic_acc["b2"][0])
    _check_finite(actor, critic)


def _run_episode(
    env: MentorEnv,
    actor: ActorParams,
    critic: CriticParams,
    cfg: TrainConfig,
    rng: np.random.Generator,
    batch_size: int,
    update: bool = True,
) -> EpisodeReport:
    state = env.reset()
    buffer: list[Transition] = []
    rewards: list[float] = []
    n_updates = 0
    for _ in range(env.horizon):
        vec = state.vector()
        out = actor_forward(actor, vec)
        sample = sample_action(out, rng, env.scale)
        value = critic_forward(critic, vec)
        outcome = env.step(sample.action)
        rewards.append(outcome.reward)
        buffer.append(
            Transition(
                state=vec,
                raw=sample.raw,
                action=sample.action,
                old_log_prob=sample.log_prob,
                reward=outcome.reward,
                value=value,
            )
        )
        state = outcome.next_state
        if update and len(buffer) >= batch_size:
            _update(actor, critic, buffer, cfg)
            buffer.clear()
            n_updates += 1
    if update and buffer:
        _update(actor, critic, buffer, cfg)
        buffer.clear()
        n_updates += 1
    return EpisodeReport(
        rewards=rewards,
        contributions=list(env.step_contributions),
        n_updates=n_updates,
    )


def train_episode(
    env: MentorEnv,
    actor: ActorParams,
    critic: CriticParams,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> EpisodeReport:
    """Roll one episode with an update every batch_size steps."""
    return _run_episode(env, actor, critic, cfg, rng, batch_size=cfg.batch_size)


def train_episode_ppo_variant(
    env: MentorEnv,
    actor: ActorParams,
    critic: CriticParams,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> EpisodeReport:
    """Ablation baseline: one update only, after the full episode."""
    return _run_episode(env, actor, critic, cfg, rng, batch_size=env.horizon)


def build_env(
    data: ProjectDataset | ContributorPool,
    weights: np.ndarray,
    cfg: TrainConfig,
    match_cfg: MatchConfig | None = None,
    reward_params: RewardParams | None = None,
) -> MentorEnv:
    """Annotate (and if needed select) the contributor pool, build the env."""
    if isinstance(data, ProjectDataset):
        pool = top_contributors(data, min(cfg.pool_size, len(data.trajectories)))
    else:
        pool = data
    pool = annotate_pool(pool, weights)
    return MentorEnv(
        pool,
        weights,
        horizon=cfg.horizon,
        match_cfg=match_cfg,
        reward_params=reward_params,
    )


def train(
    data: ProjectDataset | ContributorPool,
    weights: np.ndarray,
    cfg: TrainConfig,
    match_cfg: MatchConfig | None = None,
    reward_params: RewardParams | None = None,
    episode_fn=train_episode,
) -> TrainResult:
    """Run cfg.episodes training episodes; deterministic for a fixed seed."""
    env = build_env(data, weights, cfg, match_cfg, reward_params)
    rng = np.random.default_rng(cfg.seed)
    state_dim = len(weights) + 1
    actor = init_actor(state_dim, len(weights), rng)
    critic = init_critic(state_dim, rng)
    result = TrainResult(actor=actor, critic=critic)
    for episode in range(cfg.episodes):
        report = episode_fn(env, actor, critic, cfg, rng)
        result.curve.append(
            {
                "episode": episode,
                "mean_step_contribution": report.mean_contribution,
                "mean_reward": report.mean_reward,
            }
        )
    return result

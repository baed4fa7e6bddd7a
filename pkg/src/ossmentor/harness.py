"""Experiment harness: contribution table, clip-range sweep, intervention
experiment, and case-study export.

Every experiment is deterministic given the config's seed list and emits a
report dict plus plot-ready CSV files. REAL rows are pure replays of
recorded trajectories through the contribution metric; no policy touches
them.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .env import MatchConfig, MentorEnv, RewardParams
from .ingest import ContributorPool, MonthlyTrajectory, ProjectDataset, load_dataset
from .policy import ActorParams, actor_forward, sample_action
from .synth import SynthConfig, generate_synthetic
from .trainer import (
    TrainConfig,
    TrainResult,
    build_env,
    train,
    train_episode,
    train_episode_ppo_variant,
)
from .weighting import WeightResult, compute_weights, contribution, load_weights
from .schema import DEFAULT_PARENT_MAP


@dataclass
class ExperimentConfig:
    dataset: ProjectDataset
    weights: WeightResult
    train: TrainConfig
    match_cfg: MatchConfig = field(default_factory=MatchConfig)
    reward_params: RewardParams = field(default_factory=RewardParams)
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    n_eval_rollouts: int = 10
    epsilons: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3])
    disturb_months: list[int] = field(default_factory=lambda: [7, 8, 9])


def load_experiment(path) -> ExperimentConfig:
    """Build an ExperimentConfig from a JSON experiment file.

    The dataset may be a path to a dataset.json or an inline synthetic
    block {"synthetic": {...}, "seed": n}; weights may be a weights.json
    path or absent, in which case they are computed from the dataset with
    the default parent map.
    """
    path = Path(path)
    with open(path) as f:
        raw = json.load(f)

    ds_spec = raw["dataset"]
    if isinstance(ds_spec, dict):
        cfg = SynthConfig(**ds_spec.get("synthetic", {}))
        dataset = generate_synthetic(cfg, seed=ds_spec.get("seed", 0))
    else:
        ds_path = Path(ds_spec)
        if not ds_path.is_absolute():
            ds_path = path.parent / ds_path
        dataset = load_dataset(ds_path)

    if "weights" in raw and raw["weights"]:
        w_path = Path(raw["weights"])
        if not w_path.is_absolute():
            w_path = path.parent / w_path
        weights = load_weights(w_path)
    else:
        parents = raw.get("parents")
        if parents is None:
            parents = {
                c: p for c, p in DEFAULT_PARENT_MAP.items()
                if c in dataset.schema and p in dataset.schema
            }
        weights = compute_weights(dataset, parents, bins=raw.get("bins", 10))

    env_block = dict(raw.get("env", {}))
    horizon = env_block.pop("horizon", 18)
    sigma = env_block.pop("sigma", 0.5)
    match_cfg = MatchConfig(**env_block) if env_block else MatchConfig()

    train_block = dict(raw.get("train", {}))
    train_block.setdefault("horizon", horizon)
    train_cfg = TrainConfig(**train_block)

    eval_block = raw.get("eval", {})
    return ExperimentConfig(
        dataset=dataset,
        weights=weights,
        train=train_cfg,
        match_cfg=match_cfg,
        reward_params=RewardParams(sigma=sigma),
        seeds=eval_block.get("seeds", [0, 1, 2]),
        n_eval_rollouts=eval_block.get("n_eval_rollouts", 10),
        epsilons=eval_block.get("epsilons", [0.1, 0.2, 0.3]),
        disturb_months=eval_block.get("disturb_months", [7, 8, 9]),
    )


def _make_env(cfg: ExperimentConfig) -> MentorEnv:
    return build_env(
        cfg.dataset, cfg.weights.weights, cfg.train, cfg.match_cfg, cfg.reward_params
    )


def random_rollout(env: MentorEnv, rng: np.random.Generator) -> list[float]:
    """Uniform-random integer actions in [0, scale]; per-step contributions."""
    env.reset()
    for _ in range(env.horizon):
        action = rng.integers(0, env.scale.astype(np.int64) + 1)
        env.step(action)
    return list(env.step_contributions)


def policy_rollout(
    env: MentorEnv,
    actor: ActorParams,
    rng: np.random.Generator,
    disturb_months: tuple[int, ...] = (),
) -> tuple[list[float], list[float]]:
    """Roll a trained policy; disturb_months are 1-based months whose state
    observation is forced back to the initial value before acting.

    Returns (per-step contributions, per-step rewards).
    """
    state = env.reset()
    rewards = []
    for t in range(env.horizon):
        if (t + 1) in disturb_months:
            state = env.perturb_to_initial()
        out = actor_forward(actor, state.vector())
        sample = sample_action(out, rng, env.scale)
        outcome = env.step(sample.action)
        rewards.append(outcome.reward)
        state = outcome.next_state
    return list(env.step_contributions), rewards


def replay_real(trajectory: MonthlyTrajectory, weights: np.ndarray, horizon: int) -> list[float]:
    """Per-step contributions of a recorded trajectory, truncated or
    zero-padded to the horizon."""
    per_step = [contribution(weights, row) for row in trajectory.counts[:horizon]]
    per_step.extend([0.0] * (horizon - len(per_step)))
    return per_step


def _train_for_seed(cfg: ExperimentConfig, seed: int, episode_fn=train_episode,
                    epsilon: float | None = None) -> TrainResult:
    train_cfg = replace(cfg.train, seed=seed)
    if epsilon is not None:
        train_cfg = replace(train_cfg, epsilon=epsilon)
    return train(
        cfg.dataset,
        cfg.weights.weights,
        train_cfg,
        cfg.match_cfg,
        cfg.reward_params,
        episode_fn=episode_fn,
    )


def _eval_policy(cfg: ExperimentConfig, actor: ActorParams, seed: int) -> float:
    """Mean single-step contribution over n_eval_rollouts sampled rollouts."""
    env = _make_env(cfg)
    rng = np.random.default_rng(seed + 10_000)
    means = []
    for _ in range(cfg.n_eval_rollouts):
        contributions, _ = policy_rollout(env, actor, rng)
        means.append(float(np.mean(contributions)))
    return float(np.mean(means))


def final_contribution(result: TrainResult) -> float:
    """Mean step contribution over the last tenth of the learning curve."""
    tail = max(1, len(result.curve) // 10)
    return float(np.mean([row["mean_step_contribution"] for row in result.curve[-tail:]]))


def run_contribution_table(cfg: ExperimentConfig, methods=("mentor", "ppo_variant", "random", "real")) -> dict:
    """Per-method average single-step contribution over the seed set."""
    rows = []
    for method in methods:
        per_seed = []
        for seed in cfg.seeds:
            if method == "mentor":
                result = _train_for_seed(cfg, seed)
                per_seed.append(_eval_policy(cfg, result.actor, seed))
            elif method == "ppo_variant":
                result = _train_for_seed(cfg, seed, episode_fn=train_episode_ppo_variant)
                per_seed.append(_eval_policy(cfg, result.actor, seed))
            elif method == "random":
                env = _make_env(cfg)
                rng = np.random.default_rng(seed + 10_000)
                means = [
                    float(np.mean(random_rollout(env, rng)))
                    for _ in range(cfg.n_eval_rollouts)
                ]
                per_seed.append(float(np.mean(means)))
            elif method == "real":
                rng = np.random.default_rng(seed + 10_000)
                pool = cfg.dataset.trajectories
                picks = rng.choice(len(pool), size=min(cfg.n_eval_rollouts, len(pool)),
                                   replace=False)
                means = [
                    float(np.mean(replay_real(pool[i], cfg.weights.weights,
                                              cfg.train.horizon)))
                    for i in picks
                ]
                per_seed.append(float(np.mean(means)))
            else:
                raise ValueError(f"unknown method {method!r}")
        rows.append(
            {
                "method": method,
                "mean_single_step_contribution": float(np.mean(per_seed)),
                "stddev": float(np.std(per_seed)),
                "seeds": list(cfg.seeds),
                "per_seed": per_seed,
            }
        )
    return {"experiment": "contribution_table", "project": cfg.dataset.project, "rows": rows}


def run_epsilon_sweep(cfg: ExperimentConfig, epsilons: list[float] | None = None) -> dict:
    """Train one policy per clip range with shared seeds; report finals."""
    epsilons = list(epsilons if epsilons is not None else cfg.epsilons)
    rows = []
    curves = {}
    for eps in epsilons:
        finals = []
        curve_stack = []
        for seed in cfg.seeds:
            result = _train_for_seed(cfg, seed, epsilon=eps)
            finals.append(final_contribution(result))
            curve_stack.append([row["mean_step_contribution"] for row in result.curve])
        curves[eps] = np.mean(np.array(curve_stack), axis=0)
        rows.append(
            {
                "method": f"mentor(eps={eps})",
                "epsilon": eps,
                "mean_single_step_contribution": float(np.mean(finals)),
                "stddev": float(np.std(finals)),
                "seeds": list(cfg.seeds),
                "per_seed": finals,
            }
        )
    series = [
        {"episode": i, **{f"eps_{eps}": float(curves[eps][i]) for eps in epsilons}}
        for i in range(len(next(iter(curves.values()))))
    ]
    return {
        "experiment": "epsilon_sweep",
        "project": cfg.dataset.project,
        "rows": rows,
        "series": series,
    }


def run_intervention(cfg: ExperimentConfig, disturb_months: list[int] | None = None) -> dict:
    """Paired disturbed/undisturbed rollouts plus the REAL replay series."""
    disturb = tuple(disturb_months if disturb_months is not None else cfg.disturb_months)
    horizon = cfg.train.horizon
    for month in disturb:
        if month > horizon:
            raise ValueError(f"disturb month {month} beyond horizon {horizon}")
    undisturbed_stack, disturbed_stack, real_stack = [], [], []
    for seed in cfg.seeds:
        result = _train_for_seed(cfg, seed)
        env = _make_env(cfg)
        rng_a = np.random.default_rng(seed + 20_000)
        rng_b = np.random.default_rng(seed + 20_000)
        plain, _ = policy_rollout(env, result.actor, rng_a)
        disturbed, _ = policy_rollout(env, result.actor, rng_b, disturb_months=disturb)
        undisturbed_stack.append(plain)
        disturbed_stack.append(disturbed)
        rng_r = np.random.default_rng(seed + 20_000)
        pick = int(rng_r.integers(len(cfg.dataset.trajectories)))
        real_stack.append(
            replay_real(cfg.dataset.trajectories[pick], cfg.weights.weights, horizon)
        )
    series = [
        {
            "month": t + 1,
            "undisturbed": float(np.mean([s[t] for s in undisturbed_stack])),
            "disturbed": float(np.mean([s[t] for s in disturbed_stack])),
            "real": float(np.mean([s[t] for s in real_stack])),
        }
        for t in range(horizon)
    ]
    return {
        "experiment": "intervention",
        "project": cfg.dataset.project,
        "disturb_months": list(disturb),
        "series": series,
        "final_cumulative": {
            "undisturbed": float(np.mean([np.sum(s) for s in undisturbed_stack])),
            "disturbed": float(np.mean([np.sum(s) for s in disturbed_stack])),
            "real": float(np.mean([np.sum(s) for s in real_stack])),
        },
    }


def export_case_study(cfg: ExperimentConfig, contributor_id: str,
                      horizon: int | None = None) -> dict:
    """Monthly real vs recommended contribution series for one contributor."""
    horizon = horizon if horizon is not None else cfg.train.horizon
    by_id = {t.contributor_id: t for t in cfg.dataset.trajectories}
    if contributor_id not in by_id:
        raise KeyError(f"unknown contributor {contributor_id!r}")
    real = replay_real(by_id[contributor_id], cfg.weights.weights, horizon)
    train_cfg = replace(cfg.train, horizon=horizon)
    case_cfg = replace(cfg, train=train_cfg)
    result = _train_for_seed(case_cfg, cfg.seeds[0])
    env = _make_env(case_cfg)
    rng = np.random.default_rng(cfg.seeds[0] + 30_000)
    mentor, _ = policy_rollout(env, result.actor, rng)
    series = [
        {"month": t + 1, "real_contribution": real[t], "mentor_contribution": mentor[t]}
        for t in range(horizon)
    ]
    return {
        "experiment": "case_study",
        "project": cfg.dataset.project,
        "contributor_id": contributor_id,
        "series": series,
    }


def write_csv(path, rows: list[dict]) -> None:
    """Deterministic CSV: column order from the first row, repr floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("")
        return
    header = list(rows[0].keys())
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[k] for k in header)])


def write_report(report: dict, out_dir) -> list[Path]:
    """Write report.json plus one CSV per tabular/series block."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    report_path = out_dir / "report.json"
    with open(report_path, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
    written.append(report_path)
    name = report.get("experiment", "report")
    if "rows" in report:
        rows_path = out_dir / f"{name}_rows.csv"
        rows = [
            {k: v for k, v in row.items() if not isinstance(v, list)}
            for row in report["rows"]
        ]
        write_csv(rows_path, rows)
        written.append(rows_path)
    if "series" in report:
        series_path = out_dir / f"{name}_series.csv"
        write_csv(series_path, report["series"])
        written.append(series_path)
    return written

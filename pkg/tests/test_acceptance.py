"""End-to-end acceptance suite.

Each test covers one numbered acceptance criterion and prints a single
PASS/FAIL line (run with -s to see them). The directional training
criteria (6-8) run real training on the default synthetic environment and
take a few minutes combined; everything else is property-based and fast.
"""

import copy
import dataclasses
import math
import time

import numpy as np

from ossmentor.env import RewardParams, reward
from ossmentor.harness import (
    ExperimentConfig,
    final_contribution,
    random_rollout,
    run_contribution_table,
    run_intervention,
    write_report,
)
from ossmentor.policy import (
    actor_backward,
    actor_forward,
    critic_backward,
    critic_forward,
    init_actor,
    init_critic,
    log_prob_raw,
)
from ossmentor.schema import DEFAULT_PARENT_MAP
from ossmentor.synth import SynthConfig, generate_synthetic
from ossmentor.trainer import (
    TrainConfig,
    build_env,
    clipped_surrogate,
    train,
    train_episode_ppo_variant,
)
from ossmentor.weighting import (
    BinnedDistribution,
    JointBinnedDistribution,
    compute_weights,
    conditional_entropy,
    contribution,
    shannon_entropy,
)
from tests.test_weighting import dataset_from_columns, oracle_weights


def _report(number, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number}: {status} ({detail})")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_01_entropy_suite():
    start = time.perf_counter()
    uniform4 = BinnedDistribution(
        bin_edges=np.arange(3), probabilities=np.full(4, 0.25)
    )
    ok = shannon_entropy(uniform4) == 2.0
    # Y = X: deterministic diagonal joint
    diag = JointBinnedDistribution(probabilities=np.eye(6) / 6.0)
    ok &= abs(conditional_entropy(diag)) <= 1e-12
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        shape = (int(rng.integers(2, 6)), int(rng.integers(2, 6)))
        p = rng.uniform(0.0, 1.0, size=shape)
        p /= p.sum()
        joint = JointBinnedDistribution(probabilities=p)
        marginal_y = BinnedDistribution(
            bin_edges=np.arange(shape[1] - 1), probabilities=p.sum(axis=0)
        )
        worst = max(worst, conditional_entropy(joint) - shannon_entropy(marginal_y))
    ok &= worst <= 1e-12
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    _report(1, ok, f"max H(Y|X)-H(Y) over 1000 joints = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_weight_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    ok = True
    # simplex properties across assorted datasets
    datasets = [
        generate_synthetic(SynthConfig(), seed=0),
        dataset_from_columns([rng.poisson(3.0, 120), rng.poisson(7.0, 120)]),
        dataset_from_columns([[5] * 40, rng.poisson(2.0, 40), rng.poisson(9.0, 40)]),
    ]
    for ds in datasets:
        parents = {
            c: p for c, p in DEFAULT_PARENT_MAP.items()
            if c in ds.schema and p in ds.schema
        }
        w = compute_weights(ds, parents).weights
        ok &= abs(w.sum() - 1.0) < 1e-9 and (w >= 0.0).all()
    # forced case: constant dim + exactly uniform dim
    forced = compute_weights(
        dataset_from_columns([[7] * 50, list(range(5)) * 10]), {}, bins=5
    )
    ok &= np.allclose(forced.weights, [1.0, 0.0], atol=1e-12)
    # conditional weights vs independent brute-force oracle on 3 dims
    parent = rng.poisson(5.0, 300)
    child = rng.poisson(1.0 + 2.0 * parent)
    other = rng.poisson(2.0, 300)
    ds3 = dataset_from_columns(
        [parent, child, other], schema=["open_issue", "issue_comment", "close_issue"]
    )
    pm = {"issue_comment": "open_issue"}
    got = compute_weights(ds3, pm, bins=10)
    want_w, want_h = oracle_weights(ds3, pm, bins=10)
    gap = float(np.abs(got.weights - np.array(want_w)).max())
    ok &= gap < 1e-9
    ok &= np.allclose(got.entropies, want_h, atol=1e-9)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 5.0
    _report(2, ok, f"oracle gap {gap:.2e}, {elapsed:.2f}s")


def test_criterion_03_reward_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    params = RewardParams(sigma=0.5)
    worst = 0.0
    ok = True
    for _ in range(1000):
        m = int(rng.integers(2, 8))
        w = rng.dirichlet(np.ones(m))
        a = rng.integers(0, 30, m).astype(float)
        r, sim = reward(a, a, w, params)
        worst = max(worst, abs(r - float(w @ a)))
        ok &= sim == 1.0
    ok &= worst <= 1e-12
    # zero action pays zero regardless of the match
    r0, _ = reward(np.zeros(3), rng.integers(0, 9, 3).astype(float),
                   np.full(3, 1 / 3), params)
    ok &= r0 == 0.0
    # monotone decrease over a sorted-distance sequence
    a_d = np.array([1.0, 1.0])
    w2 = np.array([0.5, 0.5])
    sims = [reward(a_d, a_d - d, w2, params)[1] for d in np.linspace(0, 1.5, 16)]
    ok &= all(x > y for x, y in zip(sims, sims[1:]))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    _report(3, ok, f"max |r(a,a)-W.a| = {worst:.2e}, {elapsed:.2f}s")


def _fd_check(objective, params, name, idx, analytic, h=1e-5):
    plus = dataclasses.replace(params, **{name: getattr(params, name).copy()})
    minus = dataclasses.replace(params, **{name: getattr(params, name).copy()})
    getattr(plus, name)[idx] += h
    getattr(minus, name)[idx] -= h
    numeric = (objective(plus) - objective(minus)) / (2.0 * h)
    return abs(analytic - numeric) <= 1e-4 * max(abs(analytic), abs(numeric)) + 1e-8


def _nudged(params, state, forward_z):
    # keep hidden pre-activations away from the ReLU kink so the finite
    # difference stays on one linear piece
    z = forward_z(params, state)
    fixed = dataclasses.replace(params, b1=params.b1.copy())
    fixed.b1[np.abs(z) < 1e-3] += 5e-3
    return fixed


def test_criterion_04_gradient_check():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    state_dim, m = 7, 6
    ok = True
    for _ in range(20):
        state = rng.uniform(0.0, 1.0, state_dim)

        actor = init_actor(state_dim, m, rng)
        actor = _nudged(actor, state, lambda p, s: p.w1 @ s + p.b1)
        out = actor_forward(actor, state)
        raw = rng.normal(out.mean, np.sqrt(out.variance))
        upstream = float(rng.normal())
        grads = actor_backward(actor, state, raw, upstream)

        def actor_obj(p):
            return upstream * log_prob_raw(actor_forward(p, state), raw)

        for name, g in grads.arrays().items():
            for idx in np.ndindex(g.shape):
                ok &= _fd_check(actor_obj, actor, name, idx, g[idx])

        critic = init_critic(state_dim, rng)
        critic = _nudged(critic, state, lambda p, s: p.w1 @ s + p.b1)
        up_c = float(rng.normal())
        cg = critic_backward(critic, state, up_c)

        def critic_obj(p):
            return up_c * critic_forward(p, state)

        for name in ("w1", "b1", "w2"):
            g = getattr(cg, name)
            for idx in np.ndindex(g.shape):
                ok &= _fd_check(critic_obj, critic, name, idx, g[idx])
        ok &= abs(cg.b2 - up_c) <= 1e-12
        if not ok:
            break
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    _report(4, ok, f"20 instances, every parameter, {elapsed:.2f}s")


def test_criterion_05_clip_objective():
    base = -1.0
    ok = clipped_surrogate(base, base, 2.0, epsilon=0.3) == 2.0
    ok &= abs(clipped_surrogate(base + math.log(2.0), base, 1.0, 0.3) - 1.3) <= 1e-12
    ok &= abs(clipped_surrogate(base + math.log(0.5), base, -1.0, 0.3) - (-0.7)) <= 1e-12
    rng = np.random.default_rng(4)
    worst = -math.inf
    for _ in range(10_000):
        lp_new, lp_old = rng.normal(-2.0, 1.0, 2)
        adv = float(rng.normal())
        eps = float(rng.uniform(0.05, 0.5))
        ratio = math.exp(lp_new - max(lp_old, math.log(1e-5)))
        s = clipped_surrogate(lp_new, lp_old, adv, eps)
        worst = max(worst, s - ratio * adv)
    ok &= worst <= 1e-12
    _report(5, ok, f"exact examples + max surrogate-excess {worst:.2e} over 10k draws")


def _default_setup():
    dataset = generate_synthetic(SynthConfig(), seed=0)
    weights = compute_weights(dataset, DEFAULT_PARENT_MAP)
    return dataset, weights


def test_criterion_06_training_beats_random():
    start = time.perf_counter()
    dataset, weights = _default_setup()
    ratios = []
    for seed in (0, 1, 2):
        cfg = TrainConfig(episodes=500, seed=seed)
        result = train(dataset, weights.weights, cfg)
        mentor = final_contribution(result)
        env = build_env(dataset, weights.weights, cfg)
        rng = np.random.default_rng(seed + 10_000)
        baseline = float(np.mean(
            [np.mean(random_rollout(env, rng)) for _ in range(10)]
        ))
        ratios.append(mentor / baseline)
    mean_ratio = float(np.mean(ratios))
    elapsed = time.perf_counter() - start
    ok = mean_ratio >= 1.5 and elapsed < 300.0
    _report(6, ok, f"mentor/random = {mean_ratio:.2f} over 3 seeds, {elapsed:.0f}s")


def test_criterion_07_batch_update_beats_per_episode():
    start = time.perf_counter()
    dataset, weights = _default_setup()
    mentor_finals, ppo_finals = [], []
    for seed in range(5):
        cfg = TrainConfig(episodes=100, seed=seed)
        mentor_finals.append(final_contribution(train(dataset, weights.weights, cfg)))
        ppo_finals.append(final_contribution(train(
            dataset, weights.weights, cfg, episode_fn=train_episode_ppo_variant
        )))
    mentor_mean = float(np.mean(mentor_finals))
    ppo_mean = float(np.mean(ppo_finals))
    elapsed = time.perf_counter() - start
    ok = mentor_mean >= ppo_mean and elapsed < 600.0
    _report(7, ok, f"batch-update {mentor_mean:.2f} vs per-episode {ppo_mean:.2f}, "
                   f"5 paired seeds, {elapsed:.0f}s")


def _experiment_config(episodes=100):
    dataset, weights = _default_setup()
    return ExperimentConfig(
        dataset=dataset,
        weights=weights,
        train=TrainConfig(episodes=episodes),
        seeds=[0, 1, 2],
        n_eval_rollouts=5,
    )


def test_criterion_08_disturbed_policy_beats_real_replay():
    cfg = _experiment_config()
    report = run_intervention(cfg)  # default disturb months {7, 8, 9}
    final = report["final_cumulative"]
    ok = final["disturbed"] >= final["real"]
    # empty disturb set: the paired runs agree exactly month by month
    noop = run_intervention(cfg, disturb_months=[])
    ok &= all(r["disturbed"] == r["undisturbed"] for r in noop["series"])
    _report(8, ok, f"disturbed {final['disturbed']:.1f} >= real {final['real']:.1f}; "
                   f"empty disturbance exactly inert")


def test_criterion_09_cumulative_conservation():
    dataset, weights = _default_setup()
    cfg = TrainConfig(episodes=0)
    env = build_env(dataset, weights.weights, cfg)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10):
        env.reset()
        logged = []
        for _ in range(env.horizon):
            action = rng.integers(0, env.scale.astype(np.int64) + 1).astype(float)
            logged.append(action)
            env.step(action)
        prefix = np.cumsum([contribution(weights.weights, a) for a in logged])
        worst = max(worst, abs(env.hist_cumulative - prefix[-1]))
        worst = max(
            worst,
            float(np.abs(np.cumsum(env.step_contributions) - prefix).max()),
        )
    ok = worst <= 1e-9
    _report(9, ok, f"max |env cumulative - metric prefix sum| = {worst:.2e}")


def test_criterion_10_csv_determinism(tmp_path):
    dataset, weights = _default_setup()
    cfg = ExperimentConfig(
        dataset=dataset,
        weights=weights,
        train=TrainConfig(episodes=10),
        seeds=[0, 1],
        n_eval_rollouts=3,
    )
    runs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        write_report(run_contribution_table(cfg), out)
        write_report(run_intervention(copy.deepcopy(cfg), disturb_months=[3]),
                     out / "intervention")
        runs.append(out)
    ok = True
    for rel in ("contribution_table_rows.csv", "report.json",
                "intervention/intervention_series.csv", "intervention/report.json"):
        ok &= (runs[0] / rel).read_bytes() == (runs[1] / rel).read_bytes()
    _report(10, ok, "rerun with identical config and seeds is byte-identical")

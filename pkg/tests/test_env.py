import math

import numpy as np
import pytest

from ossmentor.env import (
    EnvState,
    MatchConfig,
    MentorEnv,
    RewardParams,
    build_pool_index,
    expected_action,
    match_contributor_actions,
    perturb_state,
    reward,
)
from ossmentor.weighting import contribution
from tests.conftest import make_pool, make_trajectory

W2 = np.array([0.5, 0.5])


def two_contributor_pool():
    a = make_trajectory("a", [[2, 2], [4, 4], [6, 6]])
    b = make_trajectory("b", [[0, 2], [2, 4], [4, 8]])
    return make_pool(W2, a, b)


# --- reset -------------------------------------------------------------------

def test_reset_long_term_zero():
    env = MentorEnv(two_contributor_pool(), W2, horizon=3)
    state = env.reset()
    assert state.long_term == 0.0
    assert state.month_index == 0


def test_reset_single_contributor_short_term():
    pool = make_pool(W2, make_trajectory("a", [[3, 4], [5, 6]]))
    env = MentorEnv(pool, W2, horizon=2)
    state = env.reset()
    # scale is the per-dim max over the pool: (5, 6)
    assert np.allclose(state.short_term, [3 / 5, 4 / 6])


def test_reset_short_term_matches_mean_oracle(synth_dataset, synth_weights):
    from ossmentor.ingest import ContributorPool
    from ossmentor.weighting import annotate_pool

    pool = annotate_pool(
        ContributorPool(schema=synth_dataset.schema, trajectories=synth_dataset.trajectories),
        synth_weights.weights,
    )
    env = MentorEnv(pool, synth_weights.weights, horizon=18)
    state = env.reset()
    firsts = np.array([t.counts[0] for t in pool.trajectories], dtype=float)
    expected = firsts.sum(axis=0) / len(pool.trajectories) / env.scale
    assert np.allclose(state.short_term, np.clip(expected, 0, 1), atol=1e-12)


# --- matching ----------------------------------------------------------------

def test_match_exact_level_included():
    index = build_pool_index(two_contributor_pool())
    # contributor a's first-month cumulative is exactly 2
    matches = match_contributor_actions(2.0, index, MatchConfig(k0=0.05))
    assert any(np.array_equal(row, [2, 2]) for row in matches)


def test_match_k0_one_returns_whole_pool():
    index = build_pool_index(two_contributor_pool())
    matches = match_contributor_actions(5.0, index, MatchConfig(k0=1.0))
    assert len(matches) == len(index.cumulative)


def test_match_relaxation_round_arithmetic():
    # pool cumulative levels {0-ish gap}: entries at 1 and 100; range 99
    low = make_trajectory("low", [[2, 0]])
    high = make_trajectory("high", [[200, 0]])
    pool = make_pool(np.array([0.5, 0.5]), low, high)
    index = build_pool_index(pool)
    assert np.allclose(sorted(index.cumulative), [1.0, 100.0])
    # query 200: nearest gap 100, K0 = 0.05 * 99 = 4.95
    gap, k0 = 100.0, 0.05 * 99.0
    rounds_needed = math.ceil(math.log2(gap / k0))  # expansions after round 1
    matches = match_contributor_actions(
        200.0, index, MatchConfig(k0=0.05, growth=2.0, max_rounds=rounds_needed + 1)
    )
    assert len(matches) == 1 and matches[0][0] == 200
    # one round fewer cannot reach it: full-pool fallback
    fallback = match_contributor_actions(
        200.0, index, MatchConfig(k0=0.05, growth=2.0, max_rounds=rounds_needed)
    )
    assert len(fallback) == 2


def test_match_never_empty():
    index = build_pool_index(two_contributor_pool())
    matches = match_contributor_actions(1e9, index, MatchConfig(k0=0.01, max_rounds=3))
    assert len(matches) > 0


# --- expected action -----------------------------------------------------------

def test_expected_action_examples():
    assert np.allclose(expected_action(np.array([[2.0, 4.0]])), [2, 4])
    assert np.allclose(expected_action(np.array([[0.0, 0.0], [2.0, 4.0]])), [1, 2])


def test_expected_action_empty_errors():
    with pytest.raises(ValueError):
        expected_action(np.empty((0, 2)))


def test_expected_action_matches_mean_oracle():
    rng = np.random.default_rng(8)
    vectors = rng.integers(0, 30, size=(50, 4)).astype(float)
    expected = [sum(vectors[:, j]) / 50 for j in range(4)]
    assert np.allclose(expected_action(vectors), expected, atol=1e-12)


# --- reward --------------------------------------------------------------------

def test_reward_identical_actions_full_similarity():
    a = np.array([6.0, 4.0])
    r, sim = reward(a, a, W2, RewardParams(sigma=0.5))
    assert sim == pytest.approx(1.0)
    assert r == pytest.approx(float(W2 @ a))


def test_reward_zero_action_zero_reward():
    r, sim = reward(np.zeros(2), np.array([3.0, 5.0]), W2, RewardParams())
    assert r == 0.0
    assert 0.0 < sim <= 1.0


def test_reward_hand_computation():
    # normalized actions, sigma=1: lambda=0.5, distance ||(1,0)*(0.5,0.5)||^2=0.25
    r, sim = reward(np.array([1.0, 0.0]), np.zeros(2), W2, RewardParams(sigma=1.0))
    assert sim == pytest.approx(math.exp(-0.125), abs=1e-15)
    assert r == pytest.approx(0.5 * math.exp(-0.125), abs=1e-15)


def test_reward_bounds_over_random_draws():
    rng = np.random.default_rng(9)
    params = RewardParams(sigma=0.5)
    for _ in range(300):
        w = rng.dirichlet(np.ones(4))
        a_d = rng.integers(0, 20, 4).astype(float)
        a_e = rng.integers(0, 20, 4).astype(float)
        scale = np.maximum(np.maximum(a_d, a_e), 1.0)
        r, sim = reward(a_d, a_e, w, params, scale)
        assert 0.0 <= r <= float(w @ a_d) + 1e-12
        assert 0.0 < sim <= 1.0


def test_reward_monotone_in_weighted_distance():
    params = RewardParams(sigma=0.5)
    a_d = np.array([1.0, 1.0])
    sims = []
    for delta in np.linspace(0.0, 1.0, 11):
        _, sim = reward(a_d, a_d - delta, W2, params)
        sims.append(sim)
    assert all(s1 > s2 for s1, s2 in zip(sims, sims[1:]))


def test_reward_length_mismatch():
    with pytest.raises(ValueError):
        reward(np.ones(3), np.ones(2), W2, RewardParams())


# --- step ----------------------------------------------------------------------

def manual_trace(pool, weights, actions, k0=0.05, growth=2.0, max_rounds=16, sigma=0.5):
    """Independent step-by-step simulation with explicit loops."""
    entries = []
    for t in pool.trajectories:
        acc = 0.0
        for row in t.counts:
            acc += sum(w * c for w, c in zip(weights, row))
            entries.append((acc, [float(c) for c in row]))
    scale = [max(max(e[1][j] for e in entries), 1.0) for j in range(len(weights))]
    spread = max(e[0] for e in entries) - min(e[0] for e in entries)
    lam = 1.0 / (2.0 * sigma**2)

    def match(level):
        k = k0 * (spread if spread > 0 else 1.0)
        for _ in range(max_rounds):
            hits = [e[1] for e in entries if abs(e[0] - level) <= k]
            if hits:
                return hits
            k *= growth
        return [e[1] for e in entries]

    hist = 0.0
    outcomes = []
    for a_d in actions:
        hits = match(hist)
        a_e = [round(sum(h[j] for h in hits) / len(hits)) for j in range(len(weights))]
        dist = sum(
            (((a_d[j] - a_e[j]) / scale[j]) * weights[j]) ** 2 for j in range(len(weights))
        )
        sim = math.exp(-lam * dist)
        r = sum(w * a for w, a in zip(weights, a_d)) * sim
        hist += sum(w * a for w, a in zip(weights, a_d))
        outcomes.append((r, sim, a_e, hist))
    return outcomes


def test_scripted_rollout_matches_hand_trace():
    pool = two_contributor_pool()
    env = MentorEnv(pool, W2, horizon=3)
    env.reset()
    actions = [[2.0, 2.0], [4.0, 4.0], [0.0, 6.0]]
    expected = manual_trace(pool, W2, actions)
    for a_d, (r, sim, a_e, hist) in zip(actions, expected):
        outcome = env.step(np.array(a_d))
        assert outcome.reward == pytest.approx(r, abs=1e-12)
        assert outcome.similarity == pytest.approx(sim, abs=1e-12)
        assert np.allclose(outcome.matched_action, a_e)
        assert env.hist_cumulative == pytest.approx(hist, abs=1e-12)
    # frozen spot check from the hand computation of step 1
    assert expected[0][0] == pytest.approx(2.0 * math.exp(-1.0 / 18.0), abs=1e-12)


def test_step_done_at_horizon():
    env = MentorEnv(two_contributor_pool(), W2, horizon=1)
    env.reset()
    outcome = env.step(np.array([1.0, 1.0]))
    assert outcome.done
    with pytest.raises(RuntimeError):
        env.step(np.array([1.0, 1.0]))


def test_step_zero_action():
    env = MentorEnv(two_contributor_pool(), W2, horizon=3)
    state = env.reset()
    outcome = env.step(np.zeros(2))
    assert outcome.reward == 0.0
    assert outcome.next_state.long_term == state.long_term


def test_step_before_reset_errors():
    env = MentorEnv(two_contributor_pool(), W2, horizon=3)
    with pytest.raises(RuntimeError):
        env.step(np.zeros(2))


def test_cumulative_conservation():
    env = MentorEnv(two_contributor_pool(), W2, horizon=5)
    env.reset()
    rng = np.random.default_rng(4)
    for _ in range(5):
        env.step(rng.integers(0, 7, size=2).astype(float))
    acc = 0.0
    for c in env.step_contributions:
        acc += c
    assert env.hist_cumulative == pytest.approx(acc, abs=1e-12)
    assert env.state.long_term == pytest.approx(acc / env.index.cum_norm, abs=1e-12)


def test_single_contributor_mirror_reward_equals_contribution():
    # constant monthly action: matching the contributor's own records step
    # by step pays exactly the annotated per-step contribution
    traj = make_trajectory("solo", [[4, 2]] * 6)
    pool = make_pool(W2, traj)
    env = MentorEnv(pool, W2, horizon=6)
    env.reset()
    rewards = []
    for _ in range(6):
        matches = match_contributor_actions(
            env.hist_cumulative, env.index, env.match_cfg
        )
        a_d = np.rint(expected_action(matches))
        rewards.append(env.step(a_d).reward)
    annotated = pool.trajectories[0]
    per_step = np.diff(np.concatenate([[0.0], annotated.cumulative]))
    assert np.allclose(rewards, per_step, atol=1e-12)


# --- perturbation ----------------------------------------------------------------

def test_perturb_resets_features_keeps_month():
    initial = EnvState(short_term=np.array([0.1, 0.2]), long_term=0.0, month_index=0)
    later = EnvState(short_term=np.array([0.8, 0.9]), long_term=0.5, month_index=7)
    out = perturb_state(later, initial)
    assert np.allclose(out.short_term, initial.short_term)
    assert out.long_term == initial.long_term
    assert out.month_index == 7


def test_perturb_initial_is_identity():
    initial = EnvState(short_term=np.array([0.1, 0.2]), long_term=0.0, month_index=0)
    out = perturb_state(initial, initial)
    assert np.allclose(out.short_term, initial.short_term)
    assert out.long_term == initial.long_term
    assert out.month_index == initial.month_index


def test_perturbed_match_uses_recorded_history():
    pool = two_contributor_pool()
    env_a = MentorEnv(pool, W2, horizon=4)
    env_b = MentorEnv(pool, W2, horizon=4)
    actions = [np.array([2.0, 2.0]), np.array([4.0, 4.0])]
    env_a.reset()
    env_b.reset()
    for a in actions:
        out_a = env_a.step(a)
        out_b = env_b.step(a)
    env_b.perturb_to_initial()
    # observation reset, history intact
    assert env_b.state.long_term == 0.0
    assert env_b.hist_cumulative == pytest.approx(env_a.hist_cumulative)
    # the next match keys on history: both branches see the same expert action
    next_a = env_a.step(np.array([1.0, 1.0]))
    next_b = env_b.step(np.array([1.0, 1.0]))
    assert np.allclose(next_a.matched_action, next_b.matched_action)
    assert next_a.reward == pytest.approx(next_b.reward)

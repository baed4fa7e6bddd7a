"""Gaussian actor and value critic with hand-derived gradients.

Both networks share the layout: one ReLU hidden layer of 64 units. The
actor emits a tanh-bounded mean and a softplus-positive variance per
action dimension; actions are drawn from the diagonal Gaussian on the raw
(pre-squash) scale and mapped to integer counts only at the environment
boundary, so the log-density stays well defined.

Backward passes return exact analytic gradients; the matrix work runs on
the selected kernel backend (compiled or pure numpy).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels

HIDDEN = 64


@dataclass
class ActorParams:
    w1: np.ndarray  # (hidden, state_dim)
    b1: np.ndarray  # (hidden,)
    w_mean: np.ndarray  # (m, hidden)
    b_mean: np.ndarray  # (m,)
    w_var: np.ndarray  # (m, hidden)
    b_var: np.ndarray  # (m,)

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "w1": self.w1, "b1": self.b1,
            "w_mean": self.w_mean, "b_mean": self.b_mean,
            "w_var": self.w_var, "b_var": self.b_var,
        }


@dataclass
class CriticParams:
    w1: np.ndarray  # (hidden, state_dim)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    def arrays(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2,
                "b2": np.array([self.b2])}


@dataclass
class PolicyOutput:
    mean: np.ndarray  # (m,), in (-1, 1)
    variance: np.ndarray  # (m,), > 0


@dataclass
class ActionSample:
    action: np.ndarray  # integer counts handed to the environment
    raw: np.ndarray  # the pre-squash Gaussian draw
    log_prob: float


def _uniform_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_actor(state_dim: int, action_dim: int, rng: np.random.Generator) -> ActorParams:
    return ActorParams(
        w1=_uniform_init(rng, (HIDDEN, state_dim), state_dim),
        b1=_uniform_init(rng, (HIDDEN,), state_dim),
        w_mean=_uniform_init(rng, (action_dim, HIDDEN), HIDDEN),
        b_mean=_uniform_init(rng, (action_dim,), HIDDEN),
        w_var=_uniform_init(rng, (action_dim, HIDDEN), HIDDEN),
        b_var=_uniform_init(rng, (action_dim,), HIDDEN),
    )


def init_critic(state_dim: int, rng: np.random.Generator) -> CriticParams:
    return CriticParams(
        w1=_uniform_init(rng, (HIDDEN, state_dim), state_dim),
        b1=_uniform_init(rng, (HIDDEN,), state_dim),
        w2=_uniform_init(rng, (HIDDEN,), HIDDEN),
        b2=float(_uniform_init(rng, (), HIDDEN)),
    )


# softplus is strictly positive in exact arithmetic; the floor keeps the
# variance away from an exact float-underflow zero
VAR_FLOOR = 1e-8


def softplus(x: np.ndarray) -> np.ndarray:
    # numerically stable log(1 + exp(x))
    return np.maximum(np.logaddexp(0.0, x), VAR_FLOOR)


def actor_forward(params: ActorParams, state: np.ndarray) -> PolicyOutput:
    """mean = tanh(head), variance = softplus(head) over a shared ReLU layer."""
    state = np.ascontiguousarray(state, dtype=float)
    _, _, mean_pre, var_pre = _kernels.two_head_forward(
        state, params.w1, params.b1, params.w_mean, params.b_mean,
        params.w_var, params.b_var,
    )
    return PolicyOutput(mean=np.tanh(mean_pre), variance=softplus(var_pre))


def log_prob_raw(output: PolicyOutput, raw: np.ndarray) -> float:
    """Diagonal-Gaussian log-density of a raw sample."""
    var = output.variance
    diff = raw - output.mean
    return float(-0.5 * np.sum(np.log(2.0 * np.pi * var) + diff**2 / var))


def sample_action(
    output: PolicyOutput, rng: np.random.Generator, scale: np.ndarray
) -> ActionSample:
    """Draw a raw Gaussian action and map it to integer monthly counts.

    The raw draw lives on the tanh scale; counts are round(clip((x+1)/2,
    0, 1) * scale). log_prob is the density of the raw draw.
    """
    scale = np.asarray(scale, dtype=float)
    if np.any(scale <= 0.0):
        raise ValueError("scale entries must be positive")
    raw = rng.normal(output.mean, np.sqrt(output.variance))
    counts = np.rint(np.clip((raw + 1.0) / 2.0, 0.0, 1.0) * scale)
    return ActionSample(action=counts, raw=raw, log_prob=log_prob_raw(output, raw))


@dataclass
class ActorGrads:
    w1: np.ndarray
    b1: np.ndarray
    w_mean: np.ndarray
    b_mean: np.ndarray
    w_var: np.ndarray
    b_var: np.ndarray

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "w1": self.w1, "b1": self.b1,
            "w_mean": self.w_mean, "b_mean": self.b_mean,
            "w_var": self.w_var, "b_var": self.b_var,
        }


@dataclass
class CriticGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


def actor_backward(
    params: ActorParams, state: np.ndarray, raw: np.ndarray, upstream: float
) -> ActorGrads:
    """Gradient of upstream * log_prob(raw) w.r.t. every actor parameter.

    Chains the Gaussian score through the tanh mean head and softplus
    variance head, then through the shared hidden layer.
    """
    state = np.ascontiguousarray(state, dtype=float)
    z, h, mean_pre, var_pre = _kernels.two_head_forward(
        state, params.w1, params.b1, params.w_mean, params.b_mean,
        params.w_var, params.b_var,
    )
    mean = np.tanh(mean_pre)
    var = softplus(var_pre)
    diff = raw - mean
    d_mean = diff / var  # d log_prob / d mean
    d_var = (diff**2 - var) / (2.0 * var**2)  # d log_prob / d variance
    d_mean_pre = upstream * d_mean * (1.0 - mean**2)
    sigmoid = 1.0 / (1.0 + np.exp(-var_pre))
    d_var_pre = upstream * d_var * sigmoid
    g_w1, g_b1, g_wm, g_bm, g_wv, g_bv = _kernels.two_head_backward(
        state, z, h, np.ascontiguousarray(d_mean_pre), np.ascontiguousarray(d_var_pre),
        params.w_mean, params.w_var,
    )
    return ActorGrads(w1=g_w1, b1=g_b1, w_mean=g_wm, b_mean=g_bm, w_var=g_wv, b_var=g_bv)


def critic_forward(params: CriticParams, state: np.ndarray) -> float:
    state = np.ascontiguousarray(state, dtype=float)
    _, _, v = _kernels.one_head_forward(state, params.w1, params.b1, params.w2, params.b2)
    return float(v)


def critic_backward(params: CriticParams, state: np.ndarray, upstream: float) -> CriticGrads:
    """Gradient of upstream * V(state) w.r.t. every critic parameter."""
    state = np.ascontiguousarray(state, dtype=float)
    z, h, _ = _kernels.one_head_forward(state, params.w1, params.b1, params.w2, params.b2)
    g_w1, g_b1, g_w2, g_b2 = _kernels.one_head_backward(state, z, h, float(upstream), params.w2)
    return CriticGrads(w1=g_w1, b1=g_b1, w2=g_w2, b2=float(g_b2))


def save_checkpoint(actor: ActorParams, critic: CriticParams, path) -> None:
    """Portable JSON checkpoint: named tensors with explicit shapes."""
    def pack(arrays):
        return {
            name: {"shape": list(a.shape), "data": np.asarray(a).ravel().tolist()}
            for name, a in arrays.items()
        }

    with open(path, "w") as f:
        json.dump({"actor": pack(actor.arrays()), "critic": pack(critic.arrays())}, f)


def load_checkpoint(path) -> tuple[ActorParams, CriticParams]:
    with open(path) as f:
        data = json.load(f)

    def unpack(block, name):
        entry = block[name]
        return np.asarray(entry["data"], dtype=float).reshape(entry["shape"])

    actor = ActorParams(
        w1=unpack(data["actor"], "w1"), b1=unpack(data["actor"], "b1"),
        w_mean=unpack(data["actor"], "w_mean"), b_mean=unpack(data["actor"], "b_mean"),
        w_var=unpack(data["actor"], "w_var"), b_var=unpack(data["actor"], "b_var"),
    )
    critic = CriticParams(
        w1=unpack(data["critic"], "w1"), b1=unpack(data["critic"], "b1"),
        w2=unpack(data["critic"], "w2"), b2=float(unpack(data["critic"], "b2")[0]),
    )
    return actor, critic

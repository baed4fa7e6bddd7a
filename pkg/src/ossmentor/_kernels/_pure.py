"""Numpy reference implementation of the MLP kernels.

All kernels operate on a single input vector (the networks here are tiny
and called once per environment step, so there is no batching dimension).

``two_head_forward`` computes one shared ReLU hidden layer followed by two
linear heads; ``one_head_forward`` is the single-head (critic) variant with
a vector head producing a scalar. The backward kernels return gradients of
a scalar loss with respect to every parameter, given the gradients with
respect to the head pre-activations.
"""

import numpy as np


def two_head_forward(x, w1, b1, wa, ba, wb, bb):
    """Return (z, h, a, b): hidden pre-activation, hidden, and both heads."""
    z = w1 @ x + b1
    h = np.maximum(z, 0.0)
    return z, h, wa @ h + ba, wb @ h + bb


def two_head_backward(x, z, h, da, db, wa, wb):
    """Backprop through both heads and the shared hidden layer.

    da, db are gradients w.r.t. the two head pre-activations.
    Returns (g_w1, g_b1, g_wa, g_ba, g_wb, g_bb).
    """
    g_wa = np.outer(da, h)
    g_wb = np.outer(db, h)
    dh = wa.T @ da + wb.T @ db
    dz = np.where(z > 0.0, dh, 0.0)
    g_w1 = np.outer(dz, x)
    return g_w1, dz, g_wa, da.copy(), g_wb, db.copy()


def one_head_forward(x, w1, b1, w2, b2):
    """Return (z, h, v) for a single hidden layer and a scalar head."""
    z = w1 @ x + b1
    h = np.maximum(z, 0.0)
    return z, h, float(w2 @ h + b2)


def one_head_backward(x, z, h, dv, w2):
    """Backprop a scalar head gradient dv. Returns (g_w1, g_b1, g_w2, g_b2)."""
    g_w2 = dv * h
    dz = np.where(z > 0.0, dv * w2, 0.0)
    g_w1 = np.outer(dz, x)
    return g_w1, dz, g_w2, dv

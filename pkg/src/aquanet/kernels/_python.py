"""Pure numpy implementations of the hot kernels.

These are the reference versions: the compiled module in ``_ckernels`` must
agree with them to rounding error.
"""

import numpy as np


def lstm_gates_forward(z, c_prev):
    """Activate stacked gate pre-activations ``z = [f | i | c~ | o]``.

    Returns ``(gates, c, tanh_c, h)`` where ``gates`` holds the activated
    values in the same layout as ``z``.
    """
    H = c_prev.shape[1]
    gates = np.empty_like(z)
    s = z[:, :2 * H]
    gates[:, :2 * H] = _sigmoid(s)
    gates[:, 2 * H:3 * H] = np.tanh(z[:, 2 * H:3 * H])
    gates[:, 3 * H:] = _sigmoid(z[:, 3 * H:])
    f = gates[:, :H]
    i = gates[:, H:2 * H]
    g = gates[:, 2 * H:3 * H]
    o = gates[:, 3 * H:]
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    return gates, c, tanh_c, h


def lstm_gates_backward(gates, c_prev, tanh_c, dh, dc_next):
    """Backprop one step through the gate nonlinearities.

    ``dc_next`` is the cell-state gradient arriving from step t+1. Returns
    ``(dz, dc_prev)``.
    """
    H = c_prev.shape[1]
    f = gates[:, :H]
    i = gates[:, H:2 * H]
    g = gates[:, 2 * H:3 * H]
    o = gates[:, 3 * H:]
    dc = dc_next + dh * o * (1.0 - tanh_c * tanh_c)
    dz = np.empty_like(gates)
    dz[:, :H] = dc * c_prev * f * (1.0 - f)
    dz[:, H:2 * H] = dc * g * i * (1.0 - i)
    dz[:, 2 * H:3 * H] = dc * i * (1.0 - g * g)
    dz[:, 3 * H:] = dh * tanh_c * o * (1.0 - o)
    return dz, dc * f


def causal_conv_forward(x, w, b, dilation):
    """Dilated causal convolution of ``x`` (B, T, C) with ``w`` (F, C, k)."""
    B, T, _ = x.shape
    F, _, k = w.shape
    y = np.empty((B, T, F))
    y[...] = b
    for j in range(k):
        shift = (k - 1 - j) * dilation
        if shift >= T:
            continue
        y[:, shift:, :] += x[:, :T - shift, :] @ w[:, :, j].T
    return y


def causal_conv_backward(x, w, dilation, dy):
    B, T, C = x.shape
    F, _, k = w.shape
    dx = np.zeros_like(x)
    dw = np.zeros_like(w)
    db = dy.sum(axis=(0, 1))
    for j in range(k):
        shift = (k - 1 - j) * dilation
        if shift >= T:
            continue
        g = dy[:, shift:, :]
        dw[:, :, j] = g.reshape(-1, F).T @ x[:, :T - shift, :].reshape(-1, C)
        dx[:, :T - shift, :] += g @ w[:, :, j]
    return dx, dw, db


def rank_auc(scores, labels):
    """Mann-Whitney AUC with midranks; ``labels`` is a 0/1 int8 array."""
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    pos = labels[order].astype(bool)
    n = s.size
    # Tie groups: starts where the sorted value changes.
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], n]
    midranks = (starts + ends + 1) / 2.0
    ranks = np.repeat(midranks, ends - starts)
    n_pos = int(pos.sum())
    n_neg = n - n_pos
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out

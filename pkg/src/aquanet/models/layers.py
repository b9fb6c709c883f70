"""Layer types and their forward/backward building blocks.

All forward functions work on batches: dense inputs are ``(B, D)`` and
sequences ``(B, T, C)``. The returned traces carry exactly what the matching
backward function needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import kernels
from ..core_math import ActivationKind, activation_derivative, apply_activation
from ..errors import DimensionError, DomainError, EmptyInputError

GATES = ("f", "i", "c", "o")


# --------------------------------------------------------------------------- dense


@dataclass(frozen=True)
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: ActivationKind = ActivationKind.LINEAR

    def __post_init__(self):
        if self.weights.ndim != 2 or min(self.weights.shape) < 1:
            raise DimensionError(f"dense weights must be a non-empty matrix, got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise DimensionError("bias length must equal out_dim")
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class DenseTrace:
    activations: list = field(default_factory=list)  # layer inputs, then final output
    pre: list = field(default_factory=list)


def dense_stack_forward(layers: list[DenseLayer], x: np.ndarray):
    if x.ndim != 2 or x.shape[1] != layers[0].in_dim:
        raise DimensionError(f"expected inputs of width {layers[0].in_dim}, got shape {x.shape}")
    trace = DenseTrace(activations=[x])
    a = x
    for layer in layers:
        z = a @ layer.weights.T + layer.bias
        a = apply_activation(layer.activation, z)
        trace.pre.append(z)
        trace.activations.append(a)
    return a, trace


def dense_stack_backward(layers: list[DenseLayer], trace: DenseTrace, d_pre_out: np.ndarray):
    """Gradients given dLoss/d(pre-activation of the last layer).

    Returns ``(grads, d_input)`` where ``grads[i] = (dW_i, db_i)``.
    """
    grads = [None] * len(layers)
    dz = d_pre_out
    for idx in range(len(layers) - 1, -1, -1):
        a_in = trace.activations[idx]
        grads[idx] = (dz.T @ a_in, dz.sum(axis=0))
        da = dz @ layers[idx].weights
        if idx > 0:
            dz = da * activation_derivative(layers[idx - 1].activation, trace.pre[idx - 1])
    return grads, da


# ---------------------------------------------------------------------------- LSTM


@dataclass(frozen=True)
class LstmCell:
    w_f: np.ndarray
    w_i: np.ndarray
    w_c: np.ndarray
    w_o: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        shape = self.w_f.shape
        if len(shape) != 2 or shape[1] <= shape[0]:
            raise DimensionError(f"gate weights must be H x (H+D) with D >= 1, got {shape}")
        H = shape[0]
        for g in GATES:
            if getattr(self, f"w_{g}").shape != shape:
                raise DimensionError("all four gate matrices must share one shape")
            if getattr(self, f"b_{g}").shape != (H,):
                raise DimensionError(f"gate bias b_{g} must have length {H}")

    @property
    def hidden_dim(self) -> int:
        return self.w_f.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_f.shape[1] - self.w_f.shape[0]

    def stacked(self):
        W = np.concatenate([self.w_f, self.w_i, self.w_c, self.w_o], axis=0)
        b = np.concatenate([self.b_f, self.b_i, self.b_c, self.b_o])
        return W, b


@dataclass
class LstmStepTrace:
    f: np.ndarray
    i: np.ndarray
    c_tilde: np.ndarray
    o: np.ndarray


def lstm_step(cell: LstmCell, h_prev, c_prev, x_t):
    """One cell update on ``[h_prev, x_t]``. Returns ``(h_t, c_t, trace)``.

    Works on single vectors or on batches of row vectors.
    """
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    x_t = np.asarray(x_t, dtype=np.float64)
    single = h_prev.ndim == 1
    h2, c2, x2 = (np.atleast_2d(v) for v in (h_prev, c_prev, x_t))
    H, D = cell.hidden_dim, cell.input_dim
    if h2.shape[1] != H or c2.shape[1] != H or x2.shape[1] != D:
        raise DimensionError(
            f"cell expects h/c of width {H} and x of width {D}, "
            f"got {h2.shape}, {c2.shape}, {x2.shape}"
        )
    hx = np.concatenate([h2, x2], axis=1)
    W, b = cell.stacked()
    z = np.ascontiguousarray(hx @ W.T + b)
    gates, c, _, h = kernels.lstm_gates_forward(z, np.ascontiguousarray(c2))
    tr = LstmStepTrace(gates[:, :H], gates[:, H:2 * H], gates[:, 2 * H:3 * H], gates[:, 3 * H:])
    if single:
        tr = LstmStepTrace(tr.f[0], tr.i[0], tr.c_tilde[0], tr.o[0])
        return h[0], c[0], tr
    return h, c, tr


@dataclass
class LstmLayerTrace:
    x: np.ndarray  # (B, T, D)
    h_prev: list
    c_prev: list
    gates: list
    tanh_c: list
    h: np.ndarray  # (B, T, H)


def lstm_layer_forward(cell: LstmCell, x_seq: np.ndarray):
    B, T, D = x_seq.shape
    if T < 1:
        raise EmptyInputError("LSTM received an empty sequence")
    if D != cell.input_dim:
        raise DimensionError(f"cell expects {cell.input_dim} input channels, got {D}")
    H = cell.hidden_dim
    W, b = cell.stacked()
    Wh = W[:, :H]
    Wx = W[:, H:]
    xproj = x_seq @ Wx.T + b
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    trace = LstmLayerTrace(x_seq, [], [], [], [], np.empty((B, T, H)))
    for t in range(T):
        z = np.ascontiguousarray(xproj[:, t, :] + h @ Wh.T)
        trace.h_prev.append(h)
        trace.c_prev.append(c)
        gates, c, tanh_c, h = kernels.lstm_gates_forward(z, c)
        trace.gates.append(gates)
        trace.tanh_c.append(tanh_c)
        trace.h[:, t, :] = h
    return trace.h, trace


def lstm_layer_backward(cell: LstmCell, trace: LstmLayerTrace, dh_seq: np.ndarray):
    """Backpropagation through time for one stacked layer.

    ``dh_seq`` (B, T, H) is the gradient reaching each h_t from above.
    Returns ``(grads, dx_seq)``; ``grads`` maps w_f..b_o to arrays.
    """
    x = trace.x
    B, T, D = x.shape
    H = cell.hidden_dim
    W, _ = cell.stacked()
    Wh = W[:, :H]
    Wx = W[:, H:]
    dz_all = np.empty((B, T, 4 * H))
    dWh = np.zeros((4 * H, H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        dh = np.ascontiguousarray(dh_seq[:, t, :] + dh_next)
        dz, dc_next = kernels.lstm_gates_backward(
            trace.gates[t], trace.c_prev[t], trace.tanh_c[t], dh, dc_next
        )
        dz_all[:, t, :] = dz
        dWh += dz.T @ trace.h_prev[t]
        dh_next = dz @ Wh
    flat = dz_all.reshape(-1, 4 * H)
    dWx = flat.T @ x.reshape(-1, D)
    db = flat.sum(axis=0)
    dW = np.concatenate([dWh, dWx], axis=1)
    grads = {}
    for k, g in enumerate(GATES):
        grads[f"w_{g}"] = dW[k * H:(k + 1) * H]
        grads[f"b_{g}"] = db[k * H:(k + 1) * H]
    return grads, dz_all @ Wx


# ----------------------------------------------------------------------------- TCN


@dataclass(frozen=True)
class TcnLayer:
    kernels: np.ndarray  # (F, C_in, k)
    biases: np.ndarray  # (F,)
    dilation: int = 1
    dropout_rate: float = 0.0
    projection: Optional[np.ndarray] = None  # (C_in, F) when C_in != F

    def __post_init__(self):
        if self.kernels.ndim != 3:
            raise DimensionError("kernels must be (filters, in_channels, kernel_size)")
        if self.biases.shape != (self.kernels.shape[0],):
            raise DimensionError("one bias per filter is required")
        if self.dilation < 1 or self.kernels.shape[2] < 1:
            raise DimensionError("dilation and kernel size must be >= 1")
        if not 0 <= self.dropout_rate < 1:
            raise DomainError("dropout rate must lie in [0, 1)")
        if self.projection is not None and self.projection.shape != (self.in_channels, self.filters):
            raise DimensionError("projection must map in_channels to filters")

    @property
    def filters(self) -> int:
        return self.kernels.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernels.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.kernels.shape[2]

    @property
    def padding(self) -> int:
        return (self.kernel_size - 1) * self.dilation


def _as_batch_seq(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        return x[None, :, :], True
    if x.ndim != 3:
        raise DimensionError(f"sequence must be (T, C) or (B, T, C), got {x.shape}")
    return x, False


def dilated_causal_conv(layer: TcnLayer, x) -> np.ndarray:
    """Causal convolution with spacing ``layer.dilation`` between taps.

    ``y[t, f] = b_f + sum_c sum_j K[f, c, j] * x[t - (k-1-j)*d, c]`` with x
    taken as zero before t = 0, so y has the same length as x.
    """
    xb, single = _as_batch_seq(x)
    if xb.shape[1] < 1:
        raise EmptyInputError("convolution received an empty sequence")
    if xb.shape[2] != layer.in_channels:
        raise DimensionError(f"layer expects {layer.in_channels} channels, got {xb.shape[2]}")
    y = kernels.causal_conv_forward(
        np.ascontiguousarray(xb), layer.kernels, np.ascontiguousarray(layer.biases), layer.dilation
    )
    return y[0] if single else y


def residual_add(x, z, projection: Optional[np.ndarray] = None) -> np.ndarray:
    """Skip connection ``x + z``; ``x`` goes through a 1x1 projection if given."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if projection is not None:
        projection = np.asarray(projection, dtype=np.float64).reshape(x.shape[-1], -1)
        x = x @ projection
    if x.shape != z.shape:
        raise DimensionError(f"residual shapes differ: {x.shape} vs {z.shape}; supply a projection")
    return x + z


def temporal_pool(seq, mode: str = "avg") -> np.ndarray:
    """Per-channel mean or max over the time axis (axis -2)."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.shape[-2] < 1:
        raise EmptyInputError("cannot pool an empty sequence")
    if mode == "avg":
        return seq.mean(axis=-2)
    if mode == "max":
        return seq.max(axis=-2)
    raise DomainError(f"unknown pooling mode {mode!r}")


@dataclass
class TcnBlockTrace:
    x: np.ndarray
    z: np.ndarray  # conv output before ReLU
    mask: Optional[np.ndarray]
    y: np.ndarray


def tcn_block_forward(layer: TcnLayer, x: np.ndarray, mask: Optional[np.ndarray] = None):
    """Conv -> ReLU -> dropout (via ``mask``) -> residual add."""
    z = dilated_causal_conv(layer, x)
    a = np.maximum(z, 0.0)
    if mask is not None:
        a = a * mask
    y = residual_add(x, a, layer.projection)
    return y, TcnBlockTrace(x, z, mask, y)


def tcn_block_backward(layer: TcnLayer, trace: TcnBlockTrace, dy: np.ndarray):
    """Returns ``(grads, dx)`` with grads keys kernel/bias/proj."""
    da = dy if trace.mask is None else dy * trace.mask
    dz = np.ascontiguousarray(da * (trace.z > 0))
    dx, dk, db = kernels.causal_conv_backward(
        np.ascontiguousarray(trace.x), layer.kernels, layer.dilation, dz
    )
    grads = {"kernel": dk, "bias": db}
    if layer.projection is not None:
        C, F = layer.projection.shape
        grads["proj"] = trace.x.reshape(-1, C).T @ dy.reshape(-1, F)
        dx = dx + dy @ layer.projection.T
    else:
        dx = dx + dy
    return grads, dx


def temporal_pool_backward(seq: np.ndarray, d_pooled: np.ndarray, mode: str) -> np.ndarray:
    T = seq.shape[-2]
    if mode == "avg":
        return np.repeat(d_pooled[..., None, :] / T, T, axis=-2)
    # Max: the whole gradient goes to the first time step attaining the max.
    idx = seq.argmax(axis=-2)
    out = np.zeros_like(seq)
    np.put_along_axis(out, idx[..., None, :], d_pooled[..., None, :], axis=-2)
    return out

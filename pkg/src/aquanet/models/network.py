"""Whole-model forward and backward passes for the four architectures.

Parameters live in an ordered ``dict[str, ndarray]``; the layer views used by
the passes are cheap wrappers around those arrays. Sequence models see each
sample's feature vector as a length-``input_dim`` sequence with one channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..core_math import ActivationKind, as_matrix, dropout_mask
from ..errors import ConsistencyError, DimensionError, EmptyInputError
from .layers import (
    GATES,
    DenseLayer,
    LstmCell,
    TcnLayer,
    dense_stack_backward,
    dense_stack_forward,
    lstm_layer_backward,
    lstm_layer_forward,
    tcn_block_backward,
    tcn_block_forward,
    temporal_pool,
    temporal_pool_backward,
)
from .spec import AnnSpec, LstmSpec, MlpSpec, ModelSpec, TcnSpec


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    params: dict[str, np.ndarray]
    normalizer: Any = None  # aquanet.data.NormalizerStats

    def __post_init__(self):
        expected = param_shapes(self.spec)
        if list(expected) != list(self.params):
            raise ConsistencyError(
                f"parameter names do not match a {self.spec.kind} spec: "
                f"expected {list(expected)[:4]}..., got {list(self.params)[:4]}..."
            )
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ConsistencyError(f"{name} has shape {self.params[name].shape}, expected {shape}")

    def frozen(self) -> "TrainedModel":
        """Copy with read-only parameter arrays."""
        params = {}
        for k, v in self.params.items():
            a = np.array(v, dtype=np.float64, copy=True)
            a.flags.writeable = False
            params[k] = a
        return TrainedModel(self.spec, params, self.normalizer)


@dataclass
class ForwardTrace:
    kind: str
    signature: tuple
    logits: np.ndarray
    probs: np.ndarray
    body: Any = None
    head: Any = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- shapes and init


def param_shapes(spec: ModelSpec) -> dict[str, tuple]:
    shapes: dict[str, tuple] = {}
    if isinstance(spec, (MlpSpec, AnnSpec)):
        sizes = (spec.input_dim,) + spec.layer_sizes
        for i in range(len(spec.layer_sizes)):
            shapes[f"dense{i}.weight"] = (sizes[i + 1], sizes[i])
            shapes[f"dense{i}.bias"] = (sizes[i + 1],)
        top = sizes[-1]
    elif isinstance(spec, LstmSpec):
        d = spec.channels
        H = spec.units
        for layer in range(spec.layers):
            for g in GATES:
                shapes[f"lstm{layer}.w_{g}"] = (H, H + d)
            for g in GATES:
                shapes[f"lstm{layer}.b_{g}"] = (H,)
            d = H
        top = H
    elif isinstance(spec, TcnSpec):
        c = spec.channels
        F = spec.filters
        for layer in range(spec.layers):
            shapes[f"tcn{layer}.kernel"] = (F, c, spec.kernel_size)
            shapes[f"tcn{layer}.bias"] = (F,)
            if c != F:
                shapes[f"tcn{layer}.proj"] = (c, F)
            c = F
        top = F
    else:
        raise ConsistencyError(f"not a model spec: {spec!r}")
    shapes["head.weight"] = (spec.classes, top)
    shapes["head.bias"] = (spec.classes,)
    return shapes


def _fan_in(name: str, shape: tuple) -> int:
    if name.endswith(".kernel"):
        return shape[1] * shape[2]
    if name.endswith(".proj"):
        return shape[0]
    return shape[1]


def init_params(spec: ModelSpec, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.

    LSTM forget-gate biases start at ``spec.forget_bias``.
    """
    params = {}
    shapes = param_shapes(spec)
    for name, shape in shapes.items():
        leaf = name.rsplit(".", 1)[1]
        if leaf == "bias" or leaf.startswith("b_"):
            arr = np.zeros(shape)
            if leaf == "b_f":
                arr[:] = spec.forget_bias
        else:
            fan = _fan_in(name, shape)
            bound = 1.0 / np.sqrt(fan)
            arr = rng.uniform(-bound, bound, size=shape)
        params[name] = arr
    return params


def zero_params(spec: ModelSpec) -> dict[str, np.ndarray]:
    return {k: np.zeros(s) for k, s in param_shapes(spec).items()}


def build_model(spec: ModelSpec, seed: int | np.random.Generator = 0, normalizer=None) -> TrainedModel:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return TrainedModel(spec, init_params(spec, rng), normalizer)


def _signature(model: TrainedModel) -> tuple:
    return (model.spec.kind,) + tuple((k, v.shape) for k, v in model.params.items())


# -------------------------------------------------------------------------- views


def dense_layers(model: TrainedModel) -> list[DenseLayer]:
    spec = model.spec
    p = model.params
    act = ActivationKind.parse(spec.activation)
    layers = [
        DenseLayer(p[f"dense{i}.weight"], p[f"dense{i}.bias"], act)
        for i in range(len(spec.layer_sizes))
    ]
    layers.append(head_layer(model))
    return layers


def head_layer(model: TrainedModel) -> DenseLayer:
    return DenseLayer(model.params["head.weight"], model.params["head.bias"], ActivationKind.SOFTMAX)


def lstm_cells(model: TrainedModel) -> list[LstmCell]:
    p = model.params
    cells = []
    for layer in range(model.spec.layers):
        kw = {f"w_{g}": p[f"lstm{layer}.w_{g}"] for g in GATES}
        kw.update({f"b_{g}": p[f"lstm{layer}.b_{g}"] for g in GATES})
        cells.append(LstmCell(**kw))
    return cells


def tcn_layers(model: TrainedModel) -> list[TcnLayer]:
    spec = model.spec
    p = model.params
    return [
        TcnLayer(
            p[f"tcn{i}.kernel"],
            p[f"tcn{i}.bias"],
            dilation=spec.dilations[i],
            dropout_rate=spec.dropout,
            projection=p.get(f"tcn{i}.proj"),
        )
        for i in range(spec.layers)
    ]


# ------------------------------------------------------------------------ forward


def _head_forward(model, features):
    out, tr = dense_stack_forward([head_layer(model)], features)
    return out, tr


def _to_batch(x, width: int, what: str):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.ndim != 2 or x2.shape[1] != width:
        raise DimensionError(f"{what} expects {width} features per row, got shape {x.shape}")
    return x2, single


def mlp_forward(model: TrainedModel, features):
    """Feed-forward pass for MLP and ANN models.

    ``features`` is one normalized vector or a batch of rows. Returns
    ``(probs, trace)``.
    """
    if not isinstance(model.spec, (MlpSpec, AnnSpec)):
        raise ConsistencyError(f"mlp_forward called on a {model.spec.kind} model")
    x, single = _to_batch(features, model.spec.input_dim, model.spec.kind.upper())
    probs, tr = dense_stack_forward(dense_layers(model), x)
    trace = ForwardTrace(model.spec.kind, _signature(model), tr.pre[-1], probs, body=tr)
    return (probs[0] if single else probs), trace


def _seq_batch(sequence, channels: int):
    x = np.asarray(sequence, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3:
        raise DimensionError(f"sequence must be (T, C) or (B, T, C), got {np.shape(sequence)}")
    if x.shape[1] < 1:
        raise EmptyInputError("empty sequence")
    if x.shape[2] != channels:
        raise DimensionError(f"expected {channels} channels, got {x.shape[2]}")
    return x, single


def lstm_forward(model: TrainedModel, sequence):
    """Stacked LSTM over ``sequence`` with h0 = c0 = 0; head reads the last h."""
    if not isinstance(model.spec, LstmSpec):
        raise ConsistencyError(f"lstm_forward called on a {model.spec.kind} model")
    x, single = _seq_batch(sequence, model.spec.channels)
    layer_traces = []
    inp = x
    for cell in lstm_cells(model):
        inp, tr = lstm_layer_forward(cell, inp)
        layer_traces.append(tr)
    probs, head_tr = _head_forward(model, inp[:, -1, :])
    trace = ForwardTrace("lstm", _signature(model), head_tr.pre[-1], probs, body=layer_traces, head=head_tr)
    return (probs[0] if single else probs), trace


def tcn_forward(model: TrainedModel, sequence, train: bool = False, rng: Optional[np.random.Generator] = None):
    """Residual dilated-conv blocks, temporal pooling, softmax head.

    Dropout is active only when ``train`` is true, in which case ``rng`` must
    be supplied.
    """
    if not isinstance(model.spec, TcnSpec):
        raise ConsistencyError(f"tcn_forward called on a {model.spec.kind} model")
    x, single = _seq_batch(sequence, model.spec.channels)
    blocks = []
    h = x
    for layer in tcn_layers(model):
        mask = None
        if train and layer.dropout_rate > 0:
            if rng is None:
                raise ValueError("train mode needs an rng for dropout")
            mask = dropout_mask((h.shape[0], h.shape[1], layer.filters), layer.dropout_rate, rng)
        h, tr = tcn_block_forward(layer, h, mask)
        blocks.append(tr)
    pooled = temporal_pool(h, model.spec.pooling)
    probs, head_tr = _head_forward(model, pooled)
    trace = ForwardTrace("tcn", _signature(model), head_tr.pre[-1], probs, body=blocks, head=head_tr)
    return (probs[0] if single else probs), trace


def as_sequence(features: np.ndarray, spec) -> np.ndarray:
    """(B, input_dim) -> (B, T, channels) in feature order."""
    B = features.shape[0]
    return features.reshape(B, spec.seq_len, spec.channels)


def forward(model: TrainedModel, features, train: bool = False, rng: Optional[np.random.Generator] = None):
    """Dispatch on the spec kind for a normalized ``(B, input_dim)`` batch."""
    spec = model.spec
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise DimensionError(f"expected (B, {spec.input_dim}) features, got {x.shape}")
    if x.shape[0] == 0:
        raise EmptyInputError("no rows to evaluate")
    if isinstance(spec, (MlpSpec, AnnSpec)):
        return mlp_forward(model, x)
    if isinstance(spec, LstmSpec):
        return lstm_forward(model, as_sequence(x, spec))
    return tcn_forward(model, as_sequence(x, spec), train=train, rng=rng)


def predict_proba(model: TrainedModel, raw_features) -> np.ndarray:
    """Normalize raw feature rows with the model's stats and return probabilities."""
    x = as_matrix(raw_features)
    if model.normalizer is not None:
        x = model.normalizer.transform(x)
    probs, _ = forward(model, x)
    return probs


# ----------------------------------------------------------------------- backward


def model_backward(model: TrainedModel, trace: ForwardTrace, d_logits) -> dict[str, np.ndarray]:
    """Gradients of the loss for every parameter of ``model``.

    ``d_logits`` is dLoss/d(head pre-activation), shape ``(B, classes)``; for
    softmax with cross-entropy that is ``probs - onehot`` (scaled by 1/B for a
    batch mean).
    """
    if trace.signature != _signature(model):
        raise ConsistencyError("trace was produced by a different model or architecture")
    d_logits = np.atleast_2d(np.asarray(d_logits, dtype=np.float64))
    if d_logits.shape != trace.logits.shape:
        raise DimensionError(f"loss gradient shape {d_logits.shape} != logits shape {trace.logits.shape}")
    spec = model.spec
    grads: dict[str, np.ndarray] = {}

    if isinstance(spec, (MlpSpec, AnnSpec)):
        layer_grads, _ = dense_stack_backward(dense_layers(model), trace.body, d_logits)
        for i, (dW, db) in enumerate(layer_grads[:-1]):
            grads[f"dense{i}.weight"] = dW
            grads[f"dense{i}.bias"] = db
        grads["head.weight"], grads["head.bias"] = layer_grads[-1]
        return {k: grads[k] for k in model.params}

    (head_grads,), d_feat = dense_stack_backward([head_layer(model)], trace.head, d_logits)
    grads["head.weight"], grads["head.bias"] = head_grads

    if isinstance(spec, LstmSpec):
        cells = lstm_cells(model)
        top = trace.body[-1]
        dh_seq = np.zeros_like(top.h)
        dh_seq[:, -1, :] = d_feat
        for layer in range(len(cells) - 1, -1, -1):
            cg, dh_seq = lstm_layer_backward(cells[layer], trace.body[layer], dh_seq)
            for name, g in cg.items():
                grads[f"lstm{layer}.{name}"] = g
    else:
        layers = tcn_layers(model)
        last = trace.body[-1].y
        dy = temporal_pool_backward(last, d_feat, spec.pooling)
        for i in range(len(layers) - 1, -1, -1):
            bg, dy = tcn_block_backward(layers[i], trace.body[i], dy)
            grads[f"tcn{i}.kernel"] = bg["kernel"]
            grads[f"tcn{i}.bias"] = bg["bias"]
            if "proj" in bg:
                grads[f"tcn{i}.proj"] = bg["proj"]
    return {k: grads[k] for k in model.params}

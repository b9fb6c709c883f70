"""Losses, optimizers, dropout and the mini-batch training loop."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core_math import dropout_mask
from .data.normalize import fit_normalizer
from .data.schema import Dataset
from .errors import ConfigError, DimensionError, DivergenceError, DomainError, EmptyInputError, FileError
from .models.network import TrainedModel, forward, init_params, model_backward
from .models.spec import ModelSpec
from .rng import stream

PROB_FLOOR = 1e-12
L2_KINDS = ("mlp", "ann")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: Optional[float] = None  # None: use the model spec's rate
    epochs: int = 200
    batch_size: int = 32
    l2_alpha: Optional[float] = None  # None: use the model spec's alpha (MLP/ANN only)
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.l2_alpha is not None and self.l2_alpha < 0:
            raise ConfigError("l2_alpha must be >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")

    @classmethod
    def from_dict(cls, d: dict, **overrides) -> "TrainConfig":
        known = {"learning_rate", "epochs", "batch_size", "l2_alpha", "optimizer", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown train option(s): {sorted(unknown)}")
        merged = {**d, **{k: v for k, v in overrides.items() if v is not None}}
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def effective_lr(self, spec: ModelSpec) -> float:
        return self.learning_rate if self.learning_rate is not None else spec.learning_rate

    def effective_alpha(self, spec: ModelSpec) -> float:
        if spec.kind not in L2_KINDS:
            return 0.0
        return self.l2_alpha if self.l2_alpha is not None else spec.alpha


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: Optional[list[float]] = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def to_csv(self, path) -> Path:
        path = Path(path)
        try:
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["epoch", "train_loss", "val_loss"])
                for i, tl in enumerate(self.train_loss):
                    vl = "" if self.val_loss is None else repr(self.val_loss[i])
                    w.writerow([i + 1, repr(tl), vl])
        except OSError as exc:
            raise FileError(path, exc.strerror or str(exc)) from None
        return path


# ---------------------------------------------------------------------------- losses


def cross_entropy(probs, label: int, n_classes: int = 5) -> float:
    """``-log p[label]`` with the probability clamped at 1e-12."""
    if not 0 <= int(label) < n_classes or int(label) != label:
        raise DomainError(f"label must be in 0..{n_classes - 1}, got {label}")
    p = float(np.asarray(probs, dtype=np.float64)[int(label)])
    return -math.log(max(p, PROB_FLOOR))


def batch_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    p = probs[np.arange(labels.size), labels]
    return float(np.mean(-np.log(np.maximum(p, PROB_FLOOR))))


def softmax_cross_entropy_grad(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d(mean CE)/d(logits) for a softmax head: (p - onehot) / B."""
    g = probs.copy()
    g[np.arange(labels.size), labels] -= 1.0
    return g / labels.size


def mse(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"prediction shape {pred.shape} != target shape {target.shape}")
    return float(np.mean((pred - target) ** 2))


# ------------------------------------------------------------------------ optimizers


def _check_shapes(params: dict, grads: dict) -> None:
    if params.keys() != grads.keys():
        raise DimensionError("gradient names do not match parameter names")
    for k in params:
        if np.shape(params[k]) != np.shape(grads[k]):
            raise DimensionError(f"{k}: parameter shape {np.shape(params[k])} != gradient shape {np.shape(grads[k])}")


def sgd_step(params: dict, grads: dict, lr: float, alpha: float = 0.0) -> dict:
    """``theta - lr * (g + alpha * theta)`` for every entry."""
    _check_shapes(params, grads)
    return {k: params[k] - lr * (grads[k] + alpha * params[k]) for k in params}


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict) -> "AdamState":
        return cls({k: np.zeros_like(p, dtype=np.float64) for k, p in params.items()},
                   {k: np.zeros_like(p, dtype=np.float64) for k, p in params.items()})


def adam_step(
    state: AdamState,
    params: dict,
    grads: dict,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    alpha: float = 0.0,
) -> tuple[AdamState, dict]:
    """One bias-corrected Adam update; the L2 term is added to the gradient."""
    _check_shapes(params, grads)
    t = state.t + 1
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    m, v, out = {}, {}, {}
    for k, p in params.items():
        g = grads[k] + alpha * p if alpha else grads[k]
        m[k] = beta1 * state.m[k] + (1.0 - beta1) * g
        v[k] = beta2 * state.v[k] + (1.0 - beta2) * g * g
        out[k] = p - lr * (m[k] / c1) / (np.sqrt(v[k] / c2) + eps)
    return AdamState(m, v, t), out


def dropout_apply(m, rate: float, mode: str, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Inverted dropout; identity in ``eval`` mode or at rate 0."""
    if not 0 <= rate < 1:
        raise DomainError(f"dropout rate must lie in [0, 1), got {rate}")
    if mode not in ("train", "eval"):
        raise DomainError(f"mode must be 'train' or 'eval', got {mode!r}")
    m = np.asarray(m, dtype=np.float64)
    if mode == "eval" or rate == 0:
        return m.copy()
    if rng is None:
        raise DomainError("train-mode dropout needs an rng")
    return m * dropout_mask(m.shape, rate, rng)


# ---------------------------------------------------------------------- training loop


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, Dataset):
        x, y = data.features, data.labels
    else:
        x, y = data
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise DimensionError(f"features {x.shape} and labels {y.shape} do not line up")
    return x, y.astype(np.int64)


def train(spec: ModelSpec, train_set, val_set=None, config: TrainConfig = TrainConfig()):
    """Fit ``spec`` with mini-batch cross-entropy training.

    ``train_set``/``val_set`` are Datasets or ``(features, labels)`` pairs with
    raw (unnormalized) features; normalization statistics are fitted on the
    training rows and stored in the returned model. The validation set only
    feeds the loss history. Returns ``(TrainedModel, TrainHistory)``.
    """
    x, y = _as_xy(train_set)
    if x.shape[0] == 0:
        raise EmptyInputError("training set is empty")
    if x.shape[1] != spec.input_dim:
        raise DimensionError(f"{spec.kind} expects {spec.input_dim} features, got {x.shape[1]}")
    if y.min() < 0 or y.max() >= spec.classes:
        raise DomainError(f"labels must lie in 0..{spec.classes - 1}")
    norm = fit_normalizer(x)
    xn = norm.transform(x)
    if val_set is not None:
        xv, yv = _as_xy(val_set)
        xvn = norm.transform(xv) if xv.shape[0] else None
    else:
        xvn = None

    lr = config.effective_lr(spec)
    alpha = config.effective_alpha(spec)
    params = init_params(spec, stream(config.seed, "init"))
    shuffle_rng = stream(config.seed, "shuffle")
    dropout_rng = stream(config.seed, "dropout")
    adam = AdamState.zeros_like(params) if config.optimizer == "adam" else None

    history = TrainHistory(val_loss=[] if xvn is not None else None)
    started = time.perf_counter()
    n = x.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            model = TrainedModel(spec, params)
            probs, trace = forward(model, xn[idx], train=True, rng=dropout_rng)
            loss = batch_cross_entropy(probs, y[idx])
            if not math.isfinite(loss):
                raise DivergenceError(epoch, loss)
            total += loss * idx.size
            grads = model_backward(model, trace, softmax_cross_entropy_grad(probs, y[idx]))
            if adam is not None:
                adam, params = adam_step(adam, params, grads, lr, alpha=alpha)
            else:
                params = sgd_step(params, grads, lr, alpha)
        epoch_loss = total / n
        if not math.isfinite(epoch_loss):
            raise DivergenceError(epoch, epoch_loss)
        history.train_loss.append(epoch_loss)
        if xvn is not None:
            pv, _ = forward(TrainedModel(spec, params), xvn)
            history.val_loss.append(batch_cross_entropy(pv, yv))
    history.wall_time = time.perf_counter() - started
    return TrainedModel(spec, params, norm).frozen(), history

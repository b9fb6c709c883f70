"""Dense numeric primitives: activations, products and a gradient oracle.

Matrices are plain ``float64`` numpy arrays in C (row-major) order. Every
public function returns a fresh array and never mutates its inputs.
"""

from __future__ import annotations

import enum
import math
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, UnsupportedActivationError


class ActivationKind(str, enum.Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"
    SOFTMAX = "softmax"
    LINEAR = "linear"

    @classmethod
    def parse(cls, value: "str | ActivationKind") -> "ActivationKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown activation {value!r}") from None


def as_matrix(values, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``values`` to a finite 2-D float64 array, optionally reshaping."""
    m = np.array(values, dtype=np.float64, order="C")
    if rows is not None and cols is not None:
        if m.size != rows * cols:
            raise DimensionError(f"{m.size} values cannot fill a {rows}x{cols} matrix")
        m = m.reshape(rows, cols)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix contains non-finite values")
    return m


def weighted_sum(weights: Sequence[float], inputs: Sequence[float], bias: float) -> float:
    """Return ``w1*x1 + ... + wn*xn + b`` accumulated left to right."""
    if len(weights) != len(inputs):
        raise DimensionError(f"{len(weights)} weights vs {len(inputs)} inputs")
    if len(weights) == 0:
        raise DimensionError("weighted_sum needs at least one input")
    total = 0.0
    for w, x in zip(weights, inputs):
        total += float(w) * float(x)
    return total + float(bias)


def sigmoid(z: float) -> float:
    # Branch on sign so exp never overflows.
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def sigmoid_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def softmax_rows(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    shifted = m - m.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def apply_activation(kind: ActivationKind | str, m) -> np.ndarray:
    """Apply ``kind`` elementwise, or row-wise for softmax."""
    kind = ActivationKind.parse(kind)
    m = np.asarray(m, dtype=np.float64)
    if kind is ActivationKind.SIGMOID:
        return sigmoid_array(m)
    if kind is ActivationKind.TANH:
        return np.tanh(m)
    if kind is ActivationKind.RELU:
        return np.maximum(m, 0.0)
    if kind is ActivationKind.SOFTMAX:
        return softmax_rows(m)
    return m.copy()


def activation_derivative(kind: ActivationKind | str, pre_activation) -> np.ndarray:
    """Elementwise derivative of ``kind`` evaluated at ``pre_activation``.

    Softmax is rejected: its Jacobian is never materialised, the training
    code folds it into the cross-entropy gradient instead.
    """
    kind = ActivationKind.parse(kind)
    z = np.asarray(pre_activation, dtype=np.float64)
    if kind is ActivationKind.SIGMOID:
        s = sigmoid_array(z)
        return s * (1.0 - s)
    if kind is ActivationKind.TANH:
        t = np.tanh(z)
        return 1.0 - t * t
    if kind is ActivationKind.RELU:
        return (z > 0).astype(np.float64)
    if kind is ActivationKind.LINEAR:
        return np.ones_like(z)
    raise UnsupportedActivationError(
        "softmax derivative is not available elementwise; "
        "use the fused softmax/cross-entropy gradient from aquanet.training"
    )


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], at, eps: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``at``.

    ``at`` may have any shape; the result has the same shape.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    x = np.array(at, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = float(f(x))
        flat[i] = orig - eps
        lo = float(f(x))
        flat[i] = orig
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise FloatingPointError(f"f is not finite around coordinate {i}")
        g[i] = (hi - lo) / (2.0 * eps)
    return grad


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability ``rate``, else 1/(1-rate)."""
    if not 0 <= rate < 1:
        raise DomainError(f"dropout rate must lie in [0, 1), got {rate}")
    if rate == 0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)

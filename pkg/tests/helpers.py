"""Independent oracles shared by the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from aquanet.models import TrainedModel, build_model, forward, model_backward
from aquanet.rng import stream
from aquanet.training import batch_cross_entropy, softmax_cross_entropy_grad

REL_TOL = 1e-4
ABS_FLOOR = 1e-7


def kink_pattern(model, trace) -> bytes:
    """Which side of every ReLU and max-pool kink the forward pass is on."""
    spec = model.spec
    parts = []
    if spec.kind in ("mlp", "ann") and spec.activation == "relu":
        parts += [(z > 0).tobytes() for z in trace.body.pre[:-1]]
    if spec.kind == "tcn":
        parts += [(b.z > 0).tobytes() for b in trace.body]
        if spec.pooling == "max":
            parts.append(trace.body[-1].y.argmax(axis=1).tobytes())
    return b"".join(parts)


def brute_auc(scores, labels) -> float:
    """Pairwise count over every (positive, negative) pair, ties worth 1/2."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pos, neg = s[y == 1], s[y == 0]
    wins = 0.0
    for p in pos:
        wins += float(np.sum(p > neg)) + 0.5 * float(np.sum(p == neg))
    return wins / (pos.size * neg.size)


def lstsq_vif(x) -> np.ndarray:
    """VIF_j = 1 / (1 - R^2_j) from an ordinary least-squares regression of
    column j on the remaining columns plus an intercept."""
    x = np.asarray(x, dtype=np.float64)
    n, p = x.shape
    out = np.empty(p)
    for j in range(p):
        y = x[:, j]
        a = np.column_stack([np.ones(n), np.delete(x, j, axis=1)])
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        resid = y - a @ coef
        r2 = 1.0 - resid @ resid / np.sum((y - y.mean()) ** 2)
        out[j] = 1.0 / (1.0 - r2)
    return out


def check_model_gradients(spec, seed: int = 0, batch: int = 3, eps: float = 1e-3, train: bool = False):
    """Compare analytic and central-difference gradients for every parameter.

    The oracle is the fourth-order central stencil
    ``(-f(+2h) + 8 f(+h) - 8 f(-h) + f(-2h)) / 12h``. The loss is only
    piecewise smooth for ReLU and max-pool models, so when a stencil point
    would land on the other side of a kink the step is shrunk tenfold until
    all five points share one smooth piece.

    Returns ``(worst_rel_error, failures)``. The relative error of a
    coordinate is ``|a - n| / max(|a|, |n|, 1e-7)`` and must stay below 1e-4.
    With ``train`` set, dropout masks are replayed from a fixed stream so the
    loss is a deterministic function of the parameters.
    """
    model = build_model(spec, stream(seed, "gradcheck", "init"))
    data = stream(seed, "gradcheck", "data")
    x = data.normal(size=(batch, spec.input_dim))
    y = data.integers(0, spec.classes, size=batch)

    def evaluate(params):
        m = TrainedModel(spec, params)
        rng = stream(seed, "gradcheck", "dropout") if train else None
        probs, trace = forward(m, x, train=train, rng=rng)
        return batch_cross_entropy(probs, y), kink_pattern(m, trace), probs, trace

    _, base_pattern, probs, trace = evaluate(model.params)
    analytic = model_backward(model, trace, softmax_cross_entropy_grad(probs, y))
    params = {k: v.copy() for k, v in model.params.items()}
    worst = 0.0
    failures = []
    for name, p in params.items():
        flat = p.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            h = eps
            while True:
                vals, same = [], True
                for step in (2, 1, -1, -2):
                    flat[i] = orig + step * h
                    loss, pattern, _, _ = evaluate(params)
                    vals.append(loss)
                    same = same and pattern == base_pattern
                flat[i] = orig
                if same or h < 1e-9:
                    break
                h /= 10
            num = (8 * (vals[1] - vals[2]) - (vals[0] - vals[3])) / (12 * h)
            err = abs(num - a_flat[i])
            rel = err / max(abs(num), abs(a_flat[i]), ABS_FLOOR)
            worst = max(worst, rel)
            if rel > REL_TOL:
                failures.append((name, i, a_flat[i], num))
    return worst, failures

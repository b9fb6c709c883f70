import csv
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aquanet.core_math import finite_difference_gradient, softmax_rows
from aquanet.errors import ConfigError, DimensionError, DivergenceError, DomainError, EmptyInputError
from aquanet.models import LstmSpec, MlpSpec, TcnSpec, default_spec, predict_proba
from aquanet.rng import stream
from aquanet.training import (
    AdamState,
    TrainConfig,
    adam_step,
    batch_cross_entropy,
    cross_entropy,
    dropout_apply,
    mse,
    sgd_step,
    softmax_cross_entropy_grad,
    train,
)


def test_cross_entropy_values():
    mpmath.mp.dps = 30
    assert cross_entropy([0.2] * 5, 3) == pytest.approx(float(mpmath.log(5)), rel=1e-15)
    assert cross_entropy([0.0, 1.0, 0, 0, 0], 0) == pytest.approx(-math.log(1e-12))
    assert cross_entropy([0.0, 1.0, 0, 0, 0], 1) == 0.0
    with pytest.raises(DomainError):
        cross_entropy([0.2] * 5, 5)


def test_softmax_cross_entropy_grad_matches_finite_differences(rng):
    logits = rng.normal(size=(4, 5))
    y = np.array([0, 3, 4, 1])
    num = finite_difference_gradient(lambda z: batch_cross_entropy(softmax_rows(z), y), logits)
    np.testing.assert_allclose(softmax_cross_entropy_grad(softmax_rows(logits), y), num, atol=1e-9)


def test_mse():
    assert mse([1.0, 2.0], [1.0, 4.0]) == 2.0
    with pytest.raises(DimensionError):
        mse([1.0], [1.0, 2.0])


def test_sgd_step_with_l2():
    out = sgd_step({"w": np.array([2.0])}, {"w": np.array([0.5])}, lr=0.1, alpha=0.25)
    np.testing.assert_allclose(out["w"], [2.0 - 0.1 * (0.5 + 0.5)])
    with pytest.raises(DimensionError):
        sgd_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, 0.1)


def test_adam_first_step_is_lr_times_sign():
    state = AdamState.zeros_like({"w": np.zeros(3)})
    state, p = adam_step(state, {"w": np.array([1.0, 1.0, 1.0])}, {"w": np.array([0.5, -2.0, 1e-3])}, lr=0.1)
    # Bias correction makes m_hat = g and v_hat = g^2 on step one.
    expected = 1.0 - 0.1 * np.array([0.5, -2.0, 1e-3]) / (np.abs([0.5, -2.0, 1e-3]) + 1e-8)
    np.testing.assert_allclose(p["w"], expected, rtol=1e-15)
    assert state.t == 1


def _reference_adam(theta, grad_fn, lr, steps, b1=0.9, b2=0.999, eps=1e-8, alpha=0.0):
    m = v = 0.0
    for t in range(1, steps + 1):
        g = grad_fn(theta) + alpha * theta
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta -= lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
    return theta


@pytest.mark.parametrize("alpha", [0.0, 0.01])
def test_adam_matches_scalar_reference(alpha):
    grad = lambda th: 2 * (th - 3.0)
    state = AdamState.zeros_like({"w": np.zeros(1)})
    p = {"w": np.array([0.0])}
    for _ in range(50):
        state, p = adam_step(state, p, {"w": grad(p["w"])}, lr=0.05, alpha=alpha)
    assert p["w"][0] == pytest.approx(_reference_adam(0.0, grad, 0.05, 50, alpha=alpha), rel=1e-13)


def test_adam_converges_on_quadratic():
    target = np.array([1.5, -2.0, 0.25])
    state = AdamState.zeros_like({"w": np.zeros(3)})
    p = {"w": np.zeros(3)}
    for _ in range(3000):
        state, p = adam_step(state, p, {"w": 2 * (p["w"] - target)}, lr=0.01)
    np.testing.assert_allclose(p["w"], target, atol=1e-4)


def test_dropout_monte_carlo():
    rate = 0.2
    out = dropout_apply(np.ones(1_000_000), rate, "train", stream(0, "mc"))
    # Mean of Bernoulli(0.8)/0.8 has standard error 0.5/1000; allow 5 sigma.
    assert abs(out.mean() - 1.0) < 5 * 0.5e-3
    assert abs((out == 0).mean() - rate) < 5 * 0.4e-3


def test_dropout_eval_is_identity():
    m = np.arange(6.0)
    np.testing.assert_array_equal(dropout_apply(m, 0.5, "eval"), m)
    with pytest.raises(DomainError):
        dropout_apply(m, 1.0, "train", stream(0))
    with pytest.raises(DomainError):
        dropout_apply(m, 0.5, "test")


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(optimizer="rmsprop")
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"momentum": 0.9})
    tc = TrainConfig.from_dict({"epochs": 5, "learning_rate": None}, epochs=7, batch_size=None)
    assert (tc.epochs, tc.batch_size) == (7, 32)
    assert tc.effective_lr(default_spec("mlp")) == 0.001
    assert tc.effective_alpha(default_spec("lstm")) == 0.0
    assert tc.effective_alpha(default_spec("ann")) == 0.001


def _separable(n, seed):
    g = stream(seed, "separable")
    x = g.normal(size=(n, 2))
    y = np.where(x[:, 0] + 0.5 * x[:, 1] > 0, 4, 0)
    return x, y


def test_learns_separable_task():
    x, y = _separable(300, 0)
    model, hist = train(MlpSpec(hidden=(16,), input_dim=2), (x, y), None,
                        TrainConfig(epochs=40, learning_rate=0.01, seed=1))
    xt, yt = _separable(200, 1)
    acc = np.mean(predict_proba(model, xt).argmax(axis=1) == yt)
    assert acc > 0.95
    assert hist.train_loss[-1] < hist.train_loss[0]


@pytest.mark.parametrize("spec", [
    MlpSpec(hidden=(8,)),
    LstmSpec(layers=1, units=6),
    TcnSpec(layers=2, filters=6),
], ids=["mlp", "lstm", "tcn"])
def test_training_is_deterministic(spec, small_dataset):
    cfg = TrainConfig(epochs=3, seed=11)
    m1, h1 = train(spec, small_dataset, small_dataset, cfg)
    m2, h2 = train(spec, small_dataset, small_dataset, cfg)
    assert h1 == h2
    for k in m1.params:
        assert m1.params[k].tobytes() == m2.params[k].tobytes()
    m3, _ = train(spec, small_dataset, None, TrainConfig(epochs=3, seed=12))
    assert any(not np.array_equal(m1.params[k], m3.params[k]) for k in m1.params)


def test_trained_model_is_read_only(small_dataset):
    model, hist = train(MlpSpec(hidden=(4,)), small_dataset, small_dataset, TrainConfig(epochs=1))
    with pytest.raises(ValueError):
        model.params["head.bias"][0] = 1.0
    assert len(hist.val_loss) == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_is_reported():
    x, y = _separable(64, 2)
    with pytest.raises(DivergenceError) as info:
        train(MlpSpec(hidden=(8,), input_dim=2), (x, y), None,
              TrainConfig(epochs=50, learning_rate=1e300, optimizer="sgd"))
    assert info.value.epoch >= 1


def test_train_input_checks():
    with pytest.raises(EmptyInputError):
        train(MlpSpec(input_dim=2), (np.zeros((0, 2)), np.zeros(0, dtype=int)))
    with pytest.raises(DimensionError):
        train(MlpSpec(input_dim=3), (np.zeros((4, 2)), np.zeros(4, dtype=int)))
    with pytest.raises(DomainError):
        train(MlpSpec(input_dim=2), (np.zeros((4, 2)), np.array([0, 1, 2, 7])))


def test_history_csv(tmp_path, small_dataset):
    _, hist = train(MlpSpec(hidden=(4,)), small_dataset, small_dataset, TrainConfig(epochs=3))
    path = hist.to_csv(tmp_path / "h.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["epoch", "train_loss", "val_loss"]
    assert [r[0] for r in rows[1:]] == ["1", "2", "3"]
    assert float(rows[2][1]) == hist.train_loss[1]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 64), st.integers(0, 1000))
def test_batch_size_does_not_break_training(batch, seed):
    x, y = _separable(40, seed)
    _, hist = train(MlpSpec(hidden=(3,), input_dim=2), (x, y), None, TrainConfig(epochs=1, batch_size=batch, seed=seed))
    assert math.isfinite(hist.train_loss[0])

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aquanet.core_math import (
    ActivationKind,
    activation_derivative,
    apply_activation,
    as_matrix,
    dropout_mask,
    finite_difference_gradient,
    matmul,
    sigmoid,
    sigmoid_array,
    softmax_rows,
    weighted_sum,
)
from aquanet.errors import DimensionError, DomainError, UnsupportedActivationError

finite = st.floats(-50, 50, allow_nan=False)


def test_weighted_sum_example():
    assert weighted_sum([0.5, -1.0, 2.0], [2.0, 3.0, 0.25], 1.5) == 0.0


def test_weighted_sum_rejects_length_mismatch():
    with pytest.raises(DimensionError):
        weighted_sum([1.0, 2.0], [1.0], 0.0)
    with pytest.raises(DimensionError):
        weighted_sum([], [], 0.0)


@given(st.lists(finite, min_size=1, max_size=20), finite)
def test_weighted_sum_with_zero_weights_is_bias(xs, b):
    assert weighted_sum([0.0] * len(xs), xs, b) == b


def test_sigmoid_matches_extended_precision():
    mpmath.mp.dps = 40
    for z in (-30.0, -1.0, 0.0, 1.0, 7.5, 30.0):
        ref = 1 / (1 + mpmath.exp(-mpmath.mpf(z)))
        assert sigmoid(z) == pytest.approx(float(ref), rel=1e-15)
    assert sigmoid(1.0) == pytest.approx(0.7310585786300049, abs=1e-16)


def test_sigmoid_extremes_do_not_overflow():
    assert sigmoid(1000.0) == 1.0
    assert sigmoid(-1000.0) == 0.0
    np.testing.assert_array_equal(sigmoid_array(np.array([-1000.0, 1000.0])), [0.0, 1.0])


@given(finite)
def test_sigmoid_symmetry(z):
    assert sigmoid(z) + sigmoid(-z) == pytest.approx(1.0, abs=1e-15)
    assert sigmoid_array(np.array([z]))[0] == pytest.approx(sigmoid(z), rel=1e-15)


@settings(max_examples=200)
@given(st.lists(st.floats(-700, 700, allow_nan=False), min_size=1, max_size=10))
def test_softmax_rows_is_a_distribution(row):
    p = softmax_rows(np.array([row]))
    assert np.all(p >= 0)
    assert abs(p.sum() - 1.0) <= 1e-12


@given(st.lists(finite, min_size=2, max_size=8), finite)
def test_softmax_shift_invariance(row, c):
    r = np.array([row])
    np.testing.assert_allclose(softmax_rows(r), softmax_rows(r + c), atol=1e-12)


def test_softmax_large_logits():
    p = softmax_rows(np.array([[1000.0, 1000.0, -1000.0]]))
    np.testing.assert_allclose(p, [[0.5, 0.5, 0.0]])


def test_apply_activation_kinds():
    z = np.array([[-2.0, 0.0, 3.0]])
    np.testing.assert_array_equal(apply_activation("relu", z), [[0.0, 0.0, 3.0]])
    np.testing.assert_array_equal(apply_activation(ActivationKind.LINEAR, z), z)
    np.testing.assert_allclose(apply_activation("tanh", z), np.tanh(z))
    with pytest.raises(DomainError):
        apply_activation("swish", z)


@pytest.mark.parametrize("kind", ["sigmoid", "tanh", "linear"])
def test_activation_derivative_against_finite_differences(kind):
    z = np.linspace(-3, 3, 13).reshape(1, -1)
    num = finite_difference_gradient(lambda v: float(apply_activation(kind, v).sum()), z)
    np.testing.assert_allclose(activation_derivative(kind, z), num, atol=1e-9)


def test_relu_derivative_and_softmax_rejection():
    np.testing.assert_array_equal(activation_derivative("relu", np.array([-1.0, 0.0, 2.0])), [0, 0, 1])
    with pytest.raises(UnsupportedActivationError):
        activation_derivative("softmax", np.zeros(3))


def test_matmul_dimension_check():
    assert matmul([[1.0, 2.0]], [[3.0], [4.0]])[0, 0] == 11.0
    with pytest.raises(DimensionError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_as_matrix():
    assert as_matrix([1, 2, 3, 4], 2, 2).shape == (2, 2)
    assert as_matrix([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(DimensionError):
        as_matrix([1, 2, 3], 2, 2)
    with pytest.raises(DomainError):
        as_matrix([[np.nan]])


def test_finite_difference_on_known_function():
    at = np.array([[0.3, -1.2], [2.0, 0.5]])
    g = finite_difference_gradient(lambda x: float(np.sum(np.sin(x) * x)), at)
    np.testing.assert_allclose(g, np.cos(at) * at + np.sin(at), atol=1e-9)


def test_dropout_mask_values(rng):
    m = dropout_mask((1000,), 0.25, rng)
    assert set(np.unique(m)) <= {0.0, 1.0 / 0.75}
    assert np.all(dropout_mask((5,), 0.0, rng) == 1.0)
    with pytest.raises(DomainError):
        dropout_mask((5,), 1.0, rng)

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from numpy.testing import assert_allclose, assert_array_equal

from rcnlab.app.core_model.schema.model import LabeledExample, MarginHalfspaceInstance
from rcnlab.app.core_model.service.primitives import (
    disagreement_indicator,
    disagreement_rate,
    empirical_subgradient,
    leaky_relu_loss,
    leaky_relu_subgradient,
    sign_array,
    sign_fn,
)
from rcnlab.common.enums import SignLabel
from rcnlab.common.exception import errors

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


@pytest.mark.parametrize(('t', 'expected'), [(0.0, 1), (-0.0, 1), (-3.2, -1), (7.0, 1)])
def test_sign_fn(t, expected):
    assert sign_fn(t) == expected
    assert isinstance(sign_fn(t), SignLabel)


@pytest.mark.parametrize('t', [math.nan, math.inf, -math.inf])
def test_sign_fn_rejects_non_finite(t):
    with pytest.raises(errors.RangeError):
        sign_fn(t)


def test_sign_array_matches_sign_fn():
    t = np.array([-1.5, -0.0, 0.0, 2.0])
    assert_array_equal(sign_array(t), [sign_fn(v) for v in t])


@pytest.mark.parametrize(
    ('w', 'y', 'eta', 'expected'),
    [
        (E1, 1, 1 / 3, -1 / 3),
        (E1, -1, 1 / 3, 2 / 3),
        (-E1, -1, 1 / 4, 1 / 4),
    ],
)
def test_leaky_relu_subgradient_examples(w, y, eta, expected):
    g = leaky_relu_subgradient(w, E1, y, eta)
    assert_allclose(g, expected * E1, rtol=0, atol=1e-15)


def test_leaky_relu_subgradient_norm_is_one_minus_eta_on_mistake():
    g = leaky_relu_subgradient(E1, E1, -1, 1 / 3)
    assert math.isclose(float(np.linalg.norm(g)), 2 / 3, rel_tol=1e-15)


def test_leaky_relu_subgradient_dimension_mismatch():
    with pytest.raises(errors.DimensionError):
        leaky_relu_subgradient(E1, np.ones(3) / math.sqrt(3), 1, 0.2)


def test_leaky_relu_subgradient_rejects_bad_eta():
    with pytest.raises(errors.RangeError):
        leaky_relu_subgradient(E1, E1, 1, 0.5)


def _random_tuples(rng, n, d):
    W = rng.standard_normal((n, d))
    W /= np.maximum(np.linalg.norm(W, axis=1, keepdims=True), 1.0)
    W_bar = rng.uniform(-1, 1, (n, d)) / math.sqrt(d)
    X = rng.standard_normal((n, d))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    eta = rng.uniform(0, 0.5, n)
    return W, W_bar, X, y, eta


def _field(W, X, y, eta):
    s = sign_array(np.einsum('ij,ij->i', W, X))
    return (0.5 * ((1 - 2 * eta) * s - y))[:, None] * X


def test_subgradient_norm_bound(rng):
    W, _, X, y, eta = _random_tuples(rng, 100_000, 6)
    norms = np.linalg.norm(_field(W, X, y, eta), axis=1)
    assert np.all(norms <= 1 - eta + 1e-12)


def test_key_identity(rng):
    W, W_bar, X, y, eta = _random_tuples(rng, 100_000, 6)
    lhs = np.einsum('ij,ij->i', _field(W, X, y, eta) - _field(W_bar, X, y, eta), W - W_bar)
    wx = np.einsum('ij,ij->i', W, X)
    wbx = np.einsum('ij,ij->i', W_bar, X)
    disagree = sign_array(wx) != sign_array(wbx)
    rhs = (1 - 2 * eta) * disagree * (np.abs(wx) + np.abs(wbx))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_key_identity_pointwise_against_scalar_path(rng):
    for _ in range(50):
        w, w_bar, x = rng.uniform(-0.5, 0.5, (3, 4))
        x /= np.linalg.norm(x)
        eta = float(rng.uniform(0, 0.5))
        diff = leaky_relu_subgradient(w, x, 1, eta) - leaky_relu_subgradient(w_bar, x, 1, eta)
        rhs = (1 - 2 * eta) * disagreement_indicator(w, w_bar, x) * (abs(w @ x) + abs(w_bar @ x))
        assert abs(diff @ (w - w_bar) - rhs) <= 1e-12


def test_empirical_subgradient_single_example():
    x = np.array([0.6, -0.8])
    g = empirical_subgradient(E1, [LabeledExample(x=x, y=-1)], 0.25)
    assert_allclose(g, leaky_relu_subgradient(E1, x, -1, 0.25))


def test_empirical_subgradient_opposite_vectors_average_to_zero():
    # w·x >= 0 for both, labels chosen so the two subgradients are v and -v
    x1 = np.array([1.0, 0.0])
    x2 = np.array([-1.0, 0.0])
    w = E2
    g1 = leaky_relu_subgradient(w, x1, -1, 0.0)
    g2 = leaky_relu_subgradient(w, x2, -1, 0.0)
    assert_allclose(g1, -g2)
    g = empirical_subgradient(w, [LabeledExample(x=x1, y=-1), LabeledExample(x=x2, y=-1)], 0.0)
    assert_allclose(g, np.zeros(2), atol=0)


def test_empirical_subgradient_vanishes_at_w_star_without_noise(rng, noiseless_instance):
    X = rng.standard_normal((200, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    y = sign_array(X @ noiseless_instance.w_star)
    examples = [LabeledExample(x=x, y=int(label)) for x, label in zip(X, y)]
    g = empirical_subgradient(noiseless_instance.w_star, examples, 0.0)
    assert_array_equal(g, np.zeros(3))


def test_empirical_subgradient_permutation_invariant(rng):
    X = rng.standard_normal((300, 4))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    examples = [LabeledExample(x=x, y=1 if rng.random() < 0.5 else -1) for x in X]
    w = rng.uniform(-0.4, 0.4, 4)
    shuffled = [examples[i] for i in rng.permutation(len(examples))]
    assert_allclose(empirical_subgradient(w, examples, 0.3), empirical_subgradient(w, shuffled, 0.3), atol=1e-15)
    assert np.linalg.norm(empirical_subgradient(w, examples, 0.3)) <= 0.7 + 1e-12


def test_empirical_subgradient_empty_list():
    with pytest.raises(errors.LearnerError):
        empirical_subgradient(E1, [], 0.2)


def test_disagreement_indicator_examples(rng):
    assert disagreement_indicator(E1, E2, np.array([1.0, -1.0]) / math.sqrt(2)) == 1
    for _ in range(20):
        w = rng.standard_normal(2)
        x = rng.standard_normal(2)
        x /= np.linalg.norm(x)
        assert disagreement_indicator(w, w, x) == 0
        assert disagreement_indicator(-w, w, x) == int(w @ x != 0)


def test_disagreement_indicator_dimension_mismatch():
    with pytest.raises(errors.DimensionError):
        disagreement_indicator(E1, np.ones(3), E1)


def test_disagreement_rate(rng):
    X = rng.standard_normal((1000, 2))
    assert disagreement_rate(E1, E1, X) == 0.0
    assert disagreement_rate(E1, -E1, X) == 1.0


def test_leaky_relu_loss_values():
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1.0, 1.0])
    # z = -y w·x = (-1, +1) -> eta * -1 and (1 - eta) * 1
    assert math.isclose(leaky_relu_loss(E1, X, y, 0.25), (0.25 * -1 + 0.75 * 1) / 2)


def test_instance_validation():
    with pytest.raises(errors.RangeError):
        MarginHalfspaceInstance(w_star=np.array([1.0, 1.0]), gamma=0.2, eta=0.1)
    with pytest.raises(errors.RangeError):
        MarginHalfspaceInstance(w_star=E1, gamma=1.0, eta=0.1)
    with pytest.raises(errors.RangeError):
        MarginHalfspaceInstance(w_star=E1, gamma=0.2, eta=0.5)
    inst = MarginHalfspaceInstance(w_star=E1, gamma=0.2, eta=0.1)
    assert inst.d == 2
    with pytest.raises(ValueError):
        inst.w_star[0] = 0.5

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from numpy.testing import assert_allclose, assert_array_equal

from rcnlab.app.core_model.service.primitives import sign_array
from rcnlab.app.dimreduce.schema.dimreduce import JlConfig
from rcnlab.app.dimreduce.service.dimreduce_service import dimreduce_service
from rcnlab.app.learner.service.learner_service import learner_service
from rcnlab.app.simulate.schema.simulate import SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.exception import errors
from rcnlab.utils.rng import Stream


def _config(m: int, seed: int = 1) -> JlConfig:
    return JlConfig(m=m, seed=seed, beta=0.01, gamma=0.2)


def test_derive_jl_config():
    config = dimreduce_service.derive_jl_config(eps=0.2, delta=0.1, gamma=0.25, n=5000, seed=3)
    beta = 0.2 * 0.1 / 20 / 5000
    assert math.isclose(config.beta, beta)
    assert math.isclose(config.beta_prime, 0.2 / 2 / 5000)
    assert config.m == math.ceil(64 * math.log(1 / beta) / 0.25**2)
    assert config.m == config.m_derived
    override = dimreduce_service.derive_jl_config(eps=0.2, delta=0.1, gamma=0.25, n=5000, seed=3, m=50)
    assert override.m == 50
    assert override.m_derived == config.m


def test_sample_jl_matrix_entries():
    matrix = dimreduce_service.sample_jl_matrix(config=_config(9), d=7)
    assert matrix.entries.shape == (9, 7)
    assert np.all(np.abs(matrix.entries) == 1 / math.sqrt(9))


def test_sample_jl_matrix_sign_balance():
    matrix = dimreduce_service.sample_jl_matrix(config=_config(1000, seed=17), d=1000)
    assert abs(float(np.mean(matrix.entries > 0)) - 0.5) <= 0.0016


def test_sample_jl_matrix_is_deterministic():
    a = dimreduce_service.sample_jl_matrix(config=_config(20, seed=5), d=30)
    b = dimreduce_service.sample_jl_matrix(config=_config(20, seed=5), d=30)
    c = dimreduce_service.sample_jl_matrix(config=_config(20, seed=6), d=30)
    assert_array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, c.entries)


def test_jl_apply_zero_and_linearity(rng):
    matrix = dimreduce_service.sample_jl_matrix(config=_config(40), d=25)
    assert_array_equal(dimreduce_service.jl_apply(matrix=matrix, x=np.zeros(25)), np.zeros(40))
    x, y = rng.standard_normal((2, 25))
    lhs = dimreduce_service.jl_apply(matrix=matrix, x=x + y)
    rhs = dimreduce_service.jl_apply(matrix=matrix, x=x) + dimreduce_service.jl_apply(matrix=matrix, x=y)
    assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_jl_apply_dimension_mismatch():
    matrix = dimreduce_service.sample_jl_matrix(config=_config(4), d=3)
    with pytest.raises(errors.DimensionError):
        dimreduce_service.jl_apply(matrix=matrix, x=np.ones(4))


def test_jl_inner_product_is_unbiased(rng):
    d, m = 8, 16
    u = rng.standard_normal(d)
    v = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    products = np.empty(10_000)
    for seed in range(products.size):
        matrix = dimreduce_service.sample_jl_matrix(config=_config(m, seed=seed), d=d)
        products[seed] = dimreduce_service.jl_apply(matrix=matrix, x=u) @ dimreduce_service.jl_apply(matrix=matrix, x=v)
    stderr = products.std(ddof=1) / math.sqrt(products.size)
    assert abs(products.mean() - u @ v) <= 3 * stderr


def test_norm_concentration_failure_rate(rng):
    d, gamma, beta = 60, 0.5, 0.05
    m = math.ceil(64 * math.log(1 / beta) / gamma**2)
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    failures = 0
    for seed in range(200):
        matrix = dimreduce_service.sample_jl_matrix(config=_config(m, seed=seed), d=d)
        reduced = dimreduce_service.jl_apply(matrix=matrix, x=x)
        failures += abs(reduced @ reduced - 1) > gamma / 2
    assert failures / 200 <= beta


def test_lifted_evaluation_identity(rng):
    matrix = dimreduce_service.sample_jl_matrix(config=_config(30), d=12)
    W = rng.standard_normal((50, 30))
    X = rng.standard_normal((400, 12))
    lifted = X @ (W @ matrix.entries).T
    reduced = dimreduce_service.jl_apply(matrix=matrix, x=X) @ W.T
    clear = np.abs(reduced) > 1e-9
    assert_array_equal(sign_array(lifted)[clear], sign_array(reduced)[clear])


def test_norm_and_margin_fractions_on_identity_like_projection():
    matrix = dimreduce_service.sample_jl_matrix(config=_config(5), d=1)
    X = np.array([[1.0], [-1.0]])
    # A is a column of ±1/sqrt(5) entries so ||Ax||^2 = ||x||^2 exactly up to rounding
    assert dimreduce_service.norm_distortion_fraction(matrix=matrix, X=X, gamma=0.2) == 0.0
    assert dimreduce_service.margin_preservation_fraction(matrix=matrix, w_star=np.ones(1), X=X, gamma=0.2) == 0.0


def test_reduced_params():
    params = dimreduce_service.derive_reduced_params(eps=0.2, delta=0.1, eta=0.2, gamma=0.25)
    assert params.T == math.ceil((48 * 0.8 / (0.6 * 0.25 * 0.2)) ** 2 - 1)
    assert math.isclose(params.mu * 0.8 * math.sqrt(params.T + 1), 1)
    short = dimreduce_service.derive_reduced_params(eps=0.2, delta=0.1, eta=0.2, gamma=0.25, T=50)
    assert short.T == 50
    assert short.overridden


@pytest.fixture(scope='module')
def reduced_case():
    config = SimulatorConfig(d=30, gamma=0.3, eta=0.1, n=600, seed=21, w_star_mode='random_unit')
    train, instance = simulate_service.generate_dataset(config=config)
    holdout, _ = simulate_service.generate_dataset(config=config.model_copy(update={'n': 300}), stream=Stream.holdout)
    return train, holdout, instance


def test_reduced_train_with_square_matrix(reduced_case):
    train, holdout, instance = reduced_case
    jl = JlConfig(m=train.d, seed=2, beta=0.01, gamma=0.3, beta_prime=0.01)
    result = dimreduce_service.reduced_train(
        train=train, holdout=holdout, eps=0.3, delta=0.1, eta=0.1, gamma=0.3, jl=jl, T=80, w_star=instance.w_star
    )
    assert result.matrix.entries.shape == (train.d, train.d)
    assert result.trace.d == train.d
    assert result.lifted.shape == (81, train.d)
    assert np.all(np.linalg.norm(result.lifted, axis=1) <= 1 + 1e-12)
    assert result.selected.w.shape == (train.d,)
    assert np.linalg.norm(result.selected.w) <= 1 + 1e-12
    assert result.selected.holdout_error == learner_service.evaluate_error(w=result.selected.w, data=holdout)
    assert result.diagnostics is not None
    assert np.all(result.trace.contraction_slack >= -1e-9)


def test_reduced_train_selection_is_in_original_space(reduced_case):
    train, holdout, _ = reduced_case
    jl = JlConfig(m=12, seed=4, beta=0.01, gamma=0.3)
    result = dimreduce_service.reduced_train(
        train=train, holdout=holdout, eps=0.3, delta=0.1, eta=0.1, gamma=0.3, jl=jl, T=40
    )
    errs = learner_service.iterate_errors(iterates=result.lifted, data=holdout)
    assert result.selected.index == int(np.argmin(errs))
    assert result.trace.iterates.shape == (41, 12)


@pytest.mark.slow
def test_margin_preservation_over_matrix_seeds():
    d, gamma, beta_prime = 200, 0.2, 1e-3
    instance_config = SimulatorConfig(d=d, gamma=gamma, eta=0.1, n=10_000, seed=0, w_star_mode='random_unit')
    data, instance = simulate_service.generate_dataset(config=instance_config)
    m = math.ceil(64 * math.log(1 / beta_prime) / gamma**2)
    passes = 0
    for seed in range(10):
        matrix = dimreduce_service.sample_jl_matrix(config=JlConfig(m=m, seed=seed, beta=beta_prime, gamma=gamma), d=d)
        fraction = dimreduce_service.margin_preservation_fraction(
            matrix=matrix, w_star=instance.w_star, X=data.X, gamma=gamma
        )
        passes += fraction <= beta_prime
    assert passes >= 9

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from fractions import Fraction

import numpy as np
import pytest

from rcnlab.app.core_model.schema.model import MarginHalfspaceInstance
from rcnlab.utils.rng import make_rng

# Test data
PYTEST_SEED = 20240607
PYTEST_ETA = Fraction(1, 3)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(PYTEST_SEED)


@pytest.fixture
def instance() -> MarginHalfspaceInstance:
    w_star = np.zeros(5)
    w_star[0] = 1.0
    return MarginHalfspaceInstance(w_star=w_star, gamma=0.2, eta=0.2)


@pytest.fixture
def noiseless_instance() -> MarginHalfspaceInstance:
    w_star = np.array([0.6, 0.8, 0.0])
    return MarginHalfspaceInstance(w_star=w_star, gamma=0.1, eta=0.0)

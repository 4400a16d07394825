#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import math

from fractions import Fraction

import pytest

from rcnlab.app.hardness.service.kravchuk_service import kravchuk_service
from rcnlab.common.exception import errors
from rcnlab.utils.serializers import decode_json


def test_kravchuk_known_values():
    assert kravchuk_service.kravchuk(4, 2, 2) == Fraction(-1, 3)
    assert kravchuk_service.kravchuk(5, 3, 5) == -1
    assert kravchuk_service.kravchuk(7, 0, 3) == 1
    assert kravchuk_service.kravchuk(6, 3, 1) == 0


@pytest.mark.parametrize('n', [1, 2, 5, 10, 17, 32])
def test_kravchuk_symmetry_and_reflection(n):
    table = kravchuk_service.kravchuk_table(n)
    for a in range(n + 1):
        for b in range(n + 1):
            value = table[a, b]
            assert value == table[b, a]
            assert table[n - a, b] == (-1) ** b * value
            assert abs(table[a, n - b]) == abs(value)
            assert abs(value) <= 1


@pytest.mark.parametrize('n', range(0, 8))
def test_kravchuk_matches_brute_force(n):
    for a in range(n + 1):
        for b in range(n + 1):
            assert kravchuk_service.kravchuk_brute_force(n, a, b) == kravchuk_service.kravchuk(n, a, b)


@pytest.mark.slow
@pytest.mark.parametrize('n', range(8, 13))
def test_kravchuk_matches_brute_force_slow(n):
    for a in range(n + 1):
        for b in range(n + 1):
            assert kravchuk_service.kravchuk_brute_force(n, a, b) == kravchuk_service.kravchuk(n, a, b)


def test_kravchuk_rejects_bad_arguments():
    with pytest.raises(errors.RangeError):
        kravchuk_service.kravchuk(4, 5, 0)
    with pytest.raises(errors.RangeError):
        kravchuk_service.kravchuk(4, 0, -1)
    with pytest.raises(errors.BudgetExceededError):
        kravchuk_service.kravchuk(65, 1, 1)


def test_binomial():
    assert kravchuk_service.binomial(10, 3) == 120
    assert kravchuk_service.binomial(0, 0) == 1
    assert kravchuk_service.binomial(52, 5) == 2598960
    with pytest.raises(errors.RangeError):
        kravchuk_service.binomial(3, 4)
    with pytest.raises(errors.BudgetExceededError):
        kravchuk_service.binomial(1001, 2)
    assert math.isclose(kravchuk_service.log_binomial(1001, 2), math.log(math.comb(1001, 2)))


def test_kravchuk_bound_at_level_zero():
    check = kravchuk_service.kravchuk_bound_check(10, 5, 0)
    assert check.value == 1
    assert check.bound == 2.0
    assert check.holds


def test_kravchuk_bound_example():
    check = kravchuk_service.kravchuk_bound_check(20, 10, 4)
    assert check.value == abs(kravchuk_service.kravchuk(20, 10, 4))
    expected = math.exp(4) * 2**12 * ((4 / 20) ** 2 + 0.0)
    assert math.isclose(check.bound, expected)
    assert check.holds


@pytest.mark.parametrize('d', [2, 7, 16, 24, 32])
def test_kravchuk_bound_grid(d):
    for m in range(d + 1):
        for k in range(d // 2 + 1):
            assert kravchuk_service.kravchuk_bound_check(d, m, k).holds


def test_kravchuk_bound_requires_low_level():
    with pytest.raises(errors.RangeError):
        kravchuk_service.kravchuk_bound_check(10, 3, 6)


def test_kravchuk_table_serialization():
    table = kravchuk_service.kravchuk_table(3)
    assert table[1, 1] == Fraction(1, 3)
    lines = kravchuk_service.table_csv(table).splitlines()
    assert lines[0].startswith('# schema=kravchuk')
    assert lines[1] == 'n,a,b,num,den,value'
    assert lines[2 + 1 * 4 + 1].startswith('3,1,1,1,3,')
    assert decode_json(kravchuk_service.table_json(table))['schema'] == 'kravchuk'

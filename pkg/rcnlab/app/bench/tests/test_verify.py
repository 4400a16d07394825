#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import dataclasses

import pytest

from rcnlab.app.bench.service.train_service import train_service
from rcnlab.app.bench.service.verify_service import verify_service
from rcnlab.app.hardness.service.kravchuk_service import kravchuk_service
from rcnlab.common.enums import SuiteStatus
from rcnlab.common.exception import errors
from rcnlab.core.conf import settings
from rcnlab.utils.serializers import decode_json


@pytest.mark.parametrize(
    'name', ['subgradient_identity', 'kravchuk_oracle', 'rk_identity', 'near_orthogonal', 'pmf_correlation']
)
def test_quick_suite_passes(name):
    (result,) = verify_service.run(quick=True, only=[name])
    assert result.status == SuiteStatus.passed, result.counterexample
    assert result.checks > 0
    assert result.elapsed_ms >= 0


def test_kravchuk_sign_bug_is_reported(monkeypatch):
    exact = kravchuk_service.kravchuk

    def flipped(n, a, b):
        value = exact(n, a, b)
        return -value if (n, a, b) == (4, 2, 2) else value

    monkeypatch.setattr(kravchuk_service, 'kravchuk', flipped)
    (result,) = verify_service.run(quick=True, only=['kravchuk_oracle'])
    assert result.status == SuiteStatus.failed
    assert (result.counterexample['n'], result.counterexample['a'], result.counterexample['b']) == (4, 2, 2)
    assert result.message == 'closed form differs from brute force'


def test_kravchuk_bound_violation_is_reported(monkeypatch):
    exact = kravchuk_service.kravchuk_bound_check

    def broken(d, m, k):
        check = exact(d, m, k)
        return dataclasses.replace(check, holds=False) if (d, m, k) == (6, 1, 2) else check

    monkeypatch.setattr(kravchuk_service, 'kravchuk_bound_check', broken)
    (result,) = verify_service.run(quick=True, only=['kravchuk_oracle'])
    assert result.status == SuiteStatus.failed
    assert result.message == 'Kravchuk magnitude bound violated'
    assert (result.counterexample['d'], result.counterexample['m'], result.counterexample['k']) == (6, 1, 2)


def test_suite_error_is_recorded_as_failure():
    def exhausted(quick):
        raise errors.GenerationError(msg='sampler gave up', data={'d': 500})

    result = verify_service.run_suite('jl_pipeline', exhausted, True)
    assert result.status == SuiteStatus.failed
    assert result.message == 'sampler gave up'
    assert result.counterexample == {'error': 'GenerationError', 'data': {'d': 500}}


def test_run_continues_after_failed_suite(monkeypatch):
    def exhausted(quick):
        raise errors.BudgetExceededError(msg='enumeration too large')

    monkeypatch.setattr(verify_service, 'suite_kravchuk_oracle', exhausted)
    first, second = verify_service.run(quick=True, only=['kravchuk_oracle', 'near_orthogonal'])
    assert first.status == SuiteStatus.failed
    assert first.counterexample['error'] == 'BudgetExceededError'
    assert second.status == SuiteStatus.passed


def test_learner_guarantee_limits_decomposition_rows(monkeypatch):
    seen = []
    run = train_service.run

    def recording(**kwargs):
        record = run(**kwargs)
        seen.append(record.guarantee['test_rows'])
        return record

    monkeypatch.setattr(train_service, 'run', recording)
    (result,) = verify_service.run(quick=True, only=['learner_guarantee'])
    assert result.status == SuiteStatus.passed, result.counterexample
    assert seen == [settings.VERIFY_GUARANTEE_TEST_ROWS] * 3


def test_unknown_suite_is_rejected():
    with pytest.raises(errors.RangeError):
        verify_service.run(only=['nope'])


def test_report_layout():
    results = verify_service.run(quick=True, only=['near_orthogonal'])
    data = decode_json(verify_service.dumps(results, quick=True))
    assert data['status'] == 'pass'
    assert data['quick'] is True
    assert data['suites'][0]['name'] == 'near_orthogonal'
    assert data['suites'][0]['notes']['max_inner_product'] <= 22


@pytest.mark.slow
def test_quick_verification_passes():
    results = verify_service.run(quick=True)
    failed = [result.to_dict() for result in results if not result.passed]
    assert not failed


@pytest.mark.slow
def test_full_verification_passes():
    results = verify_service.run(quick=False)
    failed = [result.to_dict() for result in results if not result.passed]
    assert not failed

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import numpy as np
import pytest

from pydantic import ValidationError

from rcnlab.app.bench.schema.bench import SWEEP_COLUMNS, SweepConfig
from rcnlab.app.bench.service.sweep_service import sweep_service
from rcnlab.app.bench.service.train_service import train_service
from rcnlab.app.simulate.schema.simulate import SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.exception import errors
from rcnlab.core.conf import settings
from rcnlab.utils.rng import derive_seed


def _config(**kwargs) -> SweepConfig:
    base = dict(d=[4, 6], gamma=[0.3], eta=[0.1], eps=[0.4], N=[150], seeds_per_cell=2, test_size=300, T=50)
    return SweepConfig(**{**base, **kwargs})


def test_sweep_config_validation(monkeypatch):
    with pytest.raises(ValidationError):
        _config(d=[])
    with pytest.raises(ValidationError):
        _config(gamma=[1.5])
    monkeypatch.setattr(settings, 'SWEEP_MAX_CELLS', 3)
    with pytest.raises(ValidationError):
        _config()


def test_trials_order_and_seeds():
    trials = sweep_service.trials(_config(master_seed=9))
    assert [(t.cell, t.seed_index) for t in trials] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [t.d for t in trials] == [4, 4, 6, 6]
    assert trials[3].seed == derive_seed(9, 1, 1)
    assert len({t.seed for t in trials}) == 4


def test_single_trial_matches_train_output():
    config = _config(d=[4], seeds_per_cell=1)
    (row,) = sweep_service.run(config, parallel=1, timing=False)
    seed = derive_seed(0, 0, 0)
    dataset, _ = simulate_service.generate_dataset(
        config=SimulatorConfig(d=4, gamma=0.3, eta=0.1, n=150, seed=seed)
    )
    record = train_service.run(dataset=dataset, eps=0.4, delta=0.1, T=50, test_size=300, timing=False)
    assert row.seed == seed
    assert row.T == 50
    assert row.m is None
    assert row.err_holdout == record.errors.holdout
    assert row.err_test == record.errors.test
    assert row.min_disagreement == record.min_disagreement
    assert row.wallclock_ms == 0.0
    assert row.error is None


def test_failed_trial_keeps_running(monkeypatch):
    original = train_service.run

    def flaky(**kwargs):
        if kwargs['dataset'].d == 4:
            raise errors.LearnerError(msg='boom')
        return original(**kwargs)

    monkeypatch.setattr(train_service, 'run', flaky)
    rows = sweep_service.run(_config(), parallel=1, timing=False)
    assert [row.error for row in rows[:2]] == ['LearnerError: boom'] * 2
    assert rows[0].err_holdout is None
    assert all(row.error is None for row in rows[2:])
    assert rows[2].err_holdout is not None


def test_sweep_csv_layout():
    rows = sweep_service.run(_config(d=[4], seeds_per_cell=1), parallel=1, timing=False)
    lines = sweep_service.dumps(rows).splitlines()
    assert lines[0] == '# schema=sweep version=1'
    assert lines[1] == ','.join(SWEEP_COLUMNS)
    cells = lines[2].split(',')
    assert len(cells) == len(SWEEP_COLUMNS)
    assert cells[-1] == ''


def test_load_config(tmp_path):
    path = tmp_path / 'sweep.json'
    path.write_text('{"d": [5], "gamma": [0.2], "eta": [0.1], "eps": [0.3], "N": [100], "seeds_per_cell": 3}')
    config = sweep_service.load_config(path)
    assert config.cell_count == 1
    assert config.seeds_per_cell == 3


def test_order_is_independent_of_parallelism():
    config = _config()
    sequential = sweep_service.dumps(sweep_service.run(config, parallel=1, timing=False))
    pooled = sweep_service.dumps(sweep_service.run(config, parallel=2, timing=False))
    assert sequential == pooled


@pytest.mark.slow
def test_error_gap_shrinks_with_sample_size():
    config = SweepConfig(d=[10], gamma=[0.2], eta=[0.2], eps=[0.2], N=[100, 400, 1600, 6400], seeds_per_cell=5)
    rows = sweep_service.run(config, parallel=1, timing=False)
    medians = [np.median([r.err_test - 0.2 for r in rows if r.N == n]) for n in config.N]
    ranks = np.argsort(np.argsort(medians))
    rho = np.corrcoef(np.arange(len(medians)), ranks)[0, 1]
    assert rho < 0

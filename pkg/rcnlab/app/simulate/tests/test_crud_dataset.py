#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import numpy as np
import pytest

from rcnlab.app.simulate.crud.crud_dataset import dataset_dao
from rcnlab.app.simulate.schema.simulate import Dataset, SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.enums import DatasetFormat
from rcnlab.common.exception import errors


def test_empty_dataset_round_trip(tmp_path):
    dataset = Dataset(d=4, X=np.empty((0, 4)), y=np.empty(0))
    path = tmp_path / 'empty.ds'
    dataset_dao.write(dataset, path)
    assert path.read_text(encoding='utf-8') == 'format=sphere d=4 n=0\n'
    assert dataset_dao.read(path) == dataset


def test_small_dataset_round_trips_bit_exactly(tmp_path):
    config = SimulatorConfig(d=6, gamma=0.3, eta=0.25, n=3, seed=42, w_star_mode='random_unit')
    dataset, _ = simulate_service.generate_dataset(config=config)
    path = tmp_path / 'three.ds'
    dataset_dao.write(dataset, path)
    restored = dataset_dao.read(path)
    assert restored == dataset
    assert restored.X.tobytes() == dataset.X.tobytes()
    assert restored.provenance == config
    assert dataset_dao.dumps(restored) == dataset_dao.dumps(dataset)


def test_header_and_rows_layout():
    dataset = Dataset(d=2, X=np.array([[0.6, 0.8], [1.0, 0.0]]), y=np.array([1, -1]))
    lines = dataset_dao.dumps(dataset).splitlines()
    assert lines[0] == 'format=sphere d=2 n=2'
    assert lines[1].split()[0] == '+1'
    assert lines[2].split()[0] == '-1'
    assert len(lines[1].split()[1].replace('.', '').lstrip('0')) >= 17


def test_cube_dataset_round_trip():
    X = np.array([[1.0, -1.0, 1.0], [-1.0, -1.0, -1.0]])
    dataset = Dataset(d=3, X=X, y=np.array([1, 0]), fmt=DatasetFormat.cube, meta={'source': 'hard'})
    text = dataset_dao.dumps(dataset)
    assert text.splitlines() == ['format=cube d=3 n=2 source=hard', '1 1 -1 1', '0 -1 -1 -1']
    restored = dataset_dao.loads(text)
    assert restored == dataset
    assert restored.meta == {'source': 'hard'}


def test_wrong_arity_names_line(tmp_path):
    path = tmp_path / 'bad.ds'
    path.write_text('format=sphere d=2 n=2\n+1 0.6 0.8\n-1 1.0\n', encoding='utf-8')
    with pytest.raises(errors.FormatError) as exc:
        dataset_dao.read(path)
    assert exc.value.line == 3
    assert 'line 3' in exc.value.msg


@pytest.mark.parametrize(
    ('text', 'line'),
    [
        ('', 1),
        ('d=2 n=0\n', 1),
        ('format=torus d=2 n=0\n', 1),
        ('format=sphere d=two n=0\n', 1),
        ('format=sphere d=2 n=2\n+1 0.6 0.8\n', 3),
        ('format=sphere d=2 n=1\n+2 0.6 0.8\n', 2),
        ('format=sphere d=2 n=1\n+1 0.6 abc\n', 2),
        ('format=sphere d=2 n=1\n+1 3.0 4.0\n', 2),
        ('format=cube d=2 n=1\n-1 1 1\n', 2),
        ('format=cube d=2 n=1\n1 1 0\n', 2),
        ('format=sphere d=2 n=0 gamma=0.2 eta=0.1 seed=x w_star_mode=first_axis\n', 1),
    ],
)
def test_malformed_files(text, line):
    with pytest.raises(errors.FormatError) as exc:
        dataset_dao.loads(text)
    assert exc.value.line == line


def test_dataset_requires_matching_dimension():
    with pytest.raises(errors.DimensionError):
        Dataset(d=3, X=np.ones((2, 2)), y=np.ones(2))


def test_examples_view_requires_sphere():
    dataset = Dataset(d=1, X=np.ones((1, 1)), y=np.ones(1), fmt=DatasetFormat.cube)
    with pytest.raises(errors.FormatError):
        _ = dataset.examples

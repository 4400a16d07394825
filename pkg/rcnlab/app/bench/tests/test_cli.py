#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import json

from fractions import Fraction

import pytest

from rcnlab.cli import main
from rcnlab.common.exception.exit_code import CustomExitCode
from rcnlab.utils.serializers import decode_json, fraction_from_dict


def _simulate(path, *extra: str) -> int:
    argv = ['simulate', '--d', '6', '--gamma', '0.25', '--eta', '0.1', '--n', '400', '--seed', '7', '--out', str(path)]
    return main([*argv, *extra])


def test_simulate_is_deterministic(tmp_path, capsys):
    assert _simulate(tmp_path / 'a.ds') == 0
    summary = decode_json(capsys.readouterr().out)
    assert summary['instance']['d'] == 6
    assert summary['dataset']['n'] == 400
    assert _simulate(tmp_path / 'b.ds') == 0
    assert (tmp_path / 'a.ds').read_bytes() == (tmp_path / 'b.ds').read_bytes()


def test_simulate_missing_flag_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(['simulate', '--d', '6', '--eta', '0.1', '--n', '10', '--seed', '1', '--out', str(tmp_path / 'x.ds')])
    assert exc.value.code == 2


def test_simulate_range_error_names_the_flag(tmp_path, capsys):
    argv = ['simulate', '--d', '6', '--gamma', '1.5', '--eta', '0.1', '--n', '10', '--seed', '1']
    code = main([*argv, '--out', str(tmp_path / 'x.ds')])
    assert code == CustomExitCode.USAGE.code
    assert '--gamma' in capsys.readouterr().err
    assert not (tmp_path / 'x.ds').exists()


def test_train_is_byte_identical(tmp_path, capsys):
    path = tmp_path / 'a.ds'
    assert _simulate(path) == 0
    capsys.readouterr()
    argv = ['train', str(path), '--eps', '0.3', '--T', '150', '--test-size', '300', '--no-timing']
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    record = decode_json(first)
    assert record['schema'] == 'run_record'
    assert record['params']['T'] == 150
    assert record['wallclock_ms'] == 0
    for value in record['errors'].values():
        assert value is None or 0 <= value <= 1


def test_train_writes_out_file(tmp_path, capsys):
    path = tmp_path / 'a.ds'
    _simulate(path)
    out = tmp_path / 'run' / 'record.json'
    assert main(['train', str(path), '--eps', '0.3', '--T', '0', '--out', str(out)]) == 0
    record = decode_json(out.read_bytes())
    assert record['params']['T'] == 0


def test_train_rejects_cube_dataset(tmp_path):
    cube = tmp_path / 'hard.ds'
    argv = ['hardness', 'gen', '--d', '8', '--count', '2', '--samples', '50', '--dataset-out', str(cube)]
    assert main(argv) == 0
    code = main(['train', str(cube), '--eps', '0.3', '--eta', '0.2', '--gamma', '0.1'])
    assert code == CustomExitCode.FORMAT.code


def test_train_on_homogenized_dataset_reads_provenance(tmp_path, capsys):
    path = tmp_path / 'hard.ds'
    argv = ['hardness', 'gen', '--d', '8', '--count', '2', '--samples', '800', '--homogenize']
    assert main([*argv, '--dataset-out', str(path)]) == 0
    capsys.readouterr()
    assert main(['train', str(path), '--eps', '0.3', '--T', '100', '--test-size', '1000', '--no-timing']) == 0
    record = decode_json(capsys.readouterr().out)
    assert record['guarantee']['test_rows'] == 1000
    assert record['disagreement'] is not None
    assert record['dataset']['homogenized'] == '1'


def test_train_missing_file_is_execution_error(tmp_path):
    assert main(['train', str(tmp_path / 'missing.ds'), '--eps', '0.3']) == CustomExitCode.EXECUTION.code


def test_sweep_writes_versioned_csv(tmp_path):
    config = tmp_path / 'sweep.json'
    grid = {'d': [4], 'gamma': [0.3], 'eta': [0.1], 'eps': [0.4], 'N': [200]}
    config.write_text(json.dumps({**grid, 'seeds_per_cell': 2, 'test_size': 300}))
    out = tmp_path / 'sweep.csv'
    assert main(['sweep', str(config), '--parallel', '1', '--no-timing', '--out', str(out)]) == 0
    lines = out.read_text(encoding='utf-8').splitlines()
    assert lines[0].startswith('# schema=sweep version=')
    assert lines[1].split(',')[:3] == ['seed', 'd', 'gamma']
    assert len(lines) == 4


def test_sweep_invalid_config(tmp_path):
    config = tmp_path / 'sweep.json'
    config.write_text(json.dumps({'d': [], 'gamma': [0.3], 'eta': [0.1], 'eps': [0.4], 'N': [200]}))
    assert main(['sweep', str(config)]) == CustomExitCode.USAGE.code
    config.write_text('{not json')
    assert main(['sweep', str(config)]) == CustomExitCode.FORMAT.code


def test_hardness_kravchuk_table(capsys):
    assert main(['hardness', 'kravchuk', '--n', '4']) == 0
    table = decode_json(capsys.readouterr().out)
    assert table['n'] == 4
    assert len(table['values']) == 5
    assert all(len(row) == 5 for row in table['values'])
    assert fraction_from_dict(table['values'][2][2]) == Fraction(-1, 3)
    assert fraction_from_dict(table['values'][0][4]) == 1


def test_hardness_kravchuk_csv(capsys):
    assert main(['hardness', 'kravchuk', '--n', '4', '--format', 'csv']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == 'n,a,b,num,den,value'
    assert len(lines) == 2 + 25
    assert any(line.startswith('4,2,2,-1,3,') for line in lines)


def test_hardness_kravchuk_budget():
    assert main(['hardness', 'kravchuk', '--n', '65']) == CustomExitCode.BUDGET.code


def test_hardness_gen_family(capsys):
    assert main(['hardness', 'gen', '--d', '64', '--c', '0.25', '--count', '32', '--seed', '1']) == 0
    family = decode_json(capsys.readouterr().out)
    assert family['ok'] is True
    assert len(family['vectors']) == 32
    assert all(len(v) == 64 for v in family['vectors'])
    assert family['max_inner_product'] <= 22


def test_hardness_correlate_self_pair(capsys):
    assert main(['hardness', 'correlate', '--v', '++-+-+', '--s-star', '4']) == 0
    (report,) = decode_json(capsys.readouterr().out)['reports']
    mass = fraction_from_dict(report['eps_actual'])
    assert mass == Fraction(22, 64)
    assert fraction_from_dict(report['covariance']) == mass * (1 - mass)


def test_hardness_correlate_family_csv(capsys):
    argv = ['hardness', 'correlate', '--d', '12', '--c', '0.3', '--count', '3', '--format', 'csv']
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('# schema=correlation')
    assert len(lines) == 2 + 3


def test_hardness_correlate_budget_without_approx():
    v = '+' * 26
    assert main(['hardness', 'correlate', '--v', v, '--u', 'n' + v[1:]]) == CustomExitCode.BUDGET.code


@pytest.mark.parametrize('u', ['n+-+-+', 'npnpnp', 'N+n+N+'])
def test_hardness_correlate_negative_leading_vector(capsys, u):
    assert main(['hardness', 'correlate', '--v', 'pp-+-+', '--u', u, '--s-star', '4']) == 0
    (report,) = decode_json(capsys.readouterr().out)['reports']
    assert report['u'] == [-1, 1, -1, 1, -1, 1]
    assert report['v'] == [1, 1, -1, 1, -1, 1]


def test_hardness_correlate_equals_form(capsys):
    assert main(['hardness', 'correlate', '--v=-+-+-+', '--s-star', '4']) == 0
    (report,) = decode_json(capsys.readouterr().out)['reports']
    assert report['v'] == report['u'] == [-1, 1, -1, 1, -1, 1]


def test_hardness_rk_identity(capsys):
    assert main(['hardness', 'rk', '--v', '++++++++', '--u', '+++-++-+', '--s-star', '6']) == 0
    report = decode_json(capsys.readouterr().out)
    assert report['schema'] == 'rk'
    assert len(report['rk_terms']) == 9
    assert fraction_from_dict(report['rk_sum']) == fraction_from_dict(report['e_fvfu'])
    assert report['rd_holds'] is True


@pytest.mark.parametrize('value', ['++x+', '1,2,1'])
def test_bad_sign_vector_is_usage_error(value):
    with pytest.raises(SystemExit) as exc:
        main(['hardness', 'correlate', '--v', value])
    assert exc.value.code == 2


def test_verify_selected_suites(capsys):
    assert main(['verify', '--quick', '--only', 'kravchuk_oracle', 'near_orthogonal']) == 0
    report = decode_json(capsys.readouterr().out)
    assert report['status'] == 'pass'
    assert [suite['name'] for suite in report['suites']] == ['kravchuk_oracle', 'near_orthogonal']


def test_verify_unknown_suite():
    assert main(['verify', '--only', 'nope']) == CustomExitCode.USAGE.code


def test_version_prints_schema_versions(capsys):
    with pytest.raises(SystemExit) as exc:
        main(['--version'])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert 'run_record=' in out
    assert 'sweep_csv=' in out

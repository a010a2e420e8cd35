import json
import os

import pytest

import main as cli
from netsim import topology as topo

from conftest import path_topology


def _run(capsys, *argv):
    assert cli.main(list(argv)) == 0
    out = capsys.readouterr().out
    return json.loads(out)


@pytest.fixture
def string_file(tmp_path):
    path = tmp_path / 'string3.json'
    topo.save(path_topology([1, 2, 3]), path)
    return str(path)


def test_generate_to_stdout(capsys):
    payload = _run(capsys, 'generate', '--n', '6', '--shape', 'ring', '--seed', '2')
    assert payload['n'] == 6
    assert payload['base_shape'] == 'ring'
    assert len(payload['edges']) == 6


def test_generate_then_validate(capsys, tmp_path):
    path = str(tmp_path / 'tree.json')
    assert cli.main(['generate', '--n', '9', '--shape', 'binary_tree', '--out', path]) == 0
    capsys.readouterr()
    payload = _run(capsys, 'validate', '--topology', path)
    assert payload == {'valid': True, 'n': 9, 'edges': 8}


def test_pif(capsys, string_file):
    payload = _run(capsys, 'pif', '--topology', string_file, '--source', '1')
    assert payload == {'time': 4.0, 'transmissions': 5, 'tree': [[2, 1], [3, 2]]}


def test_pif_two_sources_verbose(capsys, string_file):
    assert cli.main(['-v', 'pif', '--topology', string_file, '--source', '1',
                     '--source', '3']) == 0
    captured = capsys.readouterr()
    payload = json.loads(captured.out)
    assert [p['source'] for p in payload['propagations']] == [1, 3]
    assert 'Transmissions' in captured.err


def test_elect_with_trace_and_log(capsys, string_file, tmp_path):
    trace = tmp_path / 'trace.txt'
    log = tmp_path / 'events.tsv'
    payload = _run(capsys, 'elect', '--topology', string_file, '--trace', str(trace),
                   '--event-log', str(log), '--delay', 'random', '--seed', '5')
    assert payload['leader'] == 3
    assert len(trace.read_text().splitlines()) == len(payload['merges'])
    assert log.read_text().count('\n') > 0


def test_elect_partial_initiators(capsys, string_file):
    payload = _run(capsys, 'elect', '--topology', string_file, '--initiators', '2')
    assert payload['leader'] == 3


def test_oracle(capsys, string_file):
    payload = _run(capsys, 'oracle', '--topology', string_file, '--x', '3')
    assert payload['leader'] == 3


def test_experiment(capsys, tmp_path):
    cfg = tmp_path / 'cfg.json'
    cfg.write_text(json.dumps({'n': 6, 'base_shape': ['string'], 'connectivity': [0.0, 1.0],
                               'replications': 2}))
    out = tmp_path / 'out'
    payload = _run(capsys, 'experiment', '--config', str(cfg), '--out', str(out), '--workbook')
    names = sorted(os.path.basename(p) for p in payload['files'])
    assert names == ['bounds.csv', 'plot_results.py', 'results.csv', 'results.xlsx',
                     'summary.csv']
    assert all(os.path.exists(p) for p in payload['files'])


def test_sweep_x(capsys, tmp_path):
    payload = _run(capsys, 'sweep-x', '--n', '32', '--x-min', '1.5', '--x-max', '4',
                   '--steps', '6', '--out', str(tmp_path))
    assert payload['rows'] >= 6
    assert os.path.exists(os.path.join(tmp_path, 'bounds_vs_x.csv'))


@pytest.mark.parametrize('argv', [
    ['sweep-x', '--n', '8', '--steps', '1'],
    ['oracle', '--topology', 'does-not-exist.json'],
    ['generate', '--n', '0'],
])
def test_handled_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 1
    assert 'Error' in capsys.readouterr().err


def test_disconnected_topology_rejected(capsys, tmp_path):
    path = tmp_path / 'split.json'
    path.write_text(json.dumps({'n': 4, 'edges': [[1, 2], [3, 4]]}))
    with pytest.raises(SystemExit):
        cli.main(['elect', '--topology', str(path)])
    assert 'connected components' in capsys.readouterr().err


def test_bad_growth_factor(capsys, string_file):
    with pytest.raises(SystemExit):
        cli.main(['elect', '--topology', string_file, '--x', '0.9'])
    assert 'growth factor' in capsys.readouterr().err


def test_non_numeric_config_value(capsys, tmp_path):
    cfg = tmp_path / 'cfg.json'
    cfg.write_text(json.dumps({'n': 6, 'x': 'three'}))
    with pytest.raises(SystemExit) as info:
        cli.main(['experiment', '--config', str(cfg), '--out', str(tmp_path / 'out')])
    assert info.value.code == 1
    assert 'must be numbers' in capsys.readouterr().err

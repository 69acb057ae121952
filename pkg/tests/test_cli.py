import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from ringtasep.harness.cli import main, read_config
from ringtasep.harness.compare import compare_curves
from ringtasep.errors import GridMismatch


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_roots_output(tmp_path, capsys):
    out = tmp_path / 'roots.csv'
    assert main(['roots', '--big-l', '6', '--big-n', '2', '--zhat', '0.2+0.1j',
                 '--out', str(out)]) == 0
    r = rows(out)
    assert r[0] == ['side', 'branch', 're', 'im', 'residual']
    assert len(r) == 7
    assert all(float(x[4]) < 1e-12 for x in r[1:])
    # 17 significant digits
    assert len(r[1][2].lstrip('-').replace('.', '').lstrip('0').split('e')[0]) >= 15


def test_finite_cdf_and_compare(tmp_path):
    a = tmp_path / 'a.csv'
    assert main(['finite-cdf', '--ic', 'step', '--big-l', '5', '--big-n', '2',
                 '--t', '1.0', '--a-min', '-1', '--a-max', '4', '--out', str(a)]) == 0
    r = rows(a)
    assert r[0] == ['a', 'prob', 'imag_residue']
    assert [int(x[0]) for x in r[1:]] == list(range(-1, 5))
    assert main(['compare', str(a), str(a), '--out', str(tmp_path / 'c.csv')]) == 0
    assert float(rows(tmp_path / 'c.csv')[1][0]) == 0.0

    b = tmp_path / 'b.csv'
    body = rows(a)
    body[3][1] = repr(float(body[3][1]) + 0.05)
    with open(b, 'w') as fh:
        csv.writer(fh, lineterminator='\n').writerows(body)
    assert main(['compare', str(a), str(b), '--threshold', '0.01',
                 '--out', str(tmp_path / 'c.csv')]) == 1
    assert float(rows(tmp_path / 'c.csv')[1][0]) == pytest.approx(0.05, abs=1e-12)


def test_compare_grid_mismatch(tmp_path):
    a = tmp_path / 'a.csv'
    b = tmp_path / 'b.csv'
    a.write_text('x,v\n0,0.1\n1,0.2\n')
    b.write_text('x,v\n0,0.1\n2,0.2\n')
    assert main(['compare', str(a), str(b)]) == 2
    with pytest.raises(GridMismatch):
        compare_curves([0, 1], [0, 0], [0, 2], [0, 0], 0.1)


def test_finite_cdf_warns_in_unreachable_tail(tmp_path, capsys):
    # particle 1 of a step start on L=64 waits behind the whole jam; by t=20
    # its tail probabilities are far below what double precision resolves
    out = tmp_path / 'tail.csv'
    code = main(['finite-cdf', '--ic', 'step', '--big-l', '64', '--big-n', '32',
                 '--t', '20', '--a-min', '-30', '--a-max', '-5', '--out', str(out)])
    assert code == 1
    assert 'cancellation-limited' in capsys.readouterr().err


def test_limit_cdf_with_reference(tmp_path):
    out = tmp_path / 'f1.csv'
    code = main(['limit-cdf', '--family', 'f1', '--tau', '1', '--x-min', '-1',
                 '--x-max', '1', '--x-step', '0.5', '--emit-reference', 'goe',
                 '--out', str(out)])
    assert code == 0
    r = rows(out)
    assert r[0] == ['x', 'value', 'imag_residue', 'm_used', 'M_used', 'goe']
    vals = [float(x[1]) for x in r[1:]]
    assert vals == sorted(vals)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / 'run.cfg'
    cfg.write_text('# flat ring\nic = flat\nbig-l = 6\nbig_n = 3\nt = 0.5\n'
                   'a-min = 2\na-max = 5\n')
    out = tmp_path / 'o.csv'
    assert main(['finite-cdf', '--config', str(cfg), '--out', str(out)]) == 0
    assert len(rows(out)) == 5
    assert main(['finite-cdf', '--config', str(cfg), '--a-max', '3',
                 '--out', str(out)]) == 0
    assert len(rows(out)) == 3
    assert read_config(cfg)['big_l'] == '6'


def test_usage_errors(tmp_path):
    assert main(['roots', '--big-l', '5']) == 2
    assert main(['finite-cdf', '--ic', 'flat', '--big-l', '7', '--big-n', '3',
                 '--t', '1', '--a-min', '0', '--a-max', '3']) == 2
    assert main(['limit-cdf', '--family', 'f1', '--tau', '-1']) == 2
    assert main(['simulate', '--ic', 'step', '--big-l', '6', '--big-n', '3',
                 '--t', '1', '--observable', 'speed:1']) == 2
    bad = tmp_path / 'bad.cfg'
    bad.write_text('colour = blue\n')
    assert main(['roots', '--config', str(bad)]) == 2
    assert main(['nonsense']) == 2


def test_sweep_small(tmp_path):
    out = tmp_path / 's.csv'
    code = main(['sweep', '--family', 'flat', '--l-values', '20,60', '--x-min',
                 '-1', '--x-max', '1', '--x-step', '0.5', '--out', str(out)])
    r = rows(out)
    assert r[0] == ['L', 'sup_distance', 'decreasing', 'cancellation']
    d = [float(x[1]) for x in r[1:]]
    assert all(v > 0 for v in d)
    assert code == (0 if d[1] < d[0] else 1)


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, '-m', 'ringtasep', 'simulate', '--help'],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for flag in ('--ic', '--big-l', '--big-n', '--t', '--observable', '--samples',
                 '--seed', '--out', '--threads', '--config'):
        assert flag in res.stdout


def test_threads_do_not_change_simulation(tmp_path):
    env = dict(os.environ, NUMBA_NUM_THREADS='3')
    outs = []
    for th in ('1', '3'):
        out = tmp_path / f'sim{th}.csv'
        res = subprocess.run(
            [sys.executable, '-m', 'ringtasep', 'simulate', '--ic', 'step',
             '--big-l', '10', '--big-n', '5', '--t', '4', '--samples', '400',
             '--seed', '17', '--threads', th, '--out', str(out)],
            env=env, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]

import io
import json

import pytest

from scslab.report import (
    CheckResult, EvalRow, compare_footer, fmt, manifest_path, open_output, write_check_table,
    write_compare_csv, write_eval_csv, write_manifest,
)
from scslab.scs import SCSResult


def make_rows():
    return [
        SCSResult(cutoff=T, direct_sum=10. + T, main_term=T, budgets={'tail': 0.5, 'envelope': 2.}, snapped=T != 40.)
        for T in (10., 20., 40.)
    ]


def test_fmt():
    assert fmt(None) == ''
    assert fmt(0.1) == '0.1'
    assert fmt(1 / 3) == '0.333333333333333'
    assert fmt(1e-20) == '1e-20'


def test_eval_csv():
    rows = [
        EvalRow('2.5', 1.25 - 0.5j, 1e-12),
        EvalRow('0.5+9.5337j', None, None, 'PoleProximityError: too close'),
    ]
    out = io.StringIO()
    write_eval_csv(rows, out)
    assert out.getvalue() == (
        'input,value_re,value_im,err,status\n'
        '2.5,1.25,-0.5,1e-12,ok\n'
        '0.5+9.5337j,,,,PoleProximityError: too close\n'
    )
    assert rows[0].ok and not rows[1].ok


def test_check_table():
    results = [
        CheckResult('gamma.reflection', 1e-14, 1e-10),
        CheckResult('kernel.connection', 3e-5, 1e-8, 'worst at a=-3'),
        CheckResult('picard.a0', float('inf'), 1e-8, 'did not converge'),
    ]
    out = io.StringIO()
    write_check_table(results, out)
    lines = out.getvalue().splitlines()
    assert lines[0].split() == ['identity', 'residual', 'tol', 'result']
    assert lines[1].endswith('PASS')
    assert lines[2].endswith('FAIL  worst at a=-3')
    assert 'FAIL' in lines[3]
    assert lines[-1] == '1 passed, 2 failed'


def test_compare_csv():
    out = io.StringIO()
    write_compare_csv(make_rows(), out, 'smoothed')
    lines = out.getvalue().splitlines()
    assert lines[0] == 'T,direct,main,remainder,budget_tail,budget_perron'
    assert lines[1] == '10,20,10,10,0.5,2'
    assert lines[4] == '# mode=smoothed'
    # the remainder is constant, so the fitted exponent is zero
    fit = dict(part.split('=') for part in lines[5].split()[2:])
    assert abs(float(fit['alpha'])) < 1e-9
    assert float(fit['C']) == pytest.approx(10.)
    assert '# envelope_constant C=5' in lines
    assert lines[-1] == '# unsnapped cutoffs: 40'


def test_footer_without_fit():
    rows = [SCSResult(cutoff=10., direct_sum=1., main_term=1., budgets={'tail': 0., 'envelope': 0.})]
    lines = compare_footer(rows, 'sharp')
    assert lines[:2] == ['mode=sharp', 'exponent_fit unavailable']


def test_open_output(tmp_path, capsys):
    path = tmp_path / 'sub' / 'out.csv'
    with open_output(path) as f:
        f.write('x\n')
    assert path.read_text() == 'x\n'
    with open_output(None) as f:
        f.write('to stdout\n')
    assert capsys.readouterr().out == 'to stdout\n'


def test_manifest(tmp_path):
    out = tmp_path / 'runs' / 'table.csv'
    path = manifest_path(out)
    assert path == tmp_path / 'runs' / 'manifest.json'
    assert manifest_path(None) is None
    write_manifest(path, command='compare', h=2, residuals={'max': 1e-9})
    data = json.loads(path.read_text())
    assert data['command'] == 'compare'
    assert data['residuals'] == {'max': 1e-9}
    write_manifest(None, command='noop')

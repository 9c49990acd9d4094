import json
from fractions import Fraction

import click
import pytest
import yaml
from click.testing import CliRunner

from app import (
    EXIT_DIAGNOSTIC, EXIT_PRECONDITION, EXIT_VERIFY, JSON_KEYS, cli, parse_orders, parse_point,
    rad_text, run_cli,
)
from balls import Ball
from constants import derivation_digest
from dsl import parse

GEOMETRIC = '(recip (poly 1 (1 0) (-1 1)))'


def run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeffs_human_output(capsys):
    code, out, _ = run(capsys, 'coeffs', '-e', GEOMETRIC, '--order', '3')
    assert code == 0
    assert out.splitlines() == ['0\t1', '1\t1', '2\t1', '3\t1']


def test_coeffs_json_for_translated_series(capsys):
    code, out, _ = run(capsys, 'coeffs', '-e', f'(translate {GEOMETRIC} 1/2)', '--order', '2',
                       '--digits', '10', '--json')
    assert code == 0
    payload = json.loads(out)
    assert list(payload)[:len(JSON_KEYS)] == list(JSON_KEYS)
    assert payload['kind'] == 'coeffs'
    assert [row[0] for row in payload['coeffs']] == [[0], [1], [2]]
    assert payload['coeffs'][1][1] == '4.0000000000 ± ≤5e-11'


def test_eval_of_linear_polynomial_at_origin(capsys):
    code, out, _ = run(capsys, 'eval', '-e', '(poly 1 (1 1))', '--digits', '5')
    assert code == 0
    assert out.strip() == '0.00000 ± 0'


def test_eval_from_file(capsys, derivation):
    code, out, _ = run(capsys, 'eval', derivation('geometric.iad'), '--at', '1/2', '--digits', '8')
    assert code == 0
    assert out.startswith('2.00000000 ± ')


def test_const_pi_json(capsys):
    code, out, _ = run(capsys, 'const', 'pi', '--digits', '10', '--json')
    assert code == 0
    payload = json.loads(out)
    assert list(payload) == list(JSON_KEYS)
    assert payload['kind'] == 'ball'
    assert payload['name'] == 'pi'
    assert payload['mid'].startswith('3.141592653')
    assert payload['rad'] == '≤5e-11'
    assert payload['digits'] == 10
    assert len(payload['derivation_hash']) == 64


def test_eval_json_hash_matches_constant_digests(capsys):
    code, out, _ = run(capsys, 'eval', '-e', GEOMETRIC, '--at', '1/2', '--digits', '6', '--json')
    assert code == 0
    expected = derivation_digest(parse(GEOMETRIC).expr.sexpr(), '1/2')
    assert json.loads(out)['derivation_hash'] == expected


def test_const_several_names_keep_order(capsys):
    code, out, _ = run(capsys, 'const', 'log2', 'pi', '--digits', '8')
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith('log2 = 0.69314718 ± ')
    assert lines[1].startswith('pi = 3.14159265 ± ')


def test_unknown_constant_is_a_diagnostic(capsys):
    code, _, err = run(capsys, 'const', 'tau', '--digits', '5')
    assert code == EXIT_DIAGNOSTIC
    assert 'unknown constant' in err


def test_parse_diagnostic_exit_code(capsys):
    code, out, err = run(capsys, 'eval', '-e', '(frob)')
    assert code == EXIT_DIAGNOSTIC
    assert out == ''
    assert "<inline>:1:2: syntax error: unknown form 'frob'" in err


def test_precondition_exit_code(capsys):
    code, _, err = run(capsys, 'eval', '-e', GEOMETRIC, '--at', '1', '--digits', '5')
    assert code == EXIT_PRECONDITION
    assert 'PointOutsideRadii' in err


def test_usage_errors_exit_one(capsys):
    assert run(capsys, 'eval')[0] == EXIT_DIAGNOSTIC
    assert run(capsys, 'eval', '-e', GEOMETRIC, '--at', 'x')[0] == EXIT_DIAGNOSTIC
    assert run(capsys, 'nonsense')[0] == EXIT_DIAGNOSTIC


def test_click_runner_reports_usage_errors():
    result = CliRunner().invoke(cli, ['eval', '-e', GEOMETRIC, '--at', '1,2'])
    assert result.exit_code == 2
    assert 'arity 1' in result.output


def test_majorant_command(capsys):
    code, out, _ = run(capsys, 'majorant', '-e', GEOMETRIC)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith('M ≤ ')
    assert lines[1].startswith('r_1 = ')


def test_majorant_json(capsys):
    code, out, _ = run(capsys, 'majorant', '-e', '(poly 2 (1 1 0) (1 0 1))', '--need', '3,1', '--json')
    assert code == 0
    payload = json.loads(out)
    assert payload['kind'] == 'majorant'
    assert Fraction(payload['radii'][0]) >= 3


def test_wprep_command(capsys):
    code, out, _ = run(capsys, 'wprep', '-e', '(poly 2 (1 0 2) (-1 1 0))', '--orders', '2,3')
    assert code == 0
    assert out.splitlines()[0] == 'P: monic of degree 2 in X_2'
    assert '  a_0: [1]: -1' in out.splitlines()


def test_wprep_json(capsys):
    code, out, _ = run(capsys, 'wprep', '-e', '(poly 2 (1 0 1) (-1 1 0))', '--orders', '2,2', '--json')
    assert code == 0
    payload = json.loads(out)
    assert payload['kind'] == 'prep'
    assert len(payload['P']) == 1


def test_wdiv_command(capsys, tmp_path):
    f = tmp_path / 'f.iad'
    g = tmp_path / 'g.iad'
    f.write_text('(poly 2 (1 0 1) (-1 1 0))', encoding='utf-8')
    g.write_text('(poly 2 (1 0 2))', encoding='utf-8')
    code, out, _ = run(capsys, 'wdiv', str(f), str(g), '--orders', '2,2')
    assert code == 0
    # X2^2 = (X2 - X1)(X2 + X1) + X1^2
    assert '  r_0: [2]: 1' in out.splitlines()


def test_wprep_not_regular_is_a_precondition(capsys):
    code, _, err = run(capsys, 'wprep', '-e', '(poly 2 (1 1 0))', '--orders', '2,2')
    assert code == EXIT_PRECONDITION
    assert 'NotRegular' in err


def test_list_command(capsys):
    code, out, _ = run(capsys, 'list')
    assert code == 0
    assert any(line.startswith('pi ') for line in out.splitlines())


def test_verify_single_golden_case(capsys):
    code, out, _ = run(capsys, 'verify', '--suite', 'paper', '--case', 'geometric series')
    assert code == 0
    assert out.splitlines()[0].startswith('✅ geometric series: ')
    assert out.splitlines()[-1] == '1/1 cases passed'


def test_verify_paper_suite_end_to_end(capsys):
    code, out, _ = run(capsys, 'verify', '--suite', 'paper')
    lines = out.splitlines()
    assert code == 0
    assert lines[-1] == '19/19 cases passed'
    assert all(line.startswith('✅ ') for line in lines[:-1])


def test_verify_with_no_matching_case(capsys):
    code, out, _ = run(capsys, 'verify', '--suite', 'paper', '--case', 'no such case')
    assert code == EXIT_VERIFY
    assert out.strip() == '0/0 cases passed'


def test_verify_failing_manifest(capsys, tmp_path):
    (tmp_path / 'g.iad').write_text(GEOMETRIC, encoding='utf-8')
    manifest = tmp_path / 'broken.yaml'
    manifest.write_text(yaml.safe_dump({'cases': [
        {'name': 'wrong expectation', 'kind': 'coeffs', 'file': 'g.iad', 'order': 2, 'expect': [1, 1, 2]},
    ]}), encoding='utf-8')
    code, out, _ = run(capsys, 'verify', '--suite', str(manifest))
    assert code == EXIT_VERIFY
    assert out.splitlines()[0].startswith('❌ wrong expectation: coefficient (2,)')


def test_verify_missing_suite(capsys, tmp_path):
    code, _, err = run(capsys, 'verify', '--suite', str(tmp_path / 'absent.yaml'))
    assert code == EXIT_DIAGNOSTIC
    assert 'no suite manifest' in err


def test_parse_point_and_orders():
    assert parse_point(None, 2) == (0, 0)
    assert parse_point('1/2, -3', 2) == (Fraction(1, 2), Fraction(-3))
    with pytest.raises(click.BadParameter):
        parse_point('1/0', 1)
    assert parse_orders('3,4') == (3, 4)
    assert parse_orders(None) is None
    with pytest.raises(click.BadParameter):
        parse_orders('3')
    with pytest.raises(click.BadParameter):
        parse_orders('-1,2')


def test_rad_text():
    assert rad_text(Ball.exact(1), 10) == '0'
    assert rad_text(Ball.exact(1).widen(Fraction(1, 10 ** 12)), 10) == '≤5e-11'
    assert rad_text(Ball.exact(1).widen(Fraction(1, 256)), 3) == '≤4e-3'

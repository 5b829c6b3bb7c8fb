import io
import json

import pandas as pd
import pytest

import purify
import verification

HEADER = 'F,yield_hashing,best_k,yield_recurrence,best_m,yield_ms,yield_ls,yield_combined'


def _run(capsys, argv):
    code = purify.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_curve_csv(capsys):
    code, out, _ = _run(capsys, ['curve', '--f-min', '0.25', '--f-max', '1.0', '--step', '0.25', '--m-max', '8'])
    assert code == 0
    assert out.splitlines()[0] == HEADER
    df = pd.read_csv(io.StringIO(out))
    assert list(df['F']) == [0.25, 0.5, 0.75, 1.0]

    top = df.iloc[-1]
    assert top['yield_hashing'] == 1.0
    assert top['best_k'] == 0 and top['yield_recurrence'] == 1.0
    assert top['best_m'] == 8 and top['yield_ms'] == pytest.approx(0.875)
    assert top['yield_ls'] == 0.5
    assert top['yield_combined'] == 1.0

    bottom = df.iloc[0]
    for column in ['yield_hashing', 'yield_recurrence', 'yield_ms', 'yield_ls', 'yield_combined']:
        assert bottom[column] == 0.0


def test_combined_dominates_at_point_eight(capsys):
    _, out, _ = _run(capsys, ['curve', '--f-min', '0.8', '--f-max', '0.81', '--step', '0.01', '--m-max', '16'])
    row = pd.read_csv(io.StringIO(out)).iloc[0]
    assert row['F'] == 0.8
    assert row['yield_recurrence'] >= row['yield_hashing']
    for column in ['yield_hashing', 'yield_recurrence', 'yield_ms', 'yield_ls']:
        assert row['yield_combined'] >= row[column]


def test_curve_is_deterministic(capsys):
    argv = ['curve', '--f-min', '0.6', '--f-max', '0.9', '--step', '0.1', '--m-max', '8']
    _, first, _ = _run(capsys, argv)
    _, second, _ = _run(capsys, argv)
    assert first == second


def test_curve_protocol_subset_and_output_file(capsys, tmp_path):
    path = tmp_path / 'curve.csv'
    code, out, err = _run(capsys, ['curve', '--step', '0.25', '--protocols', 'hashing,ls', '--output', str(path)])
    assert code == 0
    assert out == ''
    assert '✓' in err
    assert path.read_text().splitlines()[0] == 'F,yield_hashing,yield_ls'


def test_curve_json_for_single_state(capsys):
    code, out, _ = _run(capsys, ['curve', '--dist', '0.8,0.1,0.05,0.05', '--format', 'json', '--m-max', '8'])
    assert code == 0
    payload = json.loads(out)
    assert payload['config']['dist'] == pytest.approx([0.8, 0.1, 0.05, 0.05])
    assert len(payload['points']) == 1
    assert payload['points'][0]['F'] == 0.8
    assert payload['config']['werner'] is False


def test_curve_flags_werner_input(capsys):
    _, out, _ = _run(capsys, ['curve', '--dist', '0.7,0.1,0.1,0.1', '--format', 'json', '--m-max', '4'])
    assert json.loads(out)['config']['werner'] is True


@pytest.mark.parametrize("argv", [
    ['curve', '--f-min', '0.9', '--f-max', '0.5'],
    ['curve', '--step', '0'],
    ['curve', '--dist', '0.5,0.5,0.1,0'],
    ['curve', '--protocols', 'bogus'],
    ['crossover', '--f-min', '-0.1'],
    ['verify', 'recurrence', '--samples', '-5'],
    ['verify', 'ms', '--samples', '0'],
    ['verify', 'recurrence', '--seed', '-1'],
    ['verify', 'ms', '--samples', 'many'],
])
def test_usage_errors_exit_two(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        purify.main(argv)
    assert exc.value.code == 2


def test_library_usage_error_exits_two(capsys):
    code, _, err = _run(capsys, ['crossover', '--tol', '0'])
    assert code == 2
    assert '✗' in err


def test_crossover_text(capsys):
    code, out, _ = _run(capsys, ['crossover', '--f-min', '0.7', '--f-max', '0.9', '--step', '0.01', '--m-max', '16'])
    assert code == 0
    assert 'ls beats all competitors on [0.7' in out
    assert 'recurrence k=' in out and 'ms m=3' in out


def test_crossover_json_and_audit(capsys, tmp_path):
    audit = tmp_path / 'winners.csv'
    code, out, _ = _run(capsys, ['crossover', '--f-min', '0.95', '--f-max', '1.0', '--step', '0.01',
                                 '--m-max', '8', '--format', 'json', '--audit', str(audit)])
    assert code == 0
    payload = json.loads(out)
    assert payload['intervals'] == []
    assert payload['config']['competitors'] == ['recurrence', 'ms']
    winners = pd.read_csv(audit)
    assert len(winners) == 6
    assert 'ls' not in set(winners['winner'])


def test_verify_passes(capsys):
    code, out, _ = _run(capsys, ['verify', 'table'])
    assert code == 0
    assert '✓ table: 64/64 rows match' in out
    code, out, _ = _run(capsys, ['verify', 'recurrence', '--samples', '25', '--seed', '1'])
    assert code == 0
    assert '25/25' in out


def test_verify_failure_exits_one(capsys, monkeypatch):
    failing = verification._report('table', 64, 63, '63/64 rows match', 'row 0011 differs')
    monkeypatch.setitem(verification.CHECKS, 'table', lambda: failing)
    code, out, _ = _run(capsys, ['verify', 'table'])
    assert code == 1
    assert '✗ table' in out
    assert 'row 0011 differs' in out


def test_table_command(capsys):
    code, out, _ = _run(capsys, ['table'])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == 'monomial,input,f_image,marginal'
    assert len(lines) == 65
    assert 'F^4,00000000,00000000,0000' in lines


def test_threshold_command(capsys):
    code, out, _ = _run(capsys, ['threshold', '--protocols', 'hashing'])
    assert code == 0
    name, value = out.strip().split(': F = ')
    assert name == 'hashing'
    assert float(value) == pytest.approx(0.8107, abs=5e-4)

import csv
import io
import json
import logging
import shlex

import pytest

from egalitarian import cli

from .conftest import COINS_CSV, MACHINES_CSV


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def dataset(tmp_path):
    machines = tmp_path / 'machines.csv'
    coins = tmp_path / 'coins.csv'
    machines.write_text(MACHINES_CSV, encoding='utf-8')
    coins.write_text(COINS_CSV, encoding='utf-8')
    return ['--dataset-machines', str(machines), '--dataset-coins', str(coins)]


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_validate_shipped_dataset(capsys):
    assert cli.main(['catalog', 'validate']) == 0
    out = capsys.readouterr().out
    assert 'coins: 5' in out
    assert 'btc: 28 machines' in out
    assert 'ltc: 3 machines' in out


def test_validate_empty_file(tmp_path, capsys):
    empty = tmp_path / 'machines.csv'
    empty.write_text('', encoding='utf-8')
    assert cli.main(['catalog', 'validate', '--dataset-machines', str(empty)]) == 1
    captured = capsys.readouterr()
    assert 'missing header' in captured.err
    assert captured.out == ''


def test_validate_duplicate_row(tmp_path, dataset, capsys):
    machines = tmp_path / 'dup.csv'
    machines.write_text(MACHINES_CSV + "Antminer S11,btc,20.5e12,1435,512\n", encoding='utf-8')
    assert cli.main(['catalog', 'validate', '--dataset-machines', str(machines), dataset[2], dataset[3]]) == 1
    err = capsys.readouterr().err
    assert "duplicate machine 'Antminer S11'" in err
    assert 'line 6' in err


def test_validate_missing_file(tmp_path, capsys):
    missing = str(tmp_path / 'absent.csv')
    assert cli.main(['catalog', 'validate', '--dataset-coins', missing]) == 1
    assert missing in capsys.readouterr().err


def test_curve_default_grid(capsys):
    assert cli.main(['curve', '--coin', 'btc']) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ['capital_usd', 'roi']
    assert len(table) == 992
    assert table[1][0] == '100.0'
    assert table[-1][0] == '10000.0'


def test_curve_pure_stake_is_constant(capsys):
    assert cli.main(['curve', '--model', 'pure-pos', '--fee', '0', '--rate', '0.05']) == 0
    table = rows(capsys.readouterr().out)
    assert {roi for _, roi in table[1:]} == {'0.05'}


def test_curve_ticket_sawtooth(capsys):
    assert cli.main(['curve', '--model', 'ticket-pos', '--ticket-price', '1756']) == 0
    roi = {float(v): float(r) for v, r in rows(capsys.readouterr().out)[1:]}
    assert roi[1750.0] == 0.0
    assert roi[1760.0] == pytest.approx(0.05 * 1756 / 1760)
    assert roi[1760.0] > roi[3500.0]
    assert roi[3520.0] > roi[3500.0]


def test_curve_unknown_coin(capsys):
    assert cli.main(['curve', '--coin', 'doge']) == 1
    assert 'available coins: btc, dcr, eth, ltc, xmr' in capsys.readouterr().err


def test_curve_without_coin(capsys):
    assert cli.main(['curve']) == 1
    assert 'needs --coin' in capsys.readouterr().err


def test_curve_to_file(tmp_path, dataset, capsys):
    out = tmp_path / 'curve.json'
    args = ['curve', '--coin', 'btc', '--max-capital', '600', '--format', 'json', '--out', str(out)]
    assert cli.main(args + dataset) == 0
    assert capsys.readouterr().out == ''
    document = json.loads(out.read_text(encoding='utf-8'))
    assert len(document['points']) == 51
    assert document['metadata']['econ'] == {'electricity_cost': 0.08, 'duration': 8760.0}


@pytest.mark.parametrize('args', [
    ['curve', '--model', 'pure-pos', '--fee', '0.01', '--format', 'json'],
    ['egal', '--coin', 'ltc', '--max-capital', '1000', '--format', 'json'],
])
def test_printed_command_reproduces_artifact(capsys, args):
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    command = json.loads(first)['metadata']['command']

    words = shlex.split(command)
    assert words[0] == 'egalitarian'
    assert cli.main(words[1:]) == 0
    assert capsys.readouterr().out == first


def test_pow_metadata_names_dataset(capsys):
    assert cli.main(['egal', '--coin', 'ltc', '--max-capital', '500', '--format', 'json']) == 0
    metadata = json.loads(capsys.readouterr().out)['metadata']
    assert len(metadata['dataset_sha256']) == 64
    assert '--electricity-cost 0.08' in metadata['command']


def metadata_line(err):
    line, = [l for l in err.splitlines() if l.startswith('metadata: ')]
    return json.loads(line[len('metadata: '):])


def test_csv_metadata_goes_to_stderr(capsys):
    assert cli.main(['curve', '--coin', 'ltc', '--max-capital', '500']) == 0
    captured = capsys.readouterr()
    assert rows(captured.out)[0] == ['capital_usd', 'roi']
    metadata = metadata_line(captured.err)
    assert len(metadata['dataset_sha256']) == 64
    assert '--format csv' in metadata['command']

    words = shlex.split(metadata['command'])
    assert cli.main(words[1:]) == 0
    assert capsys.readouterr().out == captured.out


def test_csv_metadata_sidecar(tmp_path, dataset, capsys):
    out = tmp_path / 'egal.csv'
    assert cli.main(['egal', '--coin', 'btc', '--max-capital', '600', '--out', str(out)] + dataset) == 0
    assert capsys.readouterr().out == ''
    assert rows(out.read_text(encoding='utf-8'))[0] == ['egalitarianism', 'mean_roi', 'n']
    metadata = json.loads((tmp_path / 'egal.csv.meta.json').read_text(encoding='utf-8'))
    assert metadata['command'].startswith('egalitarian egal --model pow --coin btc')
    assert metadata['machines'] == 2


def test_egal_pure_stake_without_fee(capsys):
    assert cli.main(['egal', '--model', 'pure-pos', '--fee', '0', '--format', 'json']) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['egalitarianism'] == 0.0
    assert document['mean_roi'] == 0.05
    assert document['n'] == 991


def test_egal_csv(capsys):
    assert cli.main(['egal', '--model', 'ticket-pos']) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ['egalitarianism', 'mean_roi', 'n']
    assert len(table) == 2
    assert float(table[1][0]) < 0


def test_egal_btc_below_ltc(capsys):
    scores = {}
    for coin in ('btc', 'ltc'):
        assert cli.main(['egal', '--coin', coin, '--format', 'json']) == 0
        scores[coin] = json.loads(capsys.readouterr().out)['egalitarianism']
    assert scores['btc'] < scores['ltc'] < 0


def test_config_file_precedence(tmp_path, capsys):
    ini = tmp_path / 'run.ini'
    ini.write_text("[egalitarian]\ncoin = ltc\nelectricity-cost = 0.05\nmax-capital = 500\nformat = json\n")

    assert cli.main(['egal', '--config', str(ini)]) == 0
    from_file = json.loads(capsys.readouterr().out)
    assert from_file['metadata']['econ']['electricity_cost'] == 0.05
    assert from_file['metadata']['grid']['max_capital'] == 500

    assert cli.main(['egal', '--config', str(ini), '--electricity-cost', '0.1']) == 0
    overridden = json.loads(capsys.readouterr().out)
    assert overridden['metadata']['econ']['electricity_cost'] == 0.1
    assert overridden['metadata']['coin']['coin'] == 'ltc'


def test_bad_config_file(tmp_path, capsys):
    ini = tmp_path / 'run.ini'
    ini.write_text("[egalitarian]\ncolour = blue\n")
    assert cli.main(['egal', '--config', str(ini)]) == 1
    assert "unknown key 'colour'" in capsys.readouterr().err


def test_config_file_values_are_validated(tmp_path, capsys):
    ini = tmp_path / 'run.ini'
    ini.write_text("[egalitarian]\nmodel = pure-pos\nformat = xml\n")
    assert cli.main(['curve', '--config', str(ini)]) == 1
    captured = capsys.readouterr()
    assert "unknown format 'xml'" in captured.err
    assert captured.out == ''


def test_sweep_invalid_axis(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(['sweep', '--coin', 'btc', '--axis', 'difficulty', '--values', '1'])
    assert excinfo.value.code == 2


def test_sweep_axis_of_another_model(capsys):
    args = ['sweep', '--coin', 'ltc', '--axis', 'fee', '--values', '1', '--long-format']
    assert cli.main(args) == 1
    assert "invalid sweep axis 'fee'" in capsys.readouterr().err


def test_single_value_sweep_matches_curve(capsys):
    grid = ['--max-capital', '2000']
    assert cli.main(['curve', '--coin', 'ltc'] + grid) == 0
    curve = rows(capsys.readouterr().out)

    assert cli.main(['sweep', '--coin', 'ltc', '--axis', 'electricity_cost', '--values', '0.08', '--long-format'] + grid) == 0
    sweep = rows(capsys.readouterr().out)

    assert sweep[0] == ['swept_value'] + curve[0]
    assert sweep[1:] == [['0.08'] + row for row in curve[1:]]


def test_sweep_electricity_orders_curves(capsys):
    args = [
        'sweep', '--coin', 'btc', '--axis', 'electricity_cost', '--values', '0.04', '0.08', '0.16',
        '--min-capital', '512', '--max-capital', '1022', '--step', '510', '--format', 'json',
    ]
    assert cli.main(args) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['swept_axis'] == 'electricity_cost'
    cheap, base, dear = ([p['roi'] for p in c['points']] for c in document['curves'])
    assert all(a > b > c for a, b, c in zip(cheap, base, dear))


def test_sweep_csv_needs_a_destination(capsys):
    assert cli.main(['sweep', '--model', 'pure-pos', '--axis', 'fee', '--values', '0', '1']) == 1
    assert '--out' in capsys.readouterr().err


def test_sweep_writes_one_file_per_value(tmp_path, capsys):
    out = tmp_path / 'fee.csv'
    args = ['sweep', '--model', 'pure-pos', '--axis', 'fee', '--values', '0', '1', '--out', str(out)]
    assert cli.main(args) == 0
    assert capsys.readouterr().out == ''

    free = rows((tmp_path / 'fee_fee-0.0.csv').read_text())
    paid = rows((tmp_path / 'fee_fee-1.0.csv').read_text())
    assert {roi for _, roi in free[1:]} == {'0.05'}
    assert float(paid[1][1]) == pytest.approx(0.05 * 99 / 100)
    sidecar = json.loads((tmp_path / 'fee_fee-1.0.csv.meta.json').read_text())
    assert sidecar['stake'] == {'rate': 0.05, 'fee': 1.0}


def test_ip_opt_zero_capital(capsys):
    assert cli.main(['ip-opt', '--coin', 'btc', '--capital', '0', '--machines', 'Antminer S11']) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['objective'] == 0
    assert document['knapsack_proceeds'] == 0
    assert document['schedule']['holdings'] == {'Antminer S11': [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]}


def test_ip_opt_beats_upfront_purchase(tmp_path, capsys):
    out = tmp_path / 'schedule.json'
    args = [
        'ip-opt', '--coin', 'btc', '--capital', '1536', '--steps', '2',
        '--machines', 'Antminer S11', '--out', str(out),
    ]
    assert cli.main(args) == 0
    printed = capsys.readouterr().out
    assert 'objective:' in printed
    assert 'knapsack_proceeds:' in printed

    document = json.loads(out.read_text())
    assert document['objective'] >= document['knapsack_proceeds']
    assert document['schedule']['steps'] == 2
    assert document['schedule']['step_hours'] == 4380.0
    assert '--steps 2' in document['metadata']['command']


def test_ip_opt_guard(capsys):
    names = ['Antminer S11', 'Antminer S9j', 'AvalonMiner 841', 'AvalonMiner 851', 'AvalonMiner 921']
    assert cli.main(['ip-opt', '--coin', 'btc', '--capital', '1000', '--machines'] + names) == 1
    assert 'at most 4' in capsys.readouterr().err


def test_ip_opt_needs_mining(capsys):
    assert cli.main(['ip-opt', '--model', 'pure-pos', '--capital', '100']) == 1
    assert 'ip-opt schedules mining hardware' in capsys.readouterr().err

import shlex

import pytest

from egalitarian import ParameterError
from egalitarian.config import RunConfig, load_config_file


def test_defaults():
    config = RunConfig()
    assert config.econ().duration == 8760.0
    assert config.econ().electricity_cost == 0.08
    assert len(config.grid()) == 991
    assert config.stake_params().participation_fee == 0.01
    assert config.stake_params().ticket_price == 1756.0


def test_config_file(tmp_path):
    path = tmp_path / 'run.ini'
    path.write_text(
        "[egalitarian]\n"
        "coin = ltc\n"
        "electricity-cost = 0.1\n"
        "workers = 2\n",
        encoding='utf-8',
    )
    assert load_config_file(str(path)) == {'coin': 'ltc', 'electricity_cost': 0.1, 'workers': 2}


@pytest.mark.parametrize('body, message', [
    ("[other]\ncoin = btc\n", "missing \\[egalitarian\\] section"),
    ("[egalitarian]\ncolor = red\n", "unknown key 'color'"),
    ("[egalitarian]\nstep = ten\n", "must be a number"),
])
def test_bad_config_file(tmp_path, body, message):
    path = tmp_path / 'run.ini'
    path.write_text(body, encoding='utf-8')
    with pytest.raises(ParameterError, match=message):
        load_config_file(str(path))


def test_command_spells_out_every_value():
    config = RunConfig(coin='btc', electricity_cost=0.1, out='curve.csv')
    words = shlex.split(config.command('curve'))
    assert words[:2] == ['egalitarian', 'curve']
    assert words[words.index('--electricity-cost') + 1] == '0.1'
    assert words[words.index('--coin') + 1] == 'btc'
    assert '--out' not in words
    assert '--fee' not in words


def test_command_quotes_and_lists():
    config = RunConfig(model='ticket-pos')
    command = config.command('sweep', [('--values', [1.0, 2.0]), ('--long-format', True), ('--x', None)])
    words = shlex.split(command)
    assert words[words.index('--values') + 1:words.index('--values') + 3] == ['1.0', '2.0']
    assert '--long-format' in words
    assert '--x' not in words
    assert '--fee' not in words

    paths = RunConfig(coin='btc', machines_path='my machines.csv').command('curve')
    assert shlex.split(paths)[shlex.split(paths).index('--dataset-machines') + 1] == 'my machines.csv'


@pytest.mark.parametrize('values, message', [
    ({'format': 'xml'}, "unknown format 'xml'"),
    ({'model': 'pos'}, "unknown model 'pos'"),
    ({'workers': 0}, "workers must be at least 1"),
])
def test_settings_are_validated(values, message):
    with pytest.raises(ParameterError, match=message):
        RunConfig(**values)

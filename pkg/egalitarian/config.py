import configparser
import logging
import shlex
from dataclasses import dataclass, fields

from . import EconParams, ParameterError
from .allocator import DEFAULT_GRANULARITY
from .metric import CapitalGrid, DEFAULT_MAX_CAPITAL, DEFAULT_MIN_CAPITAL, DEFAULT_STEP
from .models import MODELS
from .staking import DEFAULT_FEE, DEFAULT_RATE, DEFAULT_TICKET_PRICE, StakeParams

logger = logging.getLogger(__name__)

CONFIG_SECTION = 'egalitarian'

PROGRAM = 'egalitarian'

FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class RunConfig:
    model: str = 'pow'
    coin: str = None
    machines_path: str = None
    coins_path: str = None
    electricity_cost: float = 0.08
    duration_hours: float = 8760.0
    granularity: float = DEFAULT_GRANULARITY
    fee: float = DEFAULT_FEE
    rate: float = DEFAULT_RATE
    ticket_price: float = DEFAULT_TICKET_PRICE
    min_capital: float = DEFAULT_MIN_CAPITAL
    max_capital: float = DEFAULT_MAX_CAPITAL
    step: float = DEFAULT_STEP
    format: str = 'csv'
    out: str = None
    workers: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(
                "unknown model '{0}', choose from: {1}".format(self.model, ", ".join(MODELS))
            )
        if self.format not in FORMATS:
            raise ParameterError(
                "unknown format '{0}', choose from: {1}".format(self.format, ", ".join(FORMATS))
            )
        if self.workers < 1:
            raise ParameterError("workers must be at least 1, got {0}".format(self.workers))

    def econ(self):
        return EconParams(electricity_cost=self.electricity_cost, duration=self.duration_hours)

    def grid(self):
        return CapitalGrid(min_capital=self.min_capital, max_capital=self.max_capital, step=self.step)

    def stake_params(self):
        return StakeParams(
            annual_return_rate=self.rate,
            participation_fee=self.fee,
            ticket_price=self.ticket_price,
        )

    def model_flags(self):
        flags = [('--model', self.model)]
        if self.model == 'pow':
            flags += [
                ('--coin', self.coin),
                ('--dataset-machines', self.machines_path),
                ('--dataset-coins', self.coins_path),
                ('--electricity-cost', self.electricity_cost),
                ('--duration-hours', self.duration_hours),
                ('--granularity', self.granularity),
            ]
        elif self.model == 'ticket-pos':
            flags += [('--rate', self.rate), ('--ticket-price', self.ticket_price)]
        else:
            flags += [('--fee', self.fee), ('--rate', self.rate)]
        return flags

    def command(self, subcommand, extra=()):
        """The command line that reproduces an artifact, with every resolved value spelled out."""
        flags = list(self.model_flags()) + [
            ('--min-capital', self.min_capital),
            ('--max-capital', self.max_capital),
            ('--step', self.step),
            ('--format', self.format),
        ] + list(extra)

        words = [PROGRAM] + subcommand.split()
        for flag, value in flags:
            if value is None or value is False:
                continue
            words.append(flag)
            if value is True:
                continue
            if isinstance(value, (list, tuple)):
                words.extend(_render(v) for v in value)
            else:
                words.append(_render(value))
        return ' '.join(shlex.quote(w) for w in words)


def _render(value):
    return repr(value) if isinstance(value, float) else str(value)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}

# INI keys are the long flag names; they map onto RunConfig fields.
CONFIG_KEYS = {
    'model': 'model',
    'coin': 'coin',
    'dataset-machines': 'machines_path',
    'dataset-coins': 'coins_path',
    'electricity-cost': 'electricity_cost',
    'duration-hours': 'duration_hours',
    'granularity': 'granularity',
    'fee': 'fee',
    'rate': 'rate',
    'ticket-price': 'ticket_price',
    'min-capital': 'min_capital',
    'max-capital': 'max_capital',
    'step': 'step',
    'format': 'format',
    'out': 'out',
    'workers': 'workers',
}


def load_config_file(path):
    """Reads the [egalitarian] section of an INI file into RunConfig field values."""
    parser = configparser.ConfigParser()
    with open(path, encoding='utf-8') as f:
        parser.read_file(f, source=path)

    if not parser.has_section(CONFIG_SECTION):
        raise ParameterError("{0}: missing [{1}] section".format(path, CONFIG_SECTION))

    values = {}
    for key, raw in parser.items(CONFIG_SECTION):
        if key not in CONFIG_KEYS:
            raise ParameterError(
                "{0}: unknown key '{1}', known keys: {2}".format(
                    path, key, ", ".join(sorted(CONFIG_KEYS))
                )
            )
        name = CONFIG_KEYS[key]
        kind = _FIELD_TYPES[name]
        try:
            if kind in (float, 'float'):
                values[name] = float(raw)
            elif kind in (int, 'int'):
                values[name] = int(raw)
            else:
                values[name] = raw
        except ValueError:
            raise ParameterError("{0}: '{1}' must be a number, got {2!r}".format(path, key, raw))

    logger.info("Loaded config file %s: %s", path, values)
    return values

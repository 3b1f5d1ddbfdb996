import csv
import hashlib
import io
import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')
DEFAULT_MACHINES_PATH = os.path.join(DATA_DIR, 'machines.csv')
DEFAULT_COINS_PATH = os.path.join(DATA_DIR, 'coins.csv')

MACHINES_HEADER = ('name', 'coin', 'hash_rate_hs', 'power_w', 'price_usd')
COINS_HEADER = (
    'coin',
    'block_rate_per_s',
    'total_hash_rate_hs',
    'block_reward_tokens',
    'token_price_usd',
)

_FIELD_LABELS = {
    'hash_rate_hs': 'hash_rate',
    'power_w': 'power',
    'price_usd': 'price',
    'block_rate_per_s': 'block_rate',
    'total_hash_rate_hs': 'total_hash_rate',
    'block_reward_tokens': 'block_reward',
    'token_price_usd': 'token_price',
}


class EgalitarianError(Exception):
    pass


class ParameterError(EgalitarianError, ValueError):
    pass


class CatalogError(EgalitarianError, ValueError):
    def __init__(self, message, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field

        location = []
        if path is not None:
            location.append(str(path))
        if line is not None:
            location.append("line {0}".format(line))
        if field is not None:
            location.append("field '{0}'".format(field))

        if location:
            message = "{0}: {1}".format(", ".join(location), message)
        super().__init__(message)


class UnknownCoinError(CatalogError):
    def __init__(self, coin, available):
        self.coin = coin
        self.available = sorted(available)
        super().__init__(
            "unknown coin '{0}', available coins: {1}".format(
                coin, ", ".join(self.available) or "(none)"
            )
        )


class InstanceTooLargeError(EgalitarianError):
    pass


class EvaluationError(EgalitarianError):
    def __init__(self, capital, cause):
        self.capital = capital
        self.cause = cause
        super().__init__(
            "evaluation failed at capital {0!r}: {1}".format(capital, cause)
        )

    def __reduce__(self):
        # crosses worker process boundaries; the cause travels as text
        return type(self), (self.capital, str(self.cause))


def _require_finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ParameterError("{0} must be a finite number, got {1!r}".format(name, value))


@dataclass(frozen=True)
class Machine:
    """One hardware option. Canonical units: H/s, W, USD."""

    name: str
    coin: str
    hash_rate: float
    power: float
    price: float

    def __post_init__(self):
        if not self.name:
            raise ParameterError("machine name must be nonempty")
        for attr in ('hash_rate', 'power', 'price'):
            _require_finite(attr, getattr(self, attr))
        if self.hash_rate <= 0:
            raise ParameterError("hash_rate must be positive ({0})".format(self.name))
        if self.price <= 0:
            raise ParameterError("price must be positive ({0})".format(self.name))
        if self.power < 0:
            raise ParameterError("power must be non-negative ({0})".format(self.name))


@dataclass(frozen=True)
class CoinParams:
    coin: str
    block_rate: float
    total_hash_rate: float
    block_reward: float
    token_price: float

    def __post_init__(self):
        if not self.coin:
            raise ParameterError("coin identifier must be nonempty")
        for attr in ('block_rate', 'total_hash_rate', 'block_reward', 'token_price'):
            value = getattr(self, attr)
            _require_finite(attr, value)
            if value <= 0:
                raise ParameterError(
                    "{0} must be positive ({1})".format(attr, self.coin)
                )


@dataclass(frozen=True)
class EconParams:
    electricity_cost: float = 0.08
    duration: float = 8760.0

    def __post_init__(self):
        _require_finite('electricity_cost', self.electricity_cost)
        _require_finite('duration', self.duration)
        if self.electricity_cost < 0:
            raise ParameterError("electricity_cost must be non-negative")
        if self.duration <= 0:
            raise ParameterError("duration must be positive")


@dataclass(frozen=True)
class MachineCatalog:
    machines: tuple = ()
    coins: dict = field(default_factory=dict)
    digest: str = field(default=None, compare=False)

    def __post_init__(self):
        seen = set()
        for m in self.machines:
            if m.coin not in self.coins:
                raise CatalogError(
                    "machine '{0}' mines unknown coin '{1}'".format(m.name, m.coin)
                )
            if (m.name, m.coin) in seen:
                raise CatalogError(
                    "duplicate machine '{0}' for coin '{1}'".format(m.name, m.coin)
                )
            seen.add((m.name, m.coin))

    def coin(self, coin):
        if coin not in self.coins:
            raise UnknownCoinError(coin, self.coins.keys())
        return self.coins[coin]

    def find(self, coin, names):
        """Machines of `coin` with the given names, in the order given."""
        by_name = {m.name: m for m in filter_by_coin(self, coin)}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise CatalogError(
                "no machine named {0} for coin '{1}'".format(
                    ", ".join(repr(n) for n in missing), coin
                )
            )
        return [by_name[n] for n in names]


def parse_number(text, allow_rational=False):
    """
    Locale-independent number parsing. Scientific notation is accepted and,
    when allow_rational is set, `a/b` literals, which round exactly like the
    equivalent decimal.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty value")

    if allow_rational and '/' in text:
        numerator, _, denominator = text.partition('/')
        denominator = Fraction(denominator.strip())
        if denominator == 0:
            raise ValueError("division by zero in {0!r}".format(text))
        value = float(Fraction(numerator.strip()) / denominator)
    else:
        value = float(text)

    if not math.isfinite(value):
        raise ValueError("{0!r} is not finite".format(text))
    return value


def _content_lines(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        yield lineno, line


def _read_rows(text, header, path):
    lines = _content_lines(text)
    try:
        header_lineno, header_line = next(lines)
    except StopIteration:
        raise CatalogError("missing header", path=path)

    found = tuple(cell.strip() for cell in next(csv.reader([header_line])))
    if found != header:
        raise CatalogError(
            "missing header: expected '{0}', found '{1}'".format(
                ",".join(header), ",".join(found)
            ),
            path=path,
            line=header_lineno,
        )

    for lineno, line in lines:
        cells = [cell.strip() for cell in next(csv.reader([line]))]
        if len(cells) != len(header):
            raise CatalogError(
                "expected {0} fields, found {1}".format(len(header), len(cells)),
                path=path,
                line=lineno,
            )
        yield lineno, dict(zip(header, cells))


def _number_field(row, name, lineno, path, positive=False, allow_rational=False):
    try:
        value = parse_number(row[name], allow_rational=allow_rational)
    except (ValueError, ZeroDivisionError) as e:
        raise CatalogError(
            "malformed number {0!r} ({1})".format(row[name], e),
            path=path, line=lineno, field=name,
        )

    if positive and value <= 0:
        raise CatalogError(
            "{0} must be positive".format(_FIELD_LABELS.get(name, name)),
            path=path, line=lineno, field=name,
        )
    if value < 0:
        raise CatalogError(
            "{0} must be non-negative".format(_FIELD_LABELS.get(name, name)),
            path=path, line=lineno, field=name,
        )
    return value


def parse_coins(text, path=None):
    coins = {}
    for lineno, row in _read_rows(text, COINS_HEADER, path):
        coin = row['coin']
        if not coin:
            raise CatalogError("coin identifier is empty", path=path, line=lineno, field='coin')
        if coin in coins:
            raise CatalogError(
                "duplicate coin '{0}'".format(coin), path=path, line=lineno, field='coin'
            )
        coins[coin] = CoinParams(
            coin=coin,
            block_rate=_number_field(
                row, 'block_rate_per_s', lineno, path, positive=True, allow_rational=True
            ),
            total_hash_rate=_number_field(row, 'total_hash_rate_hs', lineno, path, positive=True),
            block_reward=_number_field(row, 'block_reward_tokens', lineno, path, positive=True),
            token_price=_number_field(row, 'token_price_usd', lineno, path, positive=True),
        )
    return coins


def parse_machines(text, coins, path=None):
    machines = []
    seen = {}
    for lineno, row in _read_rows(text, MACHINES_HEADER, path):
        name, coin = row['name'], row['coin']
        if not name:
            raise CatalogError("machine name is empty", path=path, line=lineno, field='name')
        if coin not in coins:
            raise CatalogError(
                "unresolved coin '{0}', available coins: {1}".format(
                    coin, ", ".join(sorted(coins))
                ),
                path=path, line=lineno, field='coin',
            )
        if (name, coin) in seen:
            raise CatalogError(
                "duplicate machine '{0}' for coin '{1}' (first seen on line {2})".format(
                    name, coin, seen[(name, coin)]
                ),
                path=path, line=lineno, field='name',
            )
        seen[(name, coin)] = lineno

        machines.append(Machine(
            name=name,
            coin=coin,
            hash_rate=_number_field(row, 'hash_rate_hs', lineno, path, positive=True),
            power=_number_field(row, 'power_w', lineno, path),
            price=_number_field(row, 'price_usd', lineno, path, positive=True),
        ))
    return machines


def parse_catalog(machines_text, coins_text, machines_path=None, coins_path=None, digest=None):
    coins = parse_coins(coins_text, path=coins_path)
    machines = parse_machines(machines_text, coins, path=machines_path)
    return MachineCatalog(machines=tuple(machines), coins=coins, digest=digest)


def serialize_catalog(catalog):
    """Returns (machines_text, coins_text); floats are written with repr so they parse back exactly."""
    machines_out = io.StringIO()
    writer = csv.writer(machines_out, lineterminator='\n')
    writer.writerow(MACHINES_HEADER)
    for m in catalog.machines:
        writer.writerow([m.name, m.coin, repr(m.hash_rate), repr(m.power), repr(m.price)])

    coins_out = io.StringIO()
    writer = csv.writer(coins_out, lineterminator='\n')
    writer.writerow(COINS_HEADER)
    for c in catalog.coins.values():
        writer.writerow([
            c.coin,
            repr(c.block_rate),
            repr(c.total_hash_rate),
            repr(c.block_reward),
            repr(c.token_price),
        ])

    return machines_out.getvalue(), coins_out.getvalue()


def dataset_hash(machines_bytes, coins_bytes):
    digest = hashlib.sha256()
    digest.update(machines_bytes)
    digest.update(b'\0')
    digest.update(coins_bytes)
    return digest.hexdigest()


def _read_text(path):
    with open(path, 'rb') as f:
        raw = f.read()
    try:
        return raw, raw.decode('utf-8-sig')
    except UnicodeDecodeError as e:
        raise CatalogError("not valid UTF-8 ({0})".format(e), path=path)


def load_catalog(machines_path=None, coins_path=None):
    machines_path = machines_path or DEFAULT_MACHINES_PATH
    coins_path = coins_path or DEFAULT_COINS_PATH

    machines_raw, machines_text = _read_text(machines_path)
    coins_raw, coins_text = _read_text(coins_path)

    catalog = parse_catalog(
        machines_text,
        coins_text,
        machines_path=machines_path,
        coins_path=coins_path,
        digest=dataset_hash(machines_raw, coins_raw),
    )

    logger.info("Loaded catalog: %s", {
        'machines_path': machines_path,
        'coins_path': coins_path,
        'machines': len(catalog.machines),
        'coins': len(catalog.coins),
        'sha256': catalog.digest,
    })
    return catalog


def filter_by_coin(catalog, coin):
    catalog.coin(coin)
    return [m for m in catalog.machines if m.coin == coin]

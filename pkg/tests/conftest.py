import pytest

from egalitarian import CoinParams, EconParams, Machine, load_catalog


@pytest.fixture(scope='session')
def catalog():
    return load_catalog()


@pytest.fixture
def econ():
    return EconParams()


@pytest.fixture
def btc(catalog):
    return catalog.coin('btc')


# Revenue per hour equals the hash rate, in USD.
UNIT_COIN = CoinParams(
    coin='unit',
    block_rate=1.0,
    total_hash_rate=3600.0,
    block_reward=1.0,
    token_price=1.0,
)

FLAT_ECON = EconParams(electricity_cost=0.0, duration=1.0)


@pytest.fixture
def unit_coin():
    return UNIT_COIN


@pytest.fixture
def flat_econ():
    return FLAT_ECON


def unit_machine(name, price, value, power=0.0):
    """A machine on the unit coin earning `value` USD per hour before electricity."""
    return Machine(name=name, coin='unit', hash_rate=value, power=power, price=price)


MACHINES_CSV = (
    "# test catalog\n"
    "name,coin,hash_rate_hs,power_w,price_usd\n"
    "Whatsminer M10,btc,33e12,2145,1022\n"
    "Antminer S11,btc,20.5e12,1435,512\n"
    "Apollo LTC Pod,ltc,10e7,100,299\n"
)

COINS_CSV = (
    "coin,block_rate_per_s,total_hash_rate_hs,block_reward_tokens,token_price_usd\n"
    "btc,1/600,3.4727437e19,12.5,4074.25\n"
    "ltc,1/150,1.74537e14,25,32.10\n"
    "doge,0.0166,1e15,10000,0.002\n"
)

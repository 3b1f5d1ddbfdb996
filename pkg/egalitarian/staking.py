import logging
import math
from dataclasses import dataclass

from . import ParameterError

logger = logging.getLogger(__name__)

DEFAULT_RATE = 0.05
DEFAULT_FEE = 0.01
DEFAULT_TICKET_PRICE = 1756.0


@dataclass(frozen=True)
class StakeParams:
    """
    annual_return_rate is fresh USD-denominated tokens per USD staked over
    the investment period; participation_fee is paid once, up front.
    """

    annual_return_rate: float = DEFAULT_RATE
    participation_fee: float = 0.0
    ticket_price: float = DEFAULT_TICKET_PRICE

    def __post_init__(self):
        for attr in ('annual_return_rate', 'participation_fee', 'ticket_price'):
            value = getattr(self, attr)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError("{0} must be a finite number, got {1!r}".format(attr, value))
        if self.annual_return_rate < 0:
            raise ParameterError("annual_return_rate must be non-negative")
        if self.participation_fee < 0:
            raise ParameterError("participation_fee must be non-negative")
        if self.ticket_price <= 0:
            raise ParameterError("ticket_price must be positive")


def _check_positive(capital):
    if not isinstance(capital, (int, float)) or not capital > 0:
        raise ParameterError("capital must be positive, got {0!r}".format(capital))


def pure_stake_roi(capital, p):
    _check_positive(capital)
    stake = max(0.0, capital - p.participation_fee)
    # stake / capital first: with no fee the ratio is exactly 1.
    return p.annual_return_rate * (stake / capital)


def ticket_stake_roi(capital, p):
    _check_positive(capital)
    tickets = math.floor(capital / p.ticket_price)
    return p.annual_return_rate * ((tickets * p.ticket_price) / capital)

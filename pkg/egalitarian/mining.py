import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600
WATTS_PER_KILOWATT = 1000


@dataclass(frozen=True)
class IncomeRate:
    machine: object
    usd_per_hour: float
    revenue_per_hour: float
    electricity_per_hour: float


def revenue_per_hour(m, c):
    """USD of freshly mined tokens per hour: the machine's share of network hash power times the block reward stream."""
    return (
        SECONDS_PER_HOUR
        * (m.hash_rate / c.total_hash_rate)
        * c.block_reward
        * c.block_rate
        * c.token_price
    )


def electricity_per_hour(m, e):
    return (m.power / WATTS_PER_KILOWATT) * e.electricity_cost


def income_rate(m, c, e):
    revenue = revenue_per_hour(m, c)
    electricity = electricity_per_hour(m, e)
    return IncomeRate(
        machine=m,
        usd_per_hour=revenue - electricity,
        revenue_per_hour=revenue,
        electricity_per_hour=electricity,
    )


def machine_roi(m, c, e):
    return e.duration * income_rate(m, c, e).usd_per_hour / m.price


def profitable_machines(ms, c, e):
    profitable = [m for m in ms if income_rate(m, c, e).usd_per_hour > 0]

    if len(profitable) < len(ms):
        logger.debug(
            "Dropped %d machines with non-positive income rate for %s: %s",
            len(ms) - len(profitable),
            c.coin,
            [m.name for m in ms if m not in profitable],
        )

    return profitable


def roi_cap(ms, c, e):
    """
    The best single-machine ROI and the machine achieving it, or (0.0, None)
    when nothing is profitable. Ties go to the cheaper machine.
    """
    best, best_roi = None, 0.0
    for m in profitable_machines(ms, c, e):
        roi = machine_roi(m, c, e)
        if roi > best_roi or (roi == best_roi and best is not None and m.price < best.price):
            best, best_roi = m, roi
    return best_roi, best

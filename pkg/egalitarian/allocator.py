import itertools
import logging
import math
from dataclasses import dataclass, field

import pybnb

from . import InstanceTooLargeError, ParameterError
from .mining import electricity_per_hour, income_rate, profitable_machines, revenue_per_hour

logger = logging.getLogger(__name__)

DEFAULT_GRANULARITY = 1.0

ORACLE_MAX_VECTORS = 10 ** 7

IP_MAX_MACHINE_TYPES = 4
IP_MAX_STEPS = 24
IP_MAX_UNITS = 8
IP_MAX_NODES = 2000000

# Absorbs float noise when quantizing prices and capitals onto the granularity grid.
_EPS = 1e-9


def _check_capital(capital):
    if not isinstance(capital, (int, float)) or not math.isfinite(capital):
        raise ParameterError("capital must be a finite number, got {0!r}".format(capital))
    if capital < 0:
        raise ParameterError("capital must be non-negative, got {0!r}".format(capital))


def price_units(price, granularity):
    return max(1, math.ceil(price / granularity - _EPS))


def capacity_units(capital, granularity):
    return math.floor(capital / granularity + _EPS)


@dataclass(frozen=True)
class Allocation:
    capital: float
    counts: dict = field(default_factory=dict)
    spent: float = 0.0
    proceeds: float = 0.0

    @property
    def roi(self):
        return self.proceeds / self.capital if self.capital > 0 else 0.0

    def to_dict(self):
        return {
            'capital': self.capital,
            'spent': self.spent,
            'proceeds': self.proceeds,
            'counts': {m.name: n for m, n in self.counts.items()},
        }


def _allocation(capital, counts, c, e):
    counts = {m: n for m, n in counts.items() if n > 0}
    return Allocation(
        capital=capital,
        counts=counts,
        spent=sum(n * m.price for m, n in counts.items()),
        proceeds=sum(n * e.duration * income_rate(m, c, e).usd_per_hour for m, n in counts.items()),
    )


class KnapsackTable:
    """
    Unbounded knapsack over the profitable machines, solved once up to
    max_capital. Prices are rounded up and capital down onto the
    granularity grid, so every answer is affordable in real USD.

    Ties go to fewer machines, then lower spend. The table is read-only
    after construction.
    """

    def __init__(self, ms, c, e, max_capital, granularity=DEFAULT_GRANULARITY):
        _check_capital(max_capital)
        if not granularity > 0:
            raise ParameterError("granularity must be positive, got {0!r}".format(granularity))

        self.coin = c
        self.econ = e
        self.granularity = granularity
        self.max_capital = max_capital

        self.items = profitable_machines(list(ms), c, e)
        self.values = [e.duration * income_rate(m, c, e).usd_per_hour for m in self.items]
        self.weights = [price_units(m.price, granularity) for m in self.items]
        self.capacity = capacity_units(max_capital, granularity)

        self._build()

        logger.info("Built knapsack table: %s", {
            'coin': c.coin,
            'items': len(self.items),
            'capacity_units': self.capacity,
            'granularity': granularity,
        })

    def _build(self):
        order = sorted(range(len(self.items)), key=lambda i: self.weights[i])
        prices = [m.price for m in self.items]

        value = [0.0] * (self.capacity + 1)
        count = [0] * (self.capacity + 1)
        spent = [0.0] * (self.capacity + 1)
        choice = [-1] * (self.capacity + 1)
        anchor = [0] * (self.capacity + 1)

        for u in range(1, self.capacity + 1):
            best = (value[u - 1], -count[u - 1], -spent[u - 1])
            pick = -1
            for i in order:
                w = self.weights[i]
                if w > u:
                    break
                p = u - w
                candidate = (value[p] + self.values[i], -(count[p] + 1), -(spent[p] + prices[i]))
                if candidate > best:
                    best, pick = candidate, i

            value[u], count[u], spent[u] = best[0], -best[1], -best[2]
            if pick == -1:
                anchor[u] = anchor[u - 1]
            else:
                choice[u] = pick
                anchor[u] = u

        self._choice = choice
        self._anchor = anchor

    def allocate(self, capital):
        _check_capital(capital)
        u = capacity_units(capital, self.granularity)
        if u > self.capacity:
            raise ParameterError(
                "capital {0!r} exceeds the table's maximum {1!r}".format(capital, self.max_capital)
            )

        counts = {}
        u = self._anchor[u]
        while u > 0:
            i = self._choice[u]
            m = self.items[i]
            counts[m] = counts.get(m, 0) + 1
            u = self._anchor[u - self.weights[i]]

        return _allocation(capital, counts, self.coin, self.econ)

    def roi(self, capital):
        if capital <= 0:
            raise ParameterError("capital must be positive, got {0!r}".format(capital))
        return self.allocate(capital).roi


def knapsack_allocate(capital, ms, c, e, granularity=DEFAULT_GRANULARITY):
    _check_capital(capital)
    if not ms:
        return Allocation(capital=capital)
    return KnapsackTable(ms, c, e, capital, granularity).allocate(capital)


def optimal_roi(capital, ms, c, e, granularity=DEFAULT_GRANULARITY):
    if not isinstance(capital, (int, float)) or not capital > 0:
        raise ParameterError("capital must be positive, got {0!r}".format(capital))
    return knapsack_allocate(capital, ms, c, e, granularity).roi


def brute_force_allocate(capital, ms, c, e):
    """
    Exhaustive oracle for knapsack_allocate. Every count vector within
    budget is scored; ties go to lower spend, then lexicographically
    smaller counts.
    """
    _check_capital(capital)
    ms = list(ms)

    bounds = [math.floor(capital / m.price) for m in ms]
    vectors = 1
    for b in bounds:
        vectors *= b + 1
    if vectors > ORACLE_MAX_VECTORS:
        raise InstanceTooLargeError(
            "instance too large for oracle: {0} count vectors (limit {1})".format(
                vectors, ORACLE_MAX_VECTORS
            )
        )

    values = [e.duration * income_rate(m, c, e).usd_per_hour for m in ms]
    prices = [m.price for m in ms]

    best_counts = (0,) * len(ms)
    best_proceeds, best_spent = 0.0, 0.0
    for counts in itertools.product(*[range(b + 1) for b in bounds]):
        spent = sum(n * p for n, p in zip(counts, prices))
        if spent > capital:
            continue
        proceeds = sum(n * v for n, v in zip(counts, values))
        if proceeds > best_proceeds or (proceeds == best_proceeds and spent < best_spent):
            best_counts, best_proceeds, best_spent = counts, proceeds, spent

    logger.debug("Oracle enumerated %d count vectors at capital %s", vectors, capital)
    return _allocation(capital, dict(zip(ms, best_counts)), c, e)


@dataclass(frozen=True)
class Schedule:
    capital: float
    steps: int
    step_hours: float
    holdings: dict
    objective: float
    purchase_cost: float = 0.0
    revenue: float = 0.0
    electricity: float = 0.0
    leftover: float = 0.0

    def holding(self, m, t):
        return self.holdings[m][t]

    def to_dict(self):
        return {
            'capital': self.capital,
            'steps': self.steps,
            'step_hours': self.step_hours,
            'objective': self.objective,
            'purchase_cost': self.purchase_cost,
            'revenue': self.revenue,
            'electricity': self.electricity,
            'leftover': self.leftover,
            'holdings': {m.name: list(h) for m, h in self.holdings.items()},
        }


class ScheduleProblem(pybnb.Problem):
    """
    Per-step purchase vectors as a pybnb maximization.

    A node holds the state after step t - 1: holdings x, cumulative purchase
    cost C, gross revenue R, electricity E and the purchases so far.
    Feasibility at every step is C - (R - E) <= capital, and no machine
    type is ever held more than max_units times. A node's objective is the
    value of buying nothing more and running what it holds to the end.
    """

    def __init__(self, capital, prices, revenues, electricity, steps, max_units):
        self.capital = capital
        self.prices = prices
        self.revenues = revenues
        self.electricity = electricity
        self.nets = [r - el for r, el in zip(revenues, electricity)]
        self.unit_costs = [p - n for p, n in zip(prices, self.nets)]
        self.steps = steps
        self.max_units = max_units
        self.tolerance = _EPS * max(1.0, capital)

        self._state = (1, (0,) * len(prices), 0.0, 0.0, 0.0, ())

    def sense(self):
        return pybnb.maximize

    def _run_out(self, t, x, R, E):
        remaining = self.steps - t + 1
        R_idle = R + remaining * sum(n * r for n, r in zip(x, self.revenues))
        E_idle = E + remaining * sum(n * el for n, el in zip(x, self.electricity))
        return R_idle, E_idle

    def objective(self):
        t, x, C, R, E, _ = self._state
        R_idle, E_idle = self._run_out(t, x, R, E)
        return max(0.0, self.capital - C - E_idle) + R_idle

    def bound(self):
        t, x, C, R, E, _ = self._state
        remaining = self.steps - t + 1
        R_idle, E_idle = self._run_out(t, x, R, E)
        idle = max(0.0, self.capital - C - E_idle) + R_idle

        # leftover never grows and no type exceeds max_units
        capped = max(0.0, self.capital - C - E) + R + remaining * self.max_units * sum(self.revenues)

        slack = max(0.0, self.capital - C + R_idle - E_idle)
        ratio = 0.0
        for p, r, n in zip(self.prices, self.revenues, self.nets):
            net_cost = p - remaining * n
            if net_cost <= 0:
                return capped
            ratio = max(ratio, remaining * r / net_cost)
        return max(idle, min(capped, idle + slack * ratio))

    def save_state(self, node):
        node.state = self._state

    def load_state(self, node):
        self._state = node.state

    def _purchases(self, budget, x, i=0):
        if i == len(self.prices):
            yield ()
            return
        most = self.max_units - x[i]
        if self.unit_costs[i] > 0:
            most = min(most, math.floor((budget + self.tolerance) / self.unit_costs[i]))
        for n in range(max(0, most), -1, -1):
            for rest in self._purchases(budget - n * self.unit_costs[i], x, i + 1):
                yield (n,) + rest

    def branch(self):
        t, x, C, R, E, path = self._state
        if t > self.steps:
            return

        slack = self.capital - C + (R - E) + sum(n * net for n, net in zip(x, self.nets))
        for delta in self._purchases(slack, x):
            held = tuple(a + b for a, b in zip(x, delta))
            child = pybnb.Node()
            child.state = (
                t + 1,
                held,
                C + sum(d * p for d, p in zip(delta, self.prices)),
                R + sum(n * r for n, r in zip(held, self.revenues)),
                E + sum(n * el for n, el in zip(held, self.electricity)),
                path + (delta,),
            )
            yield child


def ip_schedule(capital, ms, c, e, steps, max_nodes=IP_MAX_NODES):
    """
    Exact purchase schedule allowing mid-period reinvestment. The duration
    is split into `steps` equal intervals; index 0 is the all-zero state
    before any purchase. Maximizes max(0, leftover) + gross revenue, where
    leftover is capital minus purchases minus electricity. Each machine
    type is held at most floor(capital / cheapest price) times.
    """
    _check_capital(capital)
    ms = list(ms)

    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise ParameterError("steps must be a positive integer, got {0!r}".format(steps))
    if steps > IP_MAX_STEPS:
        raise InstanceTooLargeError(
            "{0} steps exceeds the schedule limit of {1}".format(steps, IP_MAX_STEPS)
        )
    if len(ms) > IP_MAX_MACHINE_TYPES:
        raise InstanceTooLargeError(
            "{0} machine types exceeds the schedule limit of {1}; pick at most {1}".format(
                len(ms), IP_MAX_MACHINE_TYPES
            )
        )
    units = math.floor(capital / min(m.price for m in ms)) if ms else 0
    if units > IP_MAX_UNITS:
        raise InstanceTooLargeError(
            "capital buys up to {0} units of the cheapest machine; the schedule limit is {1}".format(
                units, IP_MAX_UNITS
            )
        )

    step_hours = e.duration / steps
    items = profitable_machines(ms, c, e)
    revenues = [revenue_per_hour(m, c) * step_hours for m in items]
    electricity = [electricity_per_hour(m, e) * step_hours for m in items]

    problem = ScheduleProblem(
        capital,
        [m.price for m in items],
        revenues,
        electricity,
        steps,
        units,
    )
    results = pybnb.Solver(comm=None).solve(
        problem,
        absolute_gap=problem.tolerance,
        node_limit=max_nodes,
        queue_strategy='depth',
        log=None,
    )
    logger.info("Schedule search finished: %s", {
        'capital': capital,
        'steps': steps,
        'machine_types': len(items),
        'max_units': units,
        'nodes': results.nodes,
        'termination': results.termination_condition,
    })

    if results.termination_condition == pybnb.TerminationCondition.node_limit:
        raise InstanceTooLargeError(
            "schedule search exceeded {0} nodes; limits: at most {1} machine types, "
            "{2} steps, {3} affordable units per type".format(
                max_nodes, IP_MAX_MACHINE_TYPES, IP_MAX_STEPS, IP_MAX_UNITS
            )
        )

    path = list(results.best_node.state[5]) if results.best_node is not None else []
    path += [(0,) * len(items)] * (steps - len(path))

    holdings = {m: [0] * (steps + 1) for m in ms}
    held = [0] * len(items)
    purchase_cost = revenue = spent_on_power = 0.0
    for t, delta in enumerate(path, start=1):
        for i, d in enumerate(delta):
            held[i] += d
            purchase_cost += d * items[i].price
            revenue += held[i] * revenues[i]
            spent_on_power += held[i] * electricity[i]
            holdings[items[i]][t] = held[i]

    leftover = max(0.0, capital - purchase_cost - spent_on_power)
    return Schedule(
        capital=capital,
        steps=steps,
        step_hours=step_hours,
        holdings={m: tuple(h) for m, h in holdings.items()},
        objective=leftover + revenue,
        purchase_cost=purchase_cost,
        revenue=revenue,
        electricity=spent_on_power,
        leftover=leftover,
    )

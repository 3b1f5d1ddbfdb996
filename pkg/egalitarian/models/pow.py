import dataclasses
import logging

from .. import ParameterError, filter_by_coin
from ..allocator import DEFAULT_GRANULARITY, KnapsackTable
from ..metric import egalitarian_curve

logger = logging.getLogger(__name__)


class Pow:
    """Proof-of-work: upfront purchase of the knapsack-optimal machine mix."""

    name = 'pow'
    sweep_axes = (
        'electricity_cost',
        'duration',
        'token_price',
        'total_hash_rate',
        'block_reward',
    )

    def __init__(self, machines, coin, econ, granularity=DEFAULT_GRANULARITY, digest=None):
        if not granularity > 0:
            raise ParameterError("granularity must be positive, got {0!r}".format(granularity))
        self.machines = list(machines)
        self.coin = coin
        self.econ = econ
        self.granularity = granularity
        self.digest = digest

    @classmethod
    def from_config(cls, config, catalog):
        if config.coin is None:
            raise ParameterError("--model pow needs --coin")
        return cls(
            filter_by_coin(catalog, config.coin),
            catalog.coin(config.coin),
            config.econ(),
            granularity=config.granularity,
            digest=catalog.digest,
        )

    def replace(self, axis, value):
        if axis not in self.sweep_axes:
            raise ParameterError("cannot vary '{0}' for model {1}".format(axis, self.name))
        econ, coin = self.econ, self.coin
        if axis in ('electricity_cost', 'duration'):
            econ = dataclasses.replace(econ, **{axis: value})
        else:
            coin = dataclasses.replace(coin, **{axis: value})
        return Pow(self.machines, coin, econ, self.granularity, self.digest)

    def evaluator(self, max_capital):
        return KnapsackTable(
            self.machines, self.coin, self.econ, max_capital, self.granularity
        ).roi

    def curve(self, grid, workers=1):
        return egalitarian_curve(
            self.evaluator(grid.max_capital), grid, self.metadata(grid), workers
        )

    def metadata(self, grid=None):
        metadata = {
            'model': self.name,
            'coin': dataclasses.asdict(self.coin),
            'econ': dataclasses.asdict(self.econ),
            'granularity': self.granularity,
            'machines': len(self.machines),
            'dataset_sha256': self.digest,
        }
        if grid is not None:
            metadata['grid'] = grid.to_dict()
        return metadata

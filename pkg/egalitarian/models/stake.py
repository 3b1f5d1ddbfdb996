import dataclasses
import functools
import logging

from .. import ParameterError
from ..metric import egalitarian_curve
from ..staking import pure_stake_roi, ticket_stake_roi

logger = logging.getLogger(__name__)


class PurePos:
    """Pure proof-of-stake: everything but the participation fee is staked."""

    name = 'pure-pos'
    roi_function = staticmethod(pure_stake_roi)
    # sweep axis -> StakeParams field
    axis_fields = {
        'rate': 'annual_return_rate',
        'fee': 'participation_fee',
    }
    sweep_axes = tuple(axis_fields)

    def __init__(self, params):
        self.params = params

    @classmethod
    def from_config(cls, config, catalog=None):
        if config.coin is not None:
            raise ParameterError("--coin applies only to --model pow")
        return cls(config.stake_params())

    def replace(self, axis, value):
        if axis not in self.axis_fields:
            raise ParameterError("cannot vary '{0}' for model {1}".format(axis, self.name))
        return type(self)(dataclasses.replace(self.params, **{self.axis_fields[axis]: value}))

    def evaluator(self, max_capital=None):
        return functools.partial(self.roi_function, p=self.params)

    def curve(self, grid, workers=1):
        return egalitarian_curve(self.evaluator(), grid, self.metadata(grid), workers)

    def metadata(self, grid=None):
        metadata = {
            'model': self.name,
            'stake': {
                axis: getattr(self.params, name) for axis, name in self.axis_fields.items()
            },
        }
        if grid is not None:
            metadata['grid'] = grid.to_dict()
        return metadata


class TicketPos(PurePos):
    """Ticket staking: capital stakes only in whole tickets; the fee is not charged."""

    name = 'ticket-pos'
    roi_function = staticmethod(ticket_stake_roi)
    axis_fields = {
        'rate': 'annual_return_rate',
        'ticket_price': 'ticket_price',
    }
    sweep_axes = tuple(axis_fields)

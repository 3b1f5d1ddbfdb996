from .pow import Pow
from .stake import PurePos, TicketPos

from .. import ParameterError

MODELS = {
    Pow.name: Pow,
    PurePos.name: PurePos,
    TicketPos.name: TicketPos,
}


def build_model(config, catalog=None):
    if config.model not in MODELS:
        raise ParameterError(
            "unknown model '{0}', choose from: {1}".format(config.model, ", ".join(MODELS))
        )
    return MODELS[config.model].from_config(config, catalog)

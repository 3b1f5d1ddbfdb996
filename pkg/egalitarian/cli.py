import argparse
import contextlib
import csv
import dataclasses
import json
import logging
import logging.handlers
import os
import sys
import traceback

from . import EgalitarianError, ParameterError, filter_by_coin, load_catalog
from .allocator import IP_MAX_MACHINE_TYPES, IP_MAX_STEPS, ip_schedule, knapsack_allocate
from .config import FORMATS, RunConfig, load_config_file
from .metric import egalitarianism, parameter_sweep, write_json
from .models import MODELS, Pow, build_model

DEFAULT_IP_STEPS = 12

METADATA_SUFFIX = ".meta.json"


def _sweep_axes():
    axes = set()
    for model in MODELS.values():
        axes.update(model.sweep_axes)
    return sorted(axes)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)

    early = early_parser().parse_known_args(argv)[0]
    configure_logging(early.log_mode, early.log_level)
    logger = logging.getLogger()

    try:
        file_values = load_config_file(early.config) if early.config else {}
    except (EgalitarianError, OSError) as e:
        logger.error("Could not read config file %s: %s", early.config, e)
        return 1

    args = parse_arguments(argv, file_values)
    logger.info('Starting %s', args.command)

    try:
        return args.handler(args) or 0

    except (EgalitarianError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return 1

    except Exception as e:
        logger.critical(
            "%s encountered an unrecoverable error: %s, traceback: %s",
            args.command, e, traceback.format_tb(e.__traceback__)
        )
        return 1


def early_parser():
    parser = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    add_logging_arguments(parser)
    return parser


def add_logging_arguments(parser):
    parser.add_argument(
        '--log-level',
        required=False,
        type=str,
        choices=['CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG'],
        default='WARNING',
        help="Log level (default: WARNING)",
    )

    parser.add_argument(
        '--log-mode',
        required=False,
        type=str,
        choices=['console', 'syslog'],
        help="Where diagnostics go (default: console, on stderr)",
    )

    parser.add_argument(
        '--config',
        required=False,
        type=str,
        help="INI file with an [egalitarian] section; flags override it",
    )


def parse_arguments(argv=None, file_values=None):
    common = argparse.ArgumentParser(add_help=False)
    add_logging_arguments(common)

    dataset = argparse.ArgumentParser(add_help=False)
    dataset.add_argument(
        '--dataset-machines',
        dest='machines_path',
        type=str,
        help="Machines CSV (default: the shipped catalog)",
    )
    dataset.add_argument(
        '--dataset-coins',
        dest='coins_path',
        type=str,
        help="Coins CSV (default: the shipped catalog)",
    )

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument(
        '--model',
        type=str,
        choices=sorted(MODELS),
        help="Consensus model (default: pow)",
    )
    model.add_argument('--coin', type=str, help="Coin to mine, for --model pow")
    model.add_argument(
        '--electricity-cost',
        type=float,
        help="USD per kWh (default: 0.08)",
    )
    model.add_argument(
        '--duration-hours',
        type=float,
        help="Investment period in hours (default: 8760)",
    )
    model.add_argument(
        '--granularity',
        type=float,
        help="Capital quantum of the knapsack table in USD (default: 1)",
    )
    model.add_argument('--fee', type=float, help="Pure PoS participation fee in USD (default: 0.01)")
    model.add_argument('--rate', type=float, help="Staking return per period (default: 0.05)")
    model.add_argument('--ticket-price', type=float, help="Ticket price in USD (default: 1756)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument('--min-capital', type=float, help="Smallest capital in USD (default: 100)")
    grid.add_argument('--max-capital', type=float, help="Largest capital in USD (default: 10000)")
    grid.add_argument('--step', type=float, help="Capital step in USD (default: 10)")
    grid.add_argument(
        '--workers',
        type=int,
        help="Worker processes evaluating grid points (default: 1)",
    )

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument('--format', type=str, choices=FORMATS, help="Output format (default: csv)")
    output.add_argument('--out', type=str, help="Output path (default: standard output)")

    parser = argparse.ArgumentParser(
        prog='egalitarian',
        description='Egalitarianism of cryptocurrency consensus mechanisms',
    )
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True
    subparsers = []

    catalog = commands.add_parser('catalog', help="Dataset operations")
    catalog_commands = catalog.add_subparsers(dest='catalog_command', metavar='ACTION')
    catalog_commands.required = True
    validate = catalog_commands.add_parser(
        'validate',
        parents=[common, dataset],
        help="Parse the machine and coin datasets and report counts",
    )
    validate.set_defaults(handler=cmd_catalog_validate, command='catalog validate')
    subparsers.append(validate)

    curve = commands.add_parser(
        'curve',
        parents=[common, dataset, model, grid, output],
        help="Sample the egalitarian curve",
    )
    curve.set_defaults(handler=cmd_curve)
    subparsers.append(curve)

    egal = commands.add_parser(
        'egal',
        parents=[common, dataset, model, grid, output],
        help="Compute the egalitarianism score",
    )
    egal.set_defaults(handler=cmd_egal)
    subparsers.append(egal)

    sweep = commands.add_parser(
        'sweep',
        parents=[common, dataset, model, grid, output],
        help="One curve per value of a parameter",
    )
    sweep.add_argument('--axis', required=True, type=str, choices=_sweep_axes(), help="Parameter to vary")
    sweep.add_argument('--values', required=True, nargs='+', type=float, help="Values of the parameter")
    sweep.add_argument(
        '--long-format',
        action='store_true',
        help="Write all curves into one CSV with a swept_value column",
    )
    sweep.set_defaults(handler=cmd_sweep)
    subparsers.append(sweep)

    ip_opt = commands.add_parser(
        'ip-opt',
        parents=[common, dataset, model, output],
        help="Exact reinvestment-aware purchase schedule for a small instance",
    )
    ip_opt.add_argument('--capital', required=True, type=float, help="Initial capital in USD")
    ip_opt.add_argument(
        '--steps',
        type=int,
        default=DEFAULT_IP_STEPS,
        help="Equal time steps the period is split into (default: {0}, at most {1})".format(
            DEFAULT_IP_STEPS, IP_MAX_STEPS
        ),
    )
    ip_opt.add_argument(
        '--machines',
        nargs='+',
        type=str,
        help="Names of at most {0} machine types of --coin (default: all of them)".format(
            IP_MAX_MACHINE_TYPES
        ),
    )
    ip_opt.set_defaults(handler=cmd_ip_opt)
    subparsers.append(ip_opt)

    for subparser in subparsers:
        subparser.set_defaults(**(file_values or {}))

    return parser.parse_args(argv)


def configure_logging(mode, level_name):
    level = {
        'CRITICAL': logging.CRITICAL,
        'ERROR': logging.ERROR,
        'WARNING': logging.WARNING,
        'INFO': logging.INFO,
        'DEBUG': logging.DEBUG
    }.get(level_name, logging.WARNING)

    def log_config_console():
        logging.basicConfig(
            format='%(asctime)s | %(levelname)s | %(threadName)s | %(name)s %(funcName)s | %(message)s',
            level=level,
            stream=sys.stderr,
            force=True,
        )
        return

    def log_config_syslog():
        logger = logging.getLogger()
        logger.setLevel(level)
        handler = logging.handlers.SysLogHandler(address='/dev/log')
        formatter = logging.Formatter('egalitarian: %(levelname)s: [%(threadName)s] [%(funcName)s] %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        return

    if mode == 'syslog':
        return log_config_syslog()

    return log_config_console()


def run_config(args):
    values = {}
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            values[f.name] = value
    return RunConfig(**values)


@contextlib.contextmanager
def open_output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            yield f


def write_metadata(metadata, out):
    """CSV bodies hold only data; their metadata goes to <out>.meta.json, or to stderr."""
    if out is None:
        sys.stderr.write("metadata: {0}\n".format(json.dumps(metadata, sort_keys=True)))
        return
    with open_output(out + METADATA_SUFFIX) as stream:
        write_json(metadata, stream)


def _model_for(config):
    catalog = None
    if config.model == 'pow':
        catalog = load_catalog(config.machines_path, config.coins_path)
    return build_model(config, catalog)


def cmd_catalog_validate(args):
    catalog = load_catalog(args.machines_path, args.coins_path)

    print("machines: {0}".format(len(catalog.machines)))
    print("coins: {0}".format(len(catalog.coins)))
    for coin in catalog.coins:
        print("{0}: {1} machines".format(coin, len(filter_by_coin(catalog, coin))))
    print("sha256: {0}".format(catalog.digest))


def cmd_curve(args):
    config = run_config(args)
    model = _model_for(config)

    curve = model.curve(config.grid(), workers=config.workers)
    curve = curve.with_metadata(command=config.command('curve'))

    with open_output(config.out) as stream:
        if config.format == 'json':
            write_json(curve.to_dict(), stream)
        else:
            curve.write_csv(stream)
            write_metadata(curve.metadata, config.out)


def cmd_egal(args):
    config = run_config(args)
    model = _model_for(config)

    curve = model.curve(config.grid(), workers=config.workers)
    score = egalitarianism(curve)

    with open_output(config.out) as stream:
        if config.format == 'json':
            document = score.to_dict()
            document['metadata'] = dict(curve.metadata, command=config.command('egal'))
            write_json(document, stream)
        else:
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(['egalitarianism', 'mean_roi', 'n'])
            writer.writerow([repr(score.value), repr(score.mean_roi), score.sample_count])
            write_metadata(dict(curve.metadata, command=config.command('egal')), config.out)


def _per_value_path(out, axis, value):
    stem, ext = os.path.splitext(out)
    return "{0}_{1}-{2}{3}".format(stem, axis, repr(value), ext)


def cmd_sweep(args):
    config = run_config(args)
    model = _model_for(config)

    if not args.long_format and config.out is None and config.format == 'csv':
        raise ParameterError(
            "a csv sweep without --long-format writes one file per value; give --out"
        )

    command = config.command('sweep', [
        ('--axis', args.axis),
        ('--values', args.values),
        ('--long-format', args.long_format),
    ])
    curves = [
        curve.with_metadata(command=command)
        for curve in parameter_sweep(model, args.axis, args.values, config.grid(), config.workers)
    ]

    if args.long_format or config.out is None:
        with open_output(config.out) as stream:
            if config.format == 'json':
                write_json({
                    'swept_axis': args.axis,
                    'command': command,
                    'curves': [curve.to_dict() for curve in curves],
                }, stream)
            else:
                writer = csv.writer(stream, lineterminator='\n')
                writer.writerow(['swept_value', 'capital_usd', 'roi'])
                for curve in curves:
                    curve.write_csv_rows(writer, [('swept_value', repr(curve.metadata['swept_value']))])
                write_metadata({
                    'swept_axis': args.axis,
                    'command': command,
                    'curves': [curve.metadata for curve in curves],
                }, config.out)
        return

    logger = logging.getLogger()
    for curve in curves:
        path = _per_value_path(config.out, args.axis, curve.metadata['swept_value'])
        with open_output(path) as stream:
            if config.format == 'json':
                write_json(curve.to_dict(), stream)
            else:
                curve.write_csv(stream)
                write_metadata(curve.metadata, path)
        logger.info("Wrote %s", path)


def cmd_ip_opt(args):
    config = run_config(args)
    if config.model != 'pow':
        raise ParameterError("ip-opt schedules mining hardware; use --model pow with --coin")

    catalog = load_catalog(config.machines_path, config.coins_path)
    model = Pow.from_config(config, catalog)
    machines = catalog.find(config.coin, args.machines) if args.machines else model.machines

    schedule = ip_schedule(args.capital, machines, model.coin, model.econ, args.steps)
    allocation = knapsack_allocate(
        args.capital, machines, model.coin, model.econ, model.granularity
    )

    document = {
        'objective': schedule.objective,
        'knapsack_proceeds': allocation.proceeds,
        'schedule': schedule.to_dict(),
        'knapsack': allocation.to_dict(),
        'metadata': dict(
            model.metadata(),
            command=config.command('ip-opt', [
                ('--capital', args.capital),
                ('--steps', args.steps),
                ('--machines', args.machines),
            ]),
        ),
    }

    with open_output(config.out) as stream:
        write_json(document, stream)

    if config.out is not None:
        print("objective: {0!r}".format(schedule.objective))
        print("knapsack_proceeds: {0!r}".format(allocation.proceeds))

# coding: utf-8

"""
Command-line entry point: ``lqg-feedback <command> [flags]``.

Each ``cmd_*`` function takes a resolved :class:`ExperimentConfig` and returns
a :class:`ResultTable` plus a summary mapping; :func:`main` writes both and
maps failures to exit codes (2 configuration, 3 numerical, 4 I/O).
"""

import argparse
import logging
import math
import os
import sys

from .analysis import (
    duality_check, mac_sum_rate, prelog_achieved, sum_rate_point, sweep,
)
from .codes import chebyshev_bound, grid_build, lqg_form_coefficient, ol_optimal_b
from .config import resolve
from .errors import ConfigError, NumericalError
from .settings import COMMANDS
from .simulator import TrialConfig, compare_ol, predicted_mse_series, run_ensemble
from .solver import dare_residual, solve
from .writer import UNITS, ResultTable, write_summary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _matrix_rows(table, name, matrix):
    for (row, col), value in _entries(matrix):
        table.add_row(name, row, col, float(value.real), float(value.imag))


def _entries(matrix):
    rows, cols = matrix.shape
    for row in range(rows):
        for col in range(cols):
            yield (row, col), complex(matrix[row, col])


def cmd_solve(config):
    spec = config.system_spec()
    solution = solve(spec)
    table = ResultTable(['quantity', 'row', 'col', 'real', 'imag'])
    _matrix_rows(table, 'G', solution.G)
    _matrix_rows(table, 'C', solution.C.reshape(1, -1))
    _matrix_rows(table, 'K_s', solution.K_s)
    table.add_row('power', 0, 0, solution.power, 0.0)
    table.add_row('spectral_radius', 0, 0, solution.spectral_radius, 0.0)
    table.add_row('stability_margin', 0, 0, solution.stability_margin, 0.0)
    summary = {
        'power': solution.power,
        'spectral_radius': solution.spectral_radius,
        'dare_residual': dare_residual(solution.G, spec.A, spec.B),
    }
    return table, summary


SIMULATE_COLUMNS = [
    'receiver', 'mode_real', 'mode_imag', 'rate', 'mse', 'mse_stderr', 'predicted_mse',
    'exponent', 'exponent_stderr', 'exponent_fit', 'avg_power', 'avg_power_stderr',
    'predicted_power', 'grid_error_rate', 'chebyshev_bound',
]


def cmd_simulate(config):
    spec = config.system_spec()
    solution = solve(spec)
    grids = None
    if config.grid_fraction is not None:
        grids = tuple(grid_build(config.grid_fraction * math.log(abs(mode)), config.n)
                      for mode in spec.modes)
    trial_config = TrialConfig(
        spec=spec, solution=solution, n=config.n, grids=grids, center=config.center)
    result = run_ensemble(trial_config, config.trials, config.seed, config.jobs)
    predicted = predicted_mse_series(spec, solution, config.n, config.center)[-1]

    table = ResultTable(SIMULATE_COLUMNS)
    for j, mode in enumerate(spec.modes):
        grid_error_rate = bound = None
        if grids is not None:
            grid_error_rate = float(result.grid_error_rate[j])
            bound = chebyshev_bound(grids[j].rate, config.n, float(result.mse_mean[j]))
        table.add_row(
            j + 1, mode.real, mode.imag, math.log(abs(mode)),
            float(result.mse_mean[j]), float(result.mse_stderr[j]), float(predicted[j]),
            float(result.exponent_mean[j]), float(result.exponent_stderr[j]),
            float(result.exponent_fit[j]),
            result.avg_power_mean, result.avg_power_stderr, solution.power,
            grid_error_rate, bound)
    summary = {
        'trials': result.trials,
        'base_seed': result.base_seed,
        'streams': [0, result.trials - 1],
        'identity_gap': result.identity_gap,
        'predicted_power': solution.power,
    }
    return table, summary


def cmd_phi(config):
    point = sum_rate_point(config.k, config.power)
    table = ResultTable(['k', 'power', 'phi', 'rate', 'mac_rate', 'duality_residual'])
    table.add_row(point.k, point.power, point.phi, point.rate,
                  mac_sum_rate(config.k, config.power / config.k),
                  duality_check(config.k, config.power))
    return table, {'relative_residual': point.relative_residual}


def cmd_sweep(config):
    table = ResultTable(['power', 'phi', 'rate', 'rate_no_feedback', 'gain'])
    points = sweep(config.k, config.powers)
    for point in points:
        table.add_row(point.power, point.phi, point.rate, point.rate_no_feedback, point.gain)
    return table, {'points': len(points),
                   'max_relative_residual': max(point.relative_residual for point in points)}


def cmd_prelog(config):
    experiment = prelog_achieved(config.k, config.rank, config.a_grid)
    table = ResultTable(
        ['a', 'rate', 'power', 'solver_power', 'ratio', 'upper_bound_ratio', 'limit'])
    for a, rate, power, solver_power, ratio, bound in experiment.rows():
        table.add_row(a, rate, power, solver_power, ratio, bound, experiment.limit)
    return table, {'k': experiment.k, 'rank': experiment.r, 'limit': experiment.limit}


def cmd_compare_ol(config):
    a = config.a
    comparison = compare_ol(a, config.n, config.trials, config.seed, config.jobs)
    b = ol_optimal_b(a)
    table = ResultTable(['code', 'avg_power', 'avg_power_stderr', 'predicted_power',
                         'coefficient', 'separation_sigma'])
    table.add_row('lqg', comparison.lqg_power, comparison.lqg_stderr, comparison.lqg_predicted,
                  lqg_form_coefficient(a, b), comparison.separation_sigma)
    table.add_row('ol', comparison.ol_power, comparison.ol_stderr, comparison.ol_predicted,
                  b / a, comparison.separation_sigma)
    summary = {
        'trials': comparison.trials,
        'power_difference': comparison.difference,
        'power_difference_stderr': comparison.difference_stderr,
    }
    return table, summary


COMMAND_HANDLERS = {
    'solve': cmd_solve,
    'simulate': cmd_simulate,
    'phi': cmd_phi,
    'sweep': cmd_sweep,
    'prelog': cmd_prelog,
    'compare-ol': cmd_compare_ol,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='FILE', help='flat YAML experiment file')
    common.add_argument('--k', help='number of receivers')
    common.add_argument('--a', help='mode modulus of the symmetric configuration')
    common.add_argument('--modes', help='comma-separated complex modes, e.g. 1.2+0.5j,-1.2')
    common.add_argument('--cov', help='identity | rho=<r> | rank1 | rank=<r> | file=<path>')
    common.add_argument('--n', help='horizon (channel uses)')
    common.add_argument('--trials', help='Monte Carlo trials')
    common.add_argument('--seed', help='base seed')
    common.add_argument('--jobs', help='worker processes')
    common.add_argument('--units', choices=UNITS, help='rate units')
    common.add_argument('--out', metavar='FILE', help='CSV output path (default: stdout)')
    common.add_argument('--power', help='power for the phi command')
    common.add_argument('--powers', help='ascending comma-separated powers for sweep')
    common.add_argument('--rank', help='noise covariance rank for prelog')
    common.add_argument('--a-grid', dest='a_grid', help='comma-separated a values for prelog')
    common.add_argument('--grid-fraction', dest='grid_fraction',
                        help='discrete messages at this fraction of log|a_j|')
    common.add_argument('--center', action='store_true', default=None,
                        help='center messages on the unit square')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true')
    verbosity.add_argument('--quiet', '-q', action='store_true')

    parser = argparse.ArgumentParser(
        prog='lqg-feedback',
        description='LQG feedback code for the Gaussian broadcast channel')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    for command in COMMANDS:
        commands.add_parser(command, parents=[common], help='{0} experiment'.format(command))
    return parser


def configure_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


def run(config):
    table, summary = COMMAND_HANDLERS[config.command](config)
    table.to_csv(config.out, units=config.units)
    if config.out is not None:
        summary = dict(summary, command=config.command, units=config.units,
                       config=config.as_dict())
        try:
            write_summary(config.out, summary)
        except BaseException:
            os.remove(config.out)
            raise
    return table


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    flags = {key: value for key, value in vars(args).items()
             if key not in ('config', 'verbose', 'quiet')}
    try:
        config = resolve(flags, args.config)
        logger.info('Resolved configuration:\n%s', config.dump())
        run(config)
    except ConfigError as e:
        logger.error('Invalid configuration: %s', e)
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error('Numerical failure: %s', e)
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error('I/O error: %s', e)
        return EXIT_IO
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())

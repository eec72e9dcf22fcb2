# coding: utf-8

"""
Experiment configuration.

Values resolve in three layers: the defaults in
:data:`lqg_feedback.settings.CONFIG_VALUES`, then a flat YAML experiment
file, then command-line flags. Every field is validated here, before any
solver or simulator runs, and errors name the offending field.
"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
import yaml

from .analysis import rank_one_circulant_cov, rank_r_cov
from .errors import ConfigError
from .settings import COMMANDS, CONFIG_VALUES
from .solver import SystemSpec, symmetric_modes
from .utils import format_complex, parse_float_list
from .writer import UNITS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A fully resolved experiment: every default materialized.
    """

    command: str
    k: int
    a: float
    modes: tuple
    cov: str
    n: int
    trials: int
    seed: int
    jobs: int
    units: str
    out: str
    power: float
    powers: tuple
    rank: int
    a_grid: tuple
    grid_fraction: float
    center: bool

    def as_dict(self):
        values = asdict(self)
        if self.modes is not None:
            values['modes'] = [format_complex(mode) for mode in self.modes]
        values['powers'] = list(self.powers)
        values['a_grid'] = list(self.a_grid)
        return values

    def dump(self):
        return yaml.safe_dump(self.as_dict(), default_flow_style=False)

    def system_modes(self):
        if self.modes is not None:
            return self.modes
        return symmetric_modes(self.k, self.a)

    def noise_covariance(self):
        return parse_covariance(self.cov, len(self.system_modes()))

    def system_spec(self):
        """
        Raises:
            InvalidSystemError: The modes or the covariance break a SystemSpec invariant.
        """
        return SystemSpec(self.system_modes(), self.noise_covariance())


def load_file(path):
    """
    Read a flat YAML experiment file; keys use underscores or dashes.
    """
    with open(path, encoding='utf-8') as handle:
        try:
            data = yaml.safe_load(handle)
        except yaml.YAMLError as e:
            raise ConfigError('config', 'cannot parse {0}: {1}'.format(path, e)) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError('config', '{0} must hold a flat key: value mapping'.format(path))
    return {str(key).replace('-', '_'): value for key, value in data.items()}


def resolve(flags=None, path=None):
    """
    Merge defaults, the experiment file at ``path`` and ``flags`` (None values
    are ignored), then validate.

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: Unknown key or invalid value.
    """
    values = dict(CONFIG_VALUES)
    layers = []
    if path:
        layers.append(load_file(path))
    layers.append({key: value for key, value in (flags or {}).items() if value is not None})
    for layer in layers:
        for key, value in layer.items():
            if key not in CONFIG_VALUES:
                raise ConfigError(key, 'unknown configuration key')
            if isinstance(value, dict):
                raise ConfigError(key, 'nested values are not supported')
            values[key] = value
    return validate(values)


def _integer(values, field, minimum):
    value = values[field]
    if value is None:
        return None
    try:
        number = int(value.strip()) if isinstance(value, str) else int(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(field, 'expected an integer, got {0!r}'.format(value)) from e
    if isinstance(value, bool) or (isinstance(value, float) and value != number):
        raise ConfigError(field, 'expected an integer, got {0!r}'.format(value))
    if number < minimum:
        raise ConfigError(field, 'must be at least {0}'.format(minimum))
    return number


def _number(values, field):
    value = values[field]
    if value is None:
        return None
    try:
        number = float(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(field, 'expected a number, got {0!r}'.format(value)) from e
    if not math.isfinite(number):
        raise ConfigError(field, 'must be finite')
    return number


def _boolean(value, field):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ('true', 'yes', '1'):
        return True
    if str(value).lower() in ('false', 'no', '0'):
        return False
    raise ConfigError(field, 'expected true or false, got {0!r}'.format(value))


def validate(values):
    command = values['command']
    if command not in COMMANDS:
        raise ConfigError('command', 'must be one of {0}'.format(', '.join(COMMANDS)))
    units = values['units']
    if units not in UNITS:
        raise ConfigError('units', 'must be one of {0}'.format(', '.join(UNITS)))

    k = _integer(values, 'k', 1)
    a = _number(values, 'a')
    modes = parse_modes(values['modes']) if values['modes'] not in (None, '') else None
    power = _number(values, 'power')
    if power is not None and power <= 0:
        raise ConfigError('power', 'must be positive')
    grid_fraction = _number(values, 'grid_fraction')
    if grid_fraction is not None and grid_fraction <= 0:
        raise ConfigError('grid_fraction', 'must be positive')
    a_grid = parse_float_list(values['a_grid'], 'a_grid')
    if not a_grid or any(value <= 1 for value in a_grid):
        raise ConfigError('a_grid', 'values must exceed 1')
    powers = parse_float_list(values['powers'], 'powers')
    if not powers or any(value <= 0 for value in powers):
        raise ConfigError('powers', 'values must be positive')
    if any(later <= earlier for earlier, later in zip(powers, powers[1:])):
        raise ConfigError('powers', 'values must be strictly ascending')

    if command in ('solve', 'simulate'):
        if modes is not None:
            if k is not None and k != len(modes):
                raise ConfigError('k', 'k={0} but {1} modes given'.format(k, len(modes)))
            if a is not None:
                raise ConfigError('a', 'give either --a or --modes, not both')
            k = len(modes)
        elif a is None or k is None:
            raise ConfigError('modes', '{0} needs --modes, or --k with --a'.format(command))
    elif command in ('phi', 'sweep', 'prelog') and k is None:
        raise ConfigError('k', '{0} needs --k'.format(command))
    elif command == 'compare-ol':
        if a is None:
            raise ConfigError('a', 'compare-ol needs --a')
        if k not in (None, 2):
            raise ConfigError('k', 'compare-ol runs two receivers')
        k = 2
    if a is not None and a <= 1:
        raise ConfigError('a', 'must exceed 1')

    config = ExperimentConfig(
        command=command,
        k=k,
        a=a,
        modes=modes,
        cov=str(values['cov']),
        n=_integer(values, 'n', 1),
        trials=_integer(values, 'trials', 1),
        seed=_integer(values, 'seed', 0),
        jobs=_integer(values, 'jobs', 1),
        units=units,
        out=values['out'],
        power=power,
        powers=powers,
        rank=_integer(values, 'rank', 1),
        a_grid=a_grid,
        grid_fraction=grid_fraction,
        center=_boolean(values['center'], 'center'),
    )
    if command == 'prelog' and config.rank > config.k:
        raise ConfigError('rank', 'must not exceed k={0}'.format(config.k))
    if command in ('solve', 'simulate'):
        config.system_spec()
    return config


def parse_modes(value):
    """
    Parse ``'1.2+0.5j,-1.2'`` (or a YAML list) into a tuple of complex modes.
    """
    tokens = value if isinstance(value, (list, tuple)) else str(value).split(',')
    modes = []
    for token in tokens:
        text = str(token).strip().replace(' ', '')
        if not text:
            continue
        try:
            modes.append(complex(text))
        except ValueError as e:
            raise ConfigError('modes', 'cannot parse {0!r} as a complex number'.format(text)) from e
    if not modes:
        raise ConfigError('modes', 'no modes given')
    return tuple(modes)


def _split_option(text, name):
    for separator in ('=', ':'):
        prefix = name + separator
        if text.startswith(prefix):
            return text[len(prefix):]
    return None


def equicorrelated_cov(k, rho):
    if k > 1 and not -1.0 / (k - 1) < rho < 1.0:
        raise ConfigError('cov', 'rho must lie in (-1/(k-1), 1) for k={0}'.format(k))
    return (1.0 - rho) * np.eye(k, dtype=complex) + rho * np.ones((k, k), dtype=complex)


def parse_covariance(text, k):
    """
    Build the noise covariance named by ``text`` for ``k`` receivers.

    Accepted forms: ``identity``, ``rho=<r>``, ``rank1``, ``rank=<r>`` and
    ``file=<path>`` (``:`` works in place of ``=``; ``rank-one`` for ``rank1``).
    """
    text = str(text).strip()
    if text == 'identity':
        return np.eye(k, dtype=complex)
    if text in ('rank1', 'rank-one'):
        return rank_one_circulant_cov(k)
    rho = _split_option(text, 'rho')
    if rho is not None:
        try:
            return equicorrelated_cov(k, float(rho))
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError('cov', 'bad correlation {0!r}'.format(rho)) from e
    rank = _split_option(text, 'rank')
    if rank is not None:
        try:
            return rank_r_cov(k, int(rank))
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError('cov', 'bad rank {0!r}'.format(rank)) from e
    path = _split_option(text, 'file')
    if path is not None:
        covariance = read_covariance_file(path)
        if covariance.shape != (k, k):
            raise ConfigError('cov', '{0} holds a {1}x{1} matrix, expected {2}x{2}'.format(
                path, covariance.shape[0], k))
        return covariance
    raise ConfigError('cov', 'unknown covariance {0!r}'.format(text))


def _parse_entry(real, imag, path, line):
    if not imag.endswith('j'):
        raise ConfigError('cov', '{0}:{1}: imaginary part {2!r} lacks a trailing j'.format(
            path, line, imag))
    try:
        return complex(float(real), float(imag[:-1]))
    except ValueError as e:
        raise ConfigError('cov', '{0}:{1}: bad entry {2!r} {3!r}'.format(
            path, line, real, imag)) from e


def read_covariance_file(path):
    """
    Read a covariance file: first line ``k``, then ``k`` lines of ``k`` entries
    written as ``re imj`` pairs.

    Raises:
        ConfigError: The file is malformed.
        OSError: The file cannot be read.
    """
    with open(path, encoding='utf-8') as handle:
        lines = [(number, line.split()) for number, line in enumerate(handle, 1) if line.strip()]
    if not lines:
        raise ConfigError('cov', '{0} is empty'.format(path))
    first_line, header = lines[0]
    if len(header) != 1 or not header[0].isdigit() or int(header[0]) < 1:
        raise ConfigError('cov', '{0}:{1}: first line must be k'.format(path, first_line))
    k = int(header[0])
    rows = lines[1:]
    if len(rows) != k:
        raise ConfigError('cov', '{0}: expected {1} rows, found {2}'.format(path, k, len(rows)))
    matrix = np.empty((k, k), dtype=complex)
    for index, (number, tokens) in enumerate(rows):
        if len(tokens) != 2 * k:
            raise ConfigError('cov', '{0}:{1}: expected {2} tokens, found {3}'.format(
                path, number, 2 * k, len(tokens)))
        for column in range(k):
            matrix[index, column] = _parse_entry(
                tokens[2 * column], tokens[2 * column + 1], path, number)
    return matrix

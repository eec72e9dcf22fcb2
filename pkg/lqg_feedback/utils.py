import math
import os

import numpy as np

from .errors import ConfigError


def ensuredir(path):
    """
    Ensure that a path exists.
    """
    if path:
        os.makedirs(path, exist_ok=True)


def parse_float_list(value, field):
    """
    Parse ``'0.1,1,10'`` (or a YAML list) into a tuple of floats.

    Raises:
        ConfigError: A token is not a number.
    """
    if isinstance(value, (int, float)):
        return (float(value),)
    tokens = value if isinstance(value, (list, tuple)) else str(value).split(',')
    try:
        return tuple(float(str(token).strip()) for token in tokens if str(token).strip())
    except ValueError as e:
        raise ConfigError(field, 'expected comma-separated numbers: {0}'.format(e)) from e


def format_complex(value):
    value = complex(value)
    if value.imag == 0:
        return repr(value.real)
    return repr(value).strip('()')


def to_builtin(value):
    """
    Convert numpy scalars and arrays, tuples and complex numbers into plain
    YAML/JSON-friendly values.
    """
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return to_builtin(value.item())
    if isinstance(value, complex):
        return format_complex(value)
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value

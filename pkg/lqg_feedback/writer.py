# -*- coding: utf-8 -*-
"""
Result tables and their CSV and JSON serialization.

Values are written with 17 significant digits, so identical runs produce
byte-identical files. Files are written to a temporary sibling and renamed
into place.
"""

import csv
import io
import json
import logging
import os
import sys
import tempfile

import numpy as np

from .settings import FLOAT_FORMAT, LN2
from .utils import ensuredir, to_builtin

logger = logging.getLogger(__name__)

#: Columns holding rates in nats; divided by ln 2 under ``units='bits'``.
RATE_COLUMNS = frozenset([
    'rate', 'mac_rate', 'rate_no_feedback', 'exponent', 'exponent_stderr', 'exponent_fit',
    'duality_residual',
])

UNITS = ('nats', 'bits')


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


class ResultTable:
    """
    A header row and rows of equal length, in insertion order.
    """

    def __init__(self, header, rate_columns=RATE_COLUMNS):
        self.header = tuple(header)
        self.rate_columns = frozenset(rate_columns) & frozenset(self.header)
        self.rows = []

    def add_row(self, *values):
        if len(values) != len(self.header):
            raise ValueError('row has {0} values, table has {1} columns'.format(
                len(values), len(self.header)))
        self.rows.append(tuple(values))

    def column(self, name):
        index = self.header.index(name)
        return [row[index] for row in self.rows]

    def converted_rows(self, units='nats'):
        if units not in UNITS:
            raise ValueError('units must be one of {0}'.format(', '.join(UNITS)))
        scaled = [name in self.rate_columns and units == 'bits' for name in self.header]
        for row in self.rows:
            yield tuple(
                value / LN2 if scale and isinstance(value, (float, np.floating)) else value
                for scale, value in zip(scaled, row))

    def render(self, units='nats'):
        stream = io.StringIO()
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(self.header)
        for row in self.converted_rows(units):
            writer.writerow([format_value(value) for value in row])
        return stream.getvalue()

    def to_csv(self, path=None, units='nats'):
        """
        Write the table to ``path``, or to stdout when ``path`` is None.
        """
        text = self.render(units)
        if path is None:
            sys.stdout.write(text)
        else:
            atomic_write(path, text)
            logger.info('Wrote %d rows to %s', len(self.rows), path)


def atomic_write(path, text):
    """
    Write ``text`` to a temporary file next to ``path``, then rename it over ``path``.
    """
    directory = os.path.dirname(os.path.abspath(path))
    ensuredir(directory)
    handle = tempfile.NamedTemporaryFile(
        'w', dir=directory, prefix='.tmp-', delete=False, encoding='utf-8', newline='')
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        if os.path.exists(handle.name):
            os.remove(handle.name)
        raise


def summary_path(path):
    return os.path.splitext(path)[0] + '.json'


def write_summary(path, summary):
    """
    Write the JSON summary object that accompanies the CSV at ``path``.
    """
    text = json.dumps(to_builtin(summary), sort_keys=True, indent=2) + '\n'
    atomic_write(summary_path(path), text)

"""CSV reading and writing with a fixed float format."""

from __future__ import annotations

import csv
import io
import sys
from contextlib import contextmanager

import numpy as np

__all__ = ['format_value', 'write_csv', 'read_curve', 'open_out']


def format_value(v) -> str:
    """Integers verbatim, floats with 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), '.17g')
    return str(v)


@contextmanager
def open_out(path):
    if path in (None, '-'):
        yield sys.stdout
    else:
        with open(path, 'w', newline='') as fh:
            yield fh


def write_csv(path, header, rows) -> None:
    """Write ``rows`` under ``header`` to ``path`` (standard output if ``None``)."""
    with open_out(path) as fh:
        w = csv.writer(fh, lineterminator='\n')
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def read_curve(path):
    """
    Read a two-or-more column CSV.

    Returns
    -------
    header : list of str
    grid : numpy.ndarray
        First column.
    columns : dict
        Every column by name, as float arrays.
    """
    with open(path, newline='') as fh:
        text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f'{path} is empty') from None
    data = [row for row in reader if row]
    if len(header) < 2:
        raise ValueError(f'{path} needs at least two columns')
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[j]) for r in data])
        except (ValueError, IndexError):
            raise ValueError(f'{path}: column {name!r} is not numeric') from None
    return header, cols[header[0]], cols

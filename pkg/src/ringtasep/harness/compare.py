"""Distances between two curves sampled on the same grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GridMismatch
from .csvio import read_curve

__all__ = ['CompareReport', 'compare_curves', 'compare_files']


@dataclass(frozen=True)
class CompareReport:
    """
    Attributes
    ----------
    ks_statistic : float
        ``max |F_a - F_b|`` over the common grid.
    sup_pointwise : float
        Largest distance left over after subtracting the confidence
        half-widths carried by either file (equal to ``ks_statistic`` when
        neither file has ``ci_low``/``ci_high`` columns).
    n_points : int
    threshold : float
    """

    ks_statistic: float
    sup_pointwise: float
    n_points: int
    threshold: float

    @property
    def passed(self) -> bool:
        return self.ks_statistic <= self.threshold

    def row(self):
        return (self.ks_statistic, self.sup_pointwise, self.n_points,
                self.threshold, 'pass' if self.passed else 'fail')


def compare_curves(grid_a, val_a, grid_b, val_b, threshold: float,
                   halfwidth=None) -> CompareReport:
    grid_a = np.asarray(grid_a, dtype=float)
    grid_b = np.asarray(grid_b, dtype=float)
    if grid_a.shape != grid_b.shape or not np.array_equal(grid_a, grid_b):
        raise GridMismatch(
            f'grids differ ({grid_a.size} vs {grid_b.size} points)')
    diff = np.abs(np.asarray(val_a, dtype=float) - np.asarray(val_b, dtype=float))
    ks = float(diff.max()) if diff.size else 0.0
    if halfwidth is None:
        sup = ks
    else:
        sup = float(np.max(np.clip(diff - halfwidth, 0.0, None))) if diff.size else 0.0
    return CompareReport(ks, sup, int(diff.size), float(threshold))


def _halfwidth(cols, values):
    if 'ci_low' in cols and 'ci_high' in cols:
        return np.maximum(values - cols['ci_low'], cols['ci_high'] - values)
    return 0.0


def compare_files(path_a, path_b, threshold: float) -> CompareReport:
    """
    Compare the second columns of two CSV files.

    Raises
    ------
    GridMismatch
        If the first columns are not identical.
    """
    head_a, grid_a, cols_a = read_curve(path_a)
    head_b, grid_b, cols_b = read_curve(path_b)
    va, vb = cols_a[head_a[1]], cols_b[head_b[1]]
    if grid_a.shape != grid_b.shape:
        raise GridMismatch(f'{path_a} has {grid_a.size} rows, {path_b} has {grid_b.size}')
    hw = None
    if 'ci_low' in cols_a or 'ci_low' in cols_b:
        hw = _halfwidth(cols_a, va) + _halfwidth(cols_b, vb)
    return compare_curves(grid_a, va, grid_b, vb, threshold, hw)

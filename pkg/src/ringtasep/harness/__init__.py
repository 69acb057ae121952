"""Command-line harness: CSV output, curve comparison and convergence sweeps."""

from .cli import main
from .compare import CompareReport, compare_curves, compare_files
from .sweep import ScaledCurve, SweepRow, converge_sweep, finite_scaled_cdf

__all__ = ['main', 'CompareReport', 'compare_curves', 'compare_files',
           'ScaledCurve', 'SweepRow', 'converge_sweep', 'finite_scaled_cdf']

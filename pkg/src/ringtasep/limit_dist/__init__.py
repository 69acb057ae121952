"""Limiting crossover distributions of the periodic TASEP on the relaxation scale."""

from .crossover import (DEFAULT_QUAD, DistributionCurve, F1, F2, NodeSet,
                        TruncationSpec, fredholm_det, kernel_flat, kernel_step,
                        nodes, psi_int, psi_int_line, psi_int_path)
from .reference import (GAUSSIAN_SCALE, REFERENCE_KINDS, gaussian_cdf,
                        reference_curve, tracy_widom_goe, tracy_widom_gue)
from .special import (abc_constants, b_constant, b_constant_quad, cerfc,
                      polylog, polylog_integral, polylog_series)

__all__ = [
    'DEFAULT_QUAD', 'DistributionCurve', 'F1', 'F2', 'NodeSet', 'TruncationSpec',
    'fredholm_det', 'kernel_flat', 'kernel_step', 'nodes', 'psi_int',
    'psi_int_line', 'psi_int_path', 'GAUSSIAN_SCALE', 'REFERENCE_KINDS',
    'gaussian_cdf', 'reference_curve', 'tracy_widom_goe', 'tracy_widom_gue',
    'abc_constants', 'b_constant', 'b_constant_quad', 'cerfc', 'polylog',
    'polylog_integral', 'polylog_series',
]

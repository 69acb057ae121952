"""Exact finite-time formulas, the generator oracle and scaling helpers."""

from .configuration import Configuration, flat_configuration, step_configuration
from ..quadrature import ProbabilityResult, QuadratureSpec, contour_average
from .exact import (FREDHOLM_RADII, RADIUS_LADDER, one_point_flat,
                    one_point_general, one_point_step, transition_probability)
from .oracle import generator_oracle

__all__ = [
    'Configuration', 'flat_configuration', 'step_configuration',
    'ProbabilityResult', 'QuadratureSpec', 'contour_average',
    'transition_probability', 'one_point_general', 'one_point_flat',
    'one_point_step', 'generator_oracle', 'FREDHOLM_RADII', 'RADIUS_LADDER',
]
from .scaling import (ScaledPoint, ScalingInputs, current_from_tagged,
                      current_threshold, flat_scaling, fluctuation_scale,
                      step_scaling)

__all__ += ['ScaledPoint', 'ScalingInputs', 'current_from_tagged',
            'current_threshold', 'flat_scaling', 'fluctuation_scale',
            'step_scaling']

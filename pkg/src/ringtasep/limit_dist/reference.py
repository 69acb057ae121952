"""
Reference curves for plots of the crossover distributions.

The conjectured small- and large-``tau`` limits of ``F_1`` and ``F_2`` are
Tracy-Widom and Gaussian laws.  They are only used for emitting comparison
columns, never for pass/fail decisions.

The Tracy-Widom distributions are Fredholm determinants on ``(s, inf)``
discretized by Gauss-Legendre quadrature (a Nystrom discretization).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = ['tracy_widom_gue', 'tracy_widom_goe', 'gaussian_cdf',
           'reference_curve', 'REFERENCE_KINDS', 'GAUSSIAN_SCALE']

REFERENCE_KINDS = ('goe', 'gue', 'gue2', 'gaussian')
# Gaussian regime: F(-tau + GAUSSIAN_SCALE tau^(1/2) x) -> Phi(x)
GAUSSIAN_SCALE = math.pi ** 0.25 / math.sqrt(2.0)
_SPAN = 14.0
_ORDER = 64


def _gauss(s, order=_ORDER, span=_SPAN):
    u, w = np.polynomial.legendre.leggauss(order)
    x = s + 0.5 * span * (u + 1.0)
    return x, 0.5 * span * w


def _airy_kernel(x):
    ai, aip, _, _ = special.airy(x)
    X, Y = np.meshgrid(x, x, indexing='ij')
    num = np.outer(ai, aip) - np.outer(aip, ai)
    with np.errstate(divide='ignore', invalid='ignore'):
        K = num / (X - Y)
    K[np.diag_indices_from(K)] = aip ** 2 - x * ai ** 2
    return K


def tracy_widom_gue(s) -> np.ndarray:
    """``F_GUE(s) = det(I - K_Airy)`` on ``L^2(s, inf)``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty(s.size)
    for i, si in enumerate(s):
        x, w = _gauss(si)
        sw = np.sqrt(w)
        K = sw[:, None] * _airy_kernel(x) * sw[None, :]
        out[i] = np.linalg.det(np.eye(x.size) - K)
    return out


def tracy_widom_goe(s) -> np.ndarray:
    """``F_GOE(s) = det(I - K)`` with ``K(x, y) = Ai((x + y)/2) / 2`` on ``(s, inf)``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty(s.size)
    for i, si in enumerate(s):
        x, w = _gauss(si)
        sw = np.sqrt(w)
        K = 0.5 * special.airy(0.5 * (x[:, None] + x[None, :]))[0]
        out[i] = np.linalg.det(np.eye(x.size) - sw[:, None] * K * sw[None, :])
    return out


def gaussian_cdf(x) -> np.ndarray:
    return special.ndtr(np.asarray(x, dtype=float))


def reference_curve(kind: str, x) -> np.ndarray:
    """
    Reference values on the grid ``x``.

    ``goe`` gives ``F_GOE(2^(2/3) x)``, the small-``tau`` profile of
    ``F_1(tau^(1/3) x; tau)``; ``gue`` and ``gue2`` give ``F_GUE(x)`` and
    its square for the step start; ``gaussian`` gives the standard normal
    distribution function.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if kind == 'goe':
        return tracy_widom_goe(2.0 ** (2.0 / 3.0) * x)
    if kind == 'gue':
        return tracy_widom_gue(x)
    if kind == 'gue2':
        return tracy_widom_gue(x) ** 2
    if kind == 'gaussian':
        return gaussian_cdf(x)
    raise ValueError(f'unknown reference {kind!r}; choose from {REFERENCE_KINDS}')

"""
Relaxation-scale parametrizations and the tagged-particle / current duality.

The scaling helpers turn a point ``(tau, x)`` of the limiting picture into a
finite time ``t`` and an integer threshold ``a``.  Because ``a`` is rounded, the
helpers also report the value ``x_realized`` that the integer actually
corresponds to; comparisons against the limit laws should use it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import NegativeTime
from ..ring_bethe import SystemShape

__all__ = ['ScalingInputs', 'ScaledPoint', 'flat_scaling', 'step_scaling',
           'fluctuation_scale', 'current_from_tagged', 'current_threshold']


@dataclass(frozen=True)
class ScalingInputs:
    """
    Parameters of the relaxation-scale limit.

    Attributes
    ----------
    tau : float
        Rescaled time, positive.
    x : float
        Scaled fluctuation variable.
    gamma : float
        Shock phase (step only).
    k : int
        Tagged particle index.
    m : int, optional
        Bond index for current observables.
    """

    tau: float
    x: float = 0.0
    gamma: float = 0.0
    k: int = 1
    m: Optional[int] = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f'tau must be positive, got {self.tau}')


@dataclass(frozen=True)
class ScaledPoint:
    t: float
    a: int
    x_realized: float
    gamma_realized: Optional[float] = None


def fluctuation_scale(rho: float, t: float) -> float:
    """``rho^(-1/3) (1-rho)^(2/3) t^(1/3)``, the KPZ scale of the position."""
    return rho ** (-1.0 / 3.0) * (1.0 - rho) ** (2.0 / 3.0) * t ** (1.0 / 3.0)


def flat_scaling(s: ScalingInputs, shape: SystemShape) -> ScaledPoint:
    """
    Time and threshold for the flat start with ``L = d N``.

    ``t = tau L^(3/2) / sqrt(rho (1-rho))`` and
    ``a = round((1-rho) t + k d - x c)`` with ``c`` the fluctuation scale.
    """
    L, N = shape.L, shape.N
    if L % N:
        raise ValueError(f'flat scaling needs L = d N, got L={L}, N={N}')
    d = L // N
    rho = shape.rho
    t = s.tau * L ** 1.5 / math.sqrt(rho * (1.0 - rho))
    c = fluctuation_scale(rho, t)
    centre = (1.0 - rho) * t + s.k * d
    a = int(round(centre - s.x * c))
    return ScaledPoint(t=t, a=a, x_realized=(centre - a) / c)


def step_scaling(s: ScalingInputs, shape: SystemShape) -> ScaledPoint:
    """
    Time and threshold for the step start ``(-N+1, ..., 0)``.

    ``t = (N/rho^2) [tau sqrt(N)/sqrt(1-rho)] + gamma N/rho^2 + (N-k)/rho^2``
    and ``a = round((1-rho) t - (N-k)/rho - x c)``.  The shock phase enters
    ``t`` without rounding, so the realized phase equals ``gamma``.
    """
    L, N = shape.L, shape.N
    rho = shape.rho
    k = s.k
    if not 1 <= k <= N:
        raise ValueError(f'k must satisfy 1 <= k <= N, got k={k}')
    n_shocks = math.floor(s.tau * math.sqrt(N) / math.sqrt(1.0 - rho))
    t = (N / rho ** 2) * n_shocks + s.gamma * N / rho ** 2 + (N - k) / rho ** 2
    if t < 0:
        raise NegativeTime(f'step scaling gives t={t} < 0')
    c = fluctuation_scale(rho, t) if t > 0 else 1.0
    centre = (1.0 - rho) * t - (N - k) / rho
    a = int(round(centre - s.x * c))
    return ScaledPoint(t=t, a=a, x_realized=(centre - a) / c,
                       gamma_realized=float(s.gamma))


# ========
# duality
# ========

def current_from_tagged(i: int, m: int, k: int, shape: SystemShape):
    """
    Thresholds linking the step-start tagged particle to a bond current.

    For the step start ``x_k(t) >= i L + m + 1`` holds exactly when
    ``J_m(t) >= i N + (N + 1 - k) + m 1{m <= 0}``.

    Returns
    -------
    (int, int)
        The position threshold ``i L + m + 1`` and the current threshold.
    """
    L, N = shape.L, shape.N
    if i < 1:
        raise ValueError('i must be at least 1')
    if not -N + 1 <= m <= L - N:
        raise ValueError(f'bond index m must lie in [{-N + 1}, {L - N}]')
    if not 1 <= k <= N:
        raise ValueError(f'k must satisfy 1 <= k <= N, got k={k}')
    extra = m if m <= 0 else 0
    return i * L + m + 1, i * N + (N + 1 - k) + extra


def current_threshold(y, L: int, k: int, b: int):
    """
    General form of the duality for any initial configuration.

    With the lift ``x_(j+N) = x_j + L``, the event ``x_k(t) >= b`` (for
    ``x_k(0) < b``) coincides with ``J_m(t) >= J(b) - k + 1`` where
    ``m = (b - 1) mod L`` and ``J(b)`` is the largest lifted index whose
    initial position is at most ``b - 1``.

    Parameters
    ----------
    y : array_like
        Initial positions ``x_1(0) < ... < x_N(0)``.
    L : int
    k : int
        Particle index (any integer; the lift is applied).
    b : int
        Position threshold.

    Returns
    -------
    (int, int)
        The ring bond ``m`` in ``[0, L)`` and the current threshold.
    """
    y = np.asarray(y, dtype=np.int64)
    N = y.size
    # lifted index j = r + q N (r in 1..N) sits at y_r + q L
    q = (b - 1 - y) // L                       # largest q with y_r + q L <= b - 1
    jmax = int(np.max(np.arange(1, N + 1) + q * N))
    return (b - 1) % L, jmax - k + 1

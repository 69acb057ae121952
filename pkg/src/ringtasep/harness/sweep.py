"""
Convergence of the exact finite-time distribution toward the limit law.

For each ring size the scaling helpers map a grid of ``x`` to integer
thresholds; the exact probabilities at those thresholds are compared with
the limit law evaluated at the realized ``x`` of each rounded threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..finite_time import (ScalingInputs, flat_scaling, one_point_flat,
                           one_point_step, step_scaling)
from ..limit_dist import F1, F2
from ..quadrature import QuadratureSpec
from ..ring_bethe import SystemShape

__all__ = ['ScaledCurve', 'SweepRow', 'finite_scaled_cdf', 'converge_sweep']


@dataclass
class ScaledCurve:
    """Exact probabilities next to the limit law on realized scaled points."""

    L: int
    N: int
    t: float
    a: np.ndarray
    x_realized: np.ndarray
    exact: np.ndarray
    limit: np.ndarray
    cancellation: float

    @property
    def sup_distance(self) -> float:
        return float(np.max(np.abs(self.exact - self.limit)))


@dataclass(frozen=True)
class SweepRow:
    L: int
    sup_distance: float
    decreasing: bool
    cancellation: float


def _shape(family, L, d, rho):
    if family == 'flat':
        if L % d:
            raise ValueError(f'flat start needs d | L, got L={L}, d={d}')
        return SystemShape(L, L // d)
    N = rho * L
    if abs(N - round(N)) > 1e-9:
        raise ValueError(f'rho L must be an integer, got {N}')
    return SystemShape(L, int(round(N)))


def finite_scaled_cdf(family: str, L: int, tau: float, xs, gamma: float = 0.0,
                      k: int = 1, d: int = 2, rho: float = 0.5,
                      quad: QuadratureSpec = QuadratureSpec(nodes=16),
                      limit_quad: QuadratureSpec = QuadratureSpec(),
                      auto_radius: bool = True) -> ScaledCurve:
    """
    Exact ``P(x_k(t) >= a)`` on the thresholds of a scaled grid.

    Parameters
    ----------
    family : {'flat', 'step'}
    L : int
    tau : float
    xs : array_like
        Scaled grid; each entry gives one threshold, and repeated thresholds
        after rounding are dropped.
    gamma : float
        Shock phase, step only.
    auto_radius : bool, default=True
        Let the exact formula choose its contour radius; ``False`` uses
        ``quad.radius``.
    """
    shape = _shape(family, L, d, rho)
    if family == 'flat':
        pts = [flat_scaling(ScalingInputs(tau=tau, x=float(x), k=k), shape)
               for x in xs]
    else:
        pts = [step_scaling(ScalingInputs(tau=tau, x=float(x), gamma=gamma, k=k),
                            shape) for x in xs]
    seen, keep = set(), []
    for p in pts:
        if p.a not in seen:
            seen.add(p.a)
            keep.append(p)
    a = [p.a for p in keep]
    xr = np.array([p.x_realized for p in keep])
    t = keep[0].t
    if family == 'flat':
        res = one_point_flat(L // shape.N, shape.N, k, a, t, quad, auto_radius)
        lim = F1(tau ** (1.0 / 3.0) * xr, tau, limit_quad).value
    else:
        res = one_point_step(L, shape.N, k, a, t, quad, auto_radius)
        lim = F2(tau ** (1.0 / 3.0) * xr, tau, gamma, limit_quad).value
    exact = np.array([r.value for r in res])
    canc = max(r.cancellation for r in res)
    return ScaledCurve(L, shape.N, t, np.array(a), xr, exact, lim, canc)


def converge_sweep(family: str, L_values, tau: float, xs, gamma: float = 0.0,
                   k: int = 1, d: int = 2, rho: float = 0.5,
                   quad: QuadratureSpec = QuadratureSpec(nodes=16),
                   auto_radius: bool = True):
    """
    Sup-distance to the limit law for each ``L``.

    Returns
    -------
    list of SweepRow
        ``decreasing`` is ``True`` when the distance is strictly below the
        one at the previous ``L`` (always ``True`` for the first row).
    """
    rows = []
    prev = None
    for L in L_values:
        c = finite_scaled_cdf(family, int(L), tau, xs, gamma, k, d, rho, quad,
                              auto_radius=auto_radius)
        dist = c.sup_distance
        rows.append(SweepRow(int(L), dist, prev is None or dist < prev,
                             c.cancellation))
        prev = dist
    return rows

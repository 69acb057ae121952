"""
Trapezoid quadrature of ``oint F(z) dz / (2 pi i z)`` on a zhat-circle.

Because every integrand is invariant under ``z -> z exp(2 pi i / L)`` the
contour average over the physical ``z`` circle equals the plain average over
``zhat = r exp(i theta)``.  The trapezoid rule is spectrally accurate for such
periodic analytic integrands, and doubling the node count reuses every node
already evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import BranchDiscontinuity, QuadratureDivergence

__all__ = ['QuadratureSpec', 'ProbabilityResult', 'ContourAverage',
           'NodeValues', 'contour_average', 'ROUNDING_FLOOR']

# absolute rounding error of an average, relative to its largest summand
ROUNDING_FLOOR = 1e-14


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Node layout for the contour average.

    Parameters
    ----------
    nodes : int, default=128
        Number ``M`` of equispaced points (even, at least 8).
    radius : float, default=0.5
        Radius of the zhat circle.  The Fredholm formulas need it strictly
        between 0 and 1; the small-ring formulas accept any positive value.
    adaptive : bool, default=True
        Keep doubling ``M`` until successive averages differ by less than
        ``tol``.
    tol : float, default=1e-9
    fail_tol : float, default=1e-6
        If the doubling sequence stops (at ``max_nodes``) with a change larger
        than this, :class:`QuadratureDivergence` is raised.
    max_nodes : int, default=2048
    """

    nodes: int = 128
    radius: float = 0.5
    adaptive: bool = True
    tol: float = 1e-9
    fail_tol: float = 1e-6
    max_nodes: int = 2048

    def __post_init__(self):
        if self.nodes < 8 or self.nodes % 2:
            raise ValueError(f'nodes must be even and >= 8, got {self.nodes}')
        if not self.radius > 0.0:
            raise ValueError(f'radius must be positive, got {self.radius}')


@dataclass(frozen=True)
class ProbabilityResult:
    """A probability together with its quadrature diagnostics."""

    value: float
    imag_residue: float
    quad_delta: Optional[float] = None
    nodes_used: Optional[int] = None
    radius: Optional[float] = None
    magnitude: Optional[float] = None
    noise_floor: Optional[float] = None

    @property
    def cancellation(self) -> float:
        """
        Estimated rounding floor of the contour average.

        The integrand can be far larger than the result (the tails of the
        distribution come out of heavy cancellation), and the absolute error
        is then about machine epsilon times the largest integrand value,
        further multiplied by the size of the exponents when the integrand
        is assembled in the log domain.
        """
        return 0.0 if self.noise_floor is None else self.noise_floor

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class ContourAverage:
    values: np.ndarray
    nodes_used: int
    quad_delta: Optional[float]
    radius: float = 0.0
    magnitude: Optional[np.ndarray] = None
    noise_floor: Optional[np.ndarray] = None


class NodeValues(NamedTuple):
    """
    Integrand values at one node.

    ``phase`` is tracked for branch continuity; ``scale`` is the size of the
    rounding error per output in units of machine epsilon (defaults to
    ``|values|``).
    """

    values: np.ndarray
    phase: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None


def _nodes(M, radius, idx):
    return radius * np.exp(2j * math.pi * np.asarray(idx) / M)


def contour_average(evaluate: Callable, quad: QuadratureSpec,
                    phase_check: bool = False,
                    radius: Optional[float] = None) -> ContourAverage:
    """
    Average ``evaluate`` over the nodes of ``quad``, doubling adaptively.

    Parameters
    ----------
    evaluate : callable
        ``evaluate(zhat)`` for a single complex node returns either a 1-d
        complex array of integrand values or a :class:`NodeValues`.
    quad : QuadratureSpec
    phase_check : bool, default=False
        Raise :class:`BranchDiscontinuity` if the tracked phase moves by ``pi``
        or more between two neighbouring nodes.
    radius : float, optional
        Overrides ``quad.radius``.

    Returns
    -------
    ContourAverage
    """
    M = quad.nodes
    R = quad.radius if radius is None else float(radius)
    cache = {}  # node index at resolution ``M`` -> NodeValues

    def run(indices, M_cur):
        for i in indices:
            out = evaluate(complex(_nodes(M_cur, R, i)))
            if not isinstance(out, NodeValues):
                out = NodeValues(out)
            vals = np.atleast_1d(np.asarray(out.values, dtype=complex))
            scale = np.abs(vals) if out.scale is None else np.atleast_1d(out.scale)
            cache[i] = NodeValues(vals, out.phase, scale)

    def magnitude(M_cur):
        return np.max(np.abs(np.stack([cache[i][0] for i in range(M_cur)])),
                      axis=0)

    def floor_of(M_cur):
        return ROUNDING_FLOOR * np.max(
            np.stack([cache[i].scale for i in range(M_cur)]), axis=0)

    def average(M_cur):
        # fixed reduction order: ascending angle
        stack = np.stack([cache[i][0] for i in range(M_cur)])
        return stack.sum(axis=0) / M_cur

    run(range(M), M)
    current = average(M)
    delta = None
    if quad.adaptive:
        while True:
            if 2 * M > quad.max_nodes:
                break
            # re-index the cache for resolution 2M: old node i becomes 2i
            old = dict(cache)
            cache.clear()
            for i, v in old.items():
                cache[2 * i] = v
            M *= 2
            run(range(1, M, 2), M)
            new = average(M)
            change = np.abs(new - current)
            current = new
            # outputs whose change sits at the rounding floor of a strongly
            # cancelling integrand cannot improve by adding nodes
            floor = floor_of(M)
            delta = float(np.max(change))
            if np.all(change < np.maximum(quad.tol, floor)):
                break
        if delta is not None:
            floor = floor_of(M)
            if np.any((change > quad.fail_tol) & (change > floor)):
                raise QuadratureDivergence(
                    f'contour average still moves by {delta:.3e} at {M} nodes')

    if phase_check:
        phases = [cache[i][1] for i in range(M)]
        if all(p is not None for p in phases):
            ph = np.stack([np.atleast_1d(p) for p in phases])
            jumps = np.abs(np.diff(np.vstack([ph, ph[:1]]), axis=0))
            # the cyclic wrap-around difference is only defined modulo 2 pi
            jumps[-1] = np.abs((jumps[-1] + math.pi) % (2 * math.pi) - math.pi)
            if np.max(jumps) >= math.pi:
                raise BranchDiscontinuity(
                    f'phase jump {np.max(jumps):.3f} between adjacent nodes '
                    f'at M={M}; increase the node count')
    return ContourAverage(values=current, nodes_used=M, quad_delta=delta,
                          radius=R, magnitude=magnitude(M),
                          noise_floor=floor_of(M))

"""
The crossover distributions ``F_1(x; tau)`` (flat start) and
``F_2(x; tau, gamma)`` (step start).

Both are contour averages over ``|z| = r`` of an explicit prefactor times a
Fredholm determinant on the discrete node set

    S_z = { xi : exp(-xi^2 / 2) = z, Re xi < 0 },   xi_k = -sqrt(-2 log z - 4 pi i k).

The kernels decay like ``exp(-tau |xi|^3)`` along the node asymptotes, so the
determinant is truncated to ``|k| <= m`` with ``m`` chosen adaptively.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from ..errors import SeriesStall, TruncationUnstable
from ..quadrature import (ROUNDING_FLOOR, NodeValues, QuadratureSpec,
                          contour_average)
from .special import abc_constants, b_constant, cerfc, polylog

__all__ = ['NodeSet', 'nodes', 'psi_int', 'psi_int_path', 'psi_int_line',
           'kernel_flat', 'kernel_step', 'fredholm_det', 'F1', 'F2',
           'DistributionCurve', 'TruncationSpec', 'DEFAULT_QUAD']

PSI_TERM_TOL = 1e-14
MAX_PSI_TERMS = 10_000
DEFAULT_QUAD = QuadratureSpec(nodes=128, radius=0.5)


@dataclass(frozen=True)
class TruncationSpec:
    """
    Adaptive truncation of the node set.

    Starting from ``m = start`` the determinant is compared with the one on
    ``m + probe`` nodes; ``m`` doubles until the two agree to ``tol``.
    """

    start: int = 12
    probe: int = 4
    tol: float = 1e-10
    max_m: int = 384


# ======
# nodes
# ======

@dataclass(frozen=True)
class NodeSet:
    """
    Truncated node set of one ``z``, ordered by branch index ``k = -m..m``.

    ``xi2`` holds the exact squares ``-2 log z - 4 pi i k``.
    """

    z: complex
    m: int
    xi: np.ndarray
    xi2: np.ndarray

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)

    def __len__(self):
        return self.xi.size

    def slice(self, m: int) -> 'NodeSet':
        """Sub-set with half-count ``m <= self.m`` (the central nodes)."""
        if m > self.m:
            raise ValueError(f'cannot widen a node set from {self.m} to {m}')
        lo = self.m - m
        sl = slice(lo, lo + 2 * m + 1)
        return NodeSet(self.z, m, self.xi[sl], self.xi2[sl])


def nodes(z, m: int) -> NodeSet:
    """
    The ``2m + 1`` nodes of ``exp(-xi^2/2) = z`` with ``Re xi < 0`` and
    branch index ``|k| <= m``.

    Since ``-2 log|z| > 0`` the principal square root never lands on the
    imaginary axis, so the sign flip picks the left half plane uniquely.
    """
    z = complex(z)
    if not 0.0 < abs(z) < 1.0:
        raise ValueError(f'nodes need 0 < |z| < 1, got |z|={abs(z)}')
    if m < 0:
        raise ValueError('m must be non-negative')
    k = np.arange(-m, m + 1)
    xi2 = -2.0 * cmath.log(z) - 4j * math.pi * k
    return NodeSet(z, int(m), -np.sqrt(xi2), xi2)


# ==========================
# integral term of Psi / Phi
# ==========================

def psi_int(xi, z) -> np.ndarray:
    """
    ``-(1/sqrt(2 pi)) int_{-inf}^{xi} Li_{1/2}(exp(-w^2/2)) dw`` for nodes ``xi``.

    Integrating the series of ``Li_{1/2}`` term by term gives

        -1/2 sum_{k>=1} erfc(-xi sqrt(k/2)) / k,

    whose terms decay like ``|z|^k / k^(3/2)`` on the nodes of ``z``.

    Parameters
    ----------
    xi : complex or array_like
        Nodes of ``z``.
    z : complex

    Returns
    -------
    numpy.ndarray or complex
    """
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    r = abs(complex(z))
    total = np.zeros_like(xi)
    # sum in blocks so the stopping rule can look at the term size
    k0, block = 1, 32
    while True:
        k = np.arange(k0, k0 + block, dtype=float)
        terms = cerfc(-xi[:, None] * np.sqrt(k / 2.0)[None, :]) / k[None, :]
        total += terms[:, ::-1].sum(axis=1)
        last = np.max(np.abs(terms[:, -1]))
        if last < PSI_TERM_TOL and (r ** k[-1]) < PSI_TERM_TOL:
            break
        k0 += block
        if k0 > MAX_PSI_TERMS:
            raise SeriesStall(f'psi series did not settle in {MAX_PSI_TERMS} terms')
        block = min(2 * block, 512)
    out = -0.5 * total
    return complex(out[0]) if scalar else out


def _quad_complex(f, a, b, **opts):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        re, _ = integrate.quad(lambda s: f(s).real, a, b, **opts)
        im, _ = integrate.quad(lambda s: f(s).imag, a, b, **opts)
    return complex(re, im)


def psi_int_path(xi, z) -> complex:
    """
    Direct quadrature of the path integral defining the ``Psi`` term.

    The path runs along the real axis from ``-inf`` to ``Re xi`` and then
    vertically to ``xi``.  Both legs stay inside the sector where
    ``|exp(-w^2/2)| <= |z|``, so the polylogarithm is never near its cut.
    """
    xi = complex(xi)
    a, b = xi.real, xi.imag
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=400)
    horiz = _quad_complex(lambda w: polylog(0.5, math.exp(-w * w / 2.0)),
                          -np.inf, a, **opts)
    vert = _quad_complex(
        lambda s: 1j * polylog(0.5, cmath.exp(-(a + 1j * s) ** 2 / 2.0)),
        0.0, b, **opts) if b != 0.0 else 0j
    return -(horiz + vert) / math.sqrt(2.0 * math.pi)


def psi_int_line(xi, z) -> complex:
    """
    Line-integral representation of the ``Psi`` term,

        int_{Re w = 0} log(1 - z exp(w^2/2)) / (w - xi) dw / (2 pi i),

    evaluated with ``w = i s`` as a real integral over ``s``.
    """
    xi, z = complex(xi), complex(z)

    def f(s):
        return cmath.log(1.0 - z * math.exp(-s * s / 2.0)) / (1j * s - xi)

    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    return _quad_complex(f, -np.inf, np.inf, **opts) / (2.0 * math.pi)


# ========
# kernels
# ========

def _exponent(ns: NodeSet, x, tau, psi, weight):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cubic = -tau * ns.xi ** 3 / 3.0 + weight * psi
    return cubic[None, :] + x[:, None] * ns.xi[None, :]


def _flat_batch(ns: NodeSet, x, tau, psi):
    Psi = _exponent(ns, x, tau, psi, 1.0)
    xi = ns.xi
    S = 1.0 / (xi[:, None] * (xi[:, None] + xi[None, :]))
    E = np.exp(Psi)
    return E[:, :, None] * S[None] * E[:, None, :]


def _step_batch(ns: NodeSet, x, tau, gamma, psi):
    Phi = _exponent(ns, x, tau, psi, 2.0)
    xi = ns.xi
    C = 1.0 / (xi[:, None] + xi[None, :])
    left = np.exp(Phi + 0.5 * gamma * ns.xi2[None, :]) / xi[None, :]
    right = np.exp(Phi - 0.5 * gamma * ns.xi2[None, :]) / xi[None, :]
    inner = left[:, :, None] * C[None] * right[:, None, :]
    return inner @ C[None]


def kernel_flat(ns: NodeSet, x: float, tau: float, psi=None) -> np.ndarray:
    """
    Flat-start kernel ``exp(Psi(a) + Psi(b)) / (a (a + b))`` on the nodes.

    ``Psi(xi) = -tau xi^3 / 3 + x xi + psi_int(xi, z)``.  ``psi`` may be
    passed in to reuse the integral term across ``x``.
    """
    if not tau > 0:
        raise ValueError(f'tau must be positive, got {tau}')
    if psi is None:
        psi = psi_int(ns.xi, ns.z)
    return _flat_batch(ns, x, tau, psi)[0]


def kernel_step(ns: NodeSet, x: float, tau: float, gamma: float,
                psi=None) -> np.ndarray:
    """
    Step-start kernel

        sum_eta exp(Phi(a) + Phi(eta) + gamma (a^2 - eta^2)/2) / (a eta (a+eta)(eta+b))

    with ``Phi(xi) = -tau xi^3/3 + x xi + 2 psi_int(xi, z)``; the ``eta``
    sum runs over the same truncated node set.
    """
    if not tau > 0:
        raise ValueError(f'tau must be positive, got {tau}')
    if psi is None:
        psi = psi_int(ns.xi, ns.z)
    return _step_batch(ns, x, tau, gamma, psi)[0]


def fredholm_det(K) -> complex:
    """``det(I - K)`` by LU with partial pivoting; ``K`` may be batched."""
    K = np.asarray(K, dtype=complex)
    if K.shape[-1] != K.shape[-2]:
        raise ValueError(f'kernel must be square, got shape {K.shape}')
    eye = np.eye(K.shape[-1], dtype=complex)
    out = np.linalg.det(eye - K)
    return complex(out) if out.ndim == 0 else out


# ======================
# distribution functions
# ======================

@dataclass
class DistributionCurve:
    """
    Values of ``F_1`` or ``F_2`` on a grid of ``x``.

    Attributes
    ----------
    family : str
        ``'F1'`` or ``'F2'``.
    params : dict
        ``tau`` and, for ``F2``, ``gamma``.
    x, value, imag_residue : numpy.ndarray
    m_used : numpy.ndarray
        Largest node half-count used at any quadrature point, per ``x``.
    M_used : int
        Final number of contour nodes.
    quad_delta : float or None
        Change of the last node doubling.
    noise_floor : numpy.ndarray
        Rounding floor of the contour average per ``x``.  In the far left
        tail the integrand is many orders of magnitude larger than the
        result and the floor, not the quadrature, limits the accuracy.
    """

    family: str
    params: dict
    x: np.ndarray
    value: np.ndarray
    imag_residue: np.ndarray
    m_used: np.ndarray
    M_used: int
    quad_delta: Optional[float] = None
    radius: float = 0.5
    noise_floor: Optional[np.ndarray] = None

    @property
    def reliable(self) -> np.ndarray:
        """Grid points whose rounding floor is below ``1e-9``."""
        if self.noise_floor is None:
            return np.ones(self.x.size, dtype=bool)
        return self.noise_floor < 1e-9

    def rows(self):
        for i in range(self.x.size):
            yield (float(self.x[i]), float(self.value[i]),
                   float(self.imag_residue[i]), int(self.m_used[i]),
                   int(self.M_used))


def _truncated_det(z, batch, trunc: TruncationSpec):
    """Determinants on a growing node set until ``m`` and ``m+probe`` agree."""
    m = trunc.start
    while True:
        big = m + trunc.probe
        ns = nodes(z, big)
        psi_full = psi_int(ns.xi, z)
        small = ns.slice(m)
        lo = trunc.probe
        K = batch(ns, psi_full)
        d_big = fredholm_det(K)
        d_small = fredholm_det(batch(small, psi_full[lo:lo + 2 * m + 1]))
        # Hadamard bound on det(I - K): the size of the terms that cancel
        bound = np.prod(1.0 + np.linalg.norm(K, axis=-1), axis=-1)
        allowed = np.maximum(trunc.tol * np.maximum(1.0, np.abs(d_big)),
                             ROUNDING_FLOOR * bound)
        if np.all(np.abs(d_big - d_small) <= allowed):
            return d_big, big, bound
        if 2 * m > trunc.max_m:
            raise TruncationUnstable(
                f'determinant still moves by {np.max(np.abs(d_big - d_small)):.3e} '
                f'at m={m} (z={z})')
        m *= 2


def _curve(family, params, x, prefactor, batch, quad, trunc):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not 0.0 < quad.radius < 1.0:
        raise ValueError(f'contour radius must lie in (0, 1), got {quad.radius}')
    m_used = np.zeros(x.size, dtype=int)

    def evaluate(z):
        pre = prefactor(z)
        det, m, bound = _truncated_det(z, batch, trunc)
        np.maximum(m_used, m, out=m_used)
        return NodeValues(pre * det, None, np.abs(pre) * bound)

    avg = contour_average(evaluate, quad)
    return DistributionCurve(
        family=family, params=params, x=x, value=avg.values.real.copy(),
        imag_residue=np.abs(avg.values.imag), m_used=m_used,
        M_used=avg.nodes_used, quad_delta=avg.quad_delta, radius=avg.radius,
        noise_floor=np.asarray(avg.noise_floor, dtype=float))


def _check_tau(tau):
    if not tau > 0:
        raise ValueError(f'tau must be positive, got {tau}')


def F1(x, tau: float, quad: QuadratureSpec = DEFAULT_QUAD,
       trunc: TruncationSpec = TruncationSpec()) -> DistributionCurve:
    """
    Flat crossover distribution ``F_1(x; tau)``.

    ``F_1 = oint exp(x A_1 + tau A_2 + A_3 + B) det(I - K_1) dz / (2 pi i z)``.

    Parameters
    ----------
    x : float or array_like
    tau : float
    quad : QuadratureSpec
        Contour radius in ``(0, 1)`` and node count.
    trunc : TruncationSpec

    Returns
    -------
    DistributionCurve
    """
    _check_tau(tau)
    xs = np.atleast_1d(np.asarray(x, dtype=float))

    def prefactor(z):
        A1, A2, A3 = abc_constants(z)
        return np.exp(xs * A1 + tau * A2 + A3 + b_constant(z))

    def batch(ns, psi):
        return _flat_batch(ns, xs, tau, psi)

    return _curve('F1', {'tau': tau}, xs, prefactor, batch, quad, trunc)


def F2(x, tau: float, gamma: float = 0.0,
       quad: QuadratureSpec = DEFAULT_QUAD,
       trunc: TruncationSpec = TruncationSpec()) -> DistributionCurve:
    """
    Step crossover distribution ``F_2(x; tau, gamma)``.

    ``F_2 = oint exp(x A_1 + tau A_2 + 2 B) det(I - K_2) dz / (2 pi i z)``.
    """
    _check_tau(tau)
    xs = np.atleast_1d(np.asarray(x, dtype=float))

    def prefactor(z):
        A1, A2, _ = abc_constants(z)
        return np.exp(xs * A1 + tau * A2 + 2.0 * b_constant(z))

    def batch(ns, psi):
        return _step_batch(ns, xs, tau, gamma, psi)

    return _curve('F2', {'tau': tau, 'gamma': gamma}, xs, prefactor, batch,
                  quad, trunc)

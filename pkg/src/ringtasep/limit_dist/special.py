"""
Special functions behind the crossover distributions.

Polylogarithms of half-integer order, the complex complementary error
function, and the constants ``A_1, A_2, A_3, B`` that multiply the Fredholm
determinants.
"""

from __future__ import annotations

import cmath
import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from ..errors import BranchCut, SeriesStall

__all__ = ['polylog', 'polylog_series', 'polylog_integral', 'cerfc',
           'abc_constants', 'b_constant', 'b_constant_quad', 'b_coefficients',
           'SERIES_RADIUS', 'MAX_TERMS']

SERIES_RADIUS = 0.8
MAX_TERMS = 10_000
SERIES_TOL = 1e-17
TERM_TOL = 1e-14
# e^{-u^2} < 1e-18 beyond this cutoff
U_CUTOFF = math.sqrt(18.0 * math.log(10.0))
_ALLOWED_ORDERS = (0.5, 1.5, 2.5)


def _check_order(s):
    if not any(abs(s - a) < 1e-15 for a in _ALLOWED_ORDERS):
        raise ValueError(f'polylog order must be one of {_ALLOWED_ORDERS}, got {s}')


def _check_cut(w):
    if abs(w.imag) == 0.0 and w.real >= 1.0:
        raise BranchCut(f'Li_s is singular on [1, inf); got w={w}')


def polylog_series(s: float, w) -> complex:
    """Defining power series ``sum_k w^k / k^s``; valid for ``|w| < 1``."""
    w = complex(w)
    if w == 0:
        return 0j
    r = abs(w)
    if r >= 1:
        raise ValueError(f'series needs |w| < 1, got |w|={r}')
    # terms are bounded by r^k, so this many suffice for SERIES_TOL
    n = int(math.ceil(math.log(SERIES_TOL) / math.log(r))) + 2
    if n > MAX_TERMS:
        raise SeriesStall(f'Li_{s} series at |w|={r} needs {n} terms')
    k = np.arange(1, n + 1, dtype=float)
    terms = np.exp(k * cmath.log(w) - s * np.log(k))
    return complex(np.sum(terms[::-1]))


def polylog_integral(s: float, w) -> complex:
    """
    Integral continuation ``Li_s(w) = w / Gamma(s) int_0^inf x^(s-1) / (e^x - w) dx``.

    After the substitution ``x = u^2`` the integrand ``2 u^(2s-1) / (e^(u^2) - w)``
    is smooth at the origin for ``s >= 1/2``.  It is integrated adaptively on
    ``[0, U]`` with ``e^(-U^2) < 1e-18``.
    """
    w = complex(w)
    _check_cut(w)
    p = 2.0 * s - 1.0

    def f(u):
        return 2.0 * u ** p / (math.exp(u * u) - w)

    opts = dict(epsabs=1e-16, epsrel=1e-14, limit=400)
    with warnings.catch_warnings():
        # the tolerances sit at rounding level; quad flags that but the
        # result is still accurate to a few ulps
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        re, _ = integrate.quad(lambda u: f(u).real, 0.0, U_CUTOFF, **opts)
        im, _ = integrate.quad(lambda u: f(u).imag, 0.0, U_CUTOFF, **opts)
    return w / math.gamma(s) * complex(re, im)


def polylog(s: float, w) -> complex:
    """
    Polylogarithm ``Li_s(w)`` for ``s`` in ``{1/2, 3/2, 5/2}``.

    Parameters
    ----------
    s : float
        Order.
    w : complex
        Argument off the cut ``[1, inf)``.

    Returns
    -------
    complex

    Raises
    ------
    BranchCut
        If ``w`` is real and at least one.

    Notes
    -----
    The power series is used for ``|w| <= 0.8`` and the integral
    representation elsewhere.
    """
    _check_order(s)
    w = complex(w)
    _check_cut(w)
    if abs(w) <= SERIES_RADIUS:
        return polylog_series(s, w)
    return polylog_integral(s, w)


def cerfc(zeta):
    """
    Complementary error function of a complex argument.

    Backed by the Faddeeva-function implementation in :mod:`scipy.special`,
    which keeps relative accuracy in the regions where ``erfc`` underflows
    toward ``exp(-zeta^2)`` behaviour.  Accepts scalars or arrays.
    """
    out = special.erfc(np.asarray(zeta, dtype=complex))
    return complex(out) if out.ndim == 0 else out


def abc_constants(z):
    """
    The constants ``A_1, A_2, A_3`` of the crossover formulas.

    ``A_1 = -Li_{3/2}(z)/sqrt(2 pi)``, ``A_2 = -Li_{5/2}(z)/sqrt(2 pi)`` and
    ``A_3 = -log(1 - z)/4``.
    """
    z = complex(z)
    _check_cut(z)
    c = 1.0 / math.sqrt(2.0 * math.pi)
    return (-c * polylog(1.5, z), -c * polylog(2.5, z),
            -0.25 * cmath.log(1.0 - z))


@lru_cache(maxsize=None)
def _coefficients(n_max: int) -> np.ndarray:
    c = np.zeros(n_max + 1)
    for n in range(2, n_max + 1):
        k = np.arange(1, n, dtype=float)
        c[n] = np.sum(1.0 / np.sqrt(k * (n - k))) / (4.0 * math.pi * n)
    c.setflags(write=False)
    return c


def b_coefficients(n_max: int) -> np.ndarray:
    """Taylor coefficients ``c_0, ..., c_nmax`` of ``B``; ``c_0 = c_1 = 0``."""
    size = 64
    while size < n_max:
        size *= 2
    return _coefficients(size)[:n_max + 1]


def b_constant(z) -> complex:
    """
    ``B(z) = (1/4pi) int_0^z Li_{1/2}(y)^2 / y dy`` through its Taylor series.

    The coefficients are ``c_n = (1/(4 pi n)) sum_{k=1}^{n-1} (k(n-k))^(-1/2)``,
    obtained by squaring the series of ``Li_{1/2}`` and integrating termwise.
    The sum stops once ``|c_n z^n| < 1e-14``; with ``c_n`` of order ``1/n``
    the required length is known in advance.

    Raises
    ------
    SeriesStall
        If more than ``10^4`` terms would be needed.
    """
    z = complex(z)
    _check_cut(z)
    r = abs(z)
    if r == 0:
        return 0j
    if r > 0.95:
        raise ValueError(f'B is evaluated for |z| <= 0.95, got |z|={r}')
    # c_n < 1, so the tail is below r^(n+1)/(1-r) < TERM_TOL/10
    n = int(math.ceil(math.log(TERM_TOL * 0.1 * (1.0 - r)) / math.log(r))) + 2
    if n > MAX_TERMS:
        raise SeriesStall(f'B series at |z|={r} needs {n} terms')
    c = b_coefficients(n)
    k = np.arange(2, n + 1)
    terms = c[2:] * np.exp(k * cmath.log(z))
    return complex(np.sum(terms[::-1]))


def b_constant_quad(z, order: int = 160) -> complex:
    """
    Direct quadrature of the defining integral along the segment ``[0, z]``.

    Gauss-Legendre in the path parameter; ``Li_{1/2}`` is evaluated by
    :func:`polylog`, so points with ``|y| > 0.8`` go through the integral
    representation.  Used as an independent check of :func:`b_constant`.
    """
    z = complex(z)
    _check_cut(z)
    if z == 0:
        return 0j
    x, wts = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (x + 1.0)
    wts = 0.5 * wts
    total = 0j
    for si, wi in zip(s, wts):
        li = polylog(0.5, si * z)
        total += wi * li * li / si
    return total / (4.0 * math.pi)

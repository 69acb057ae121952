"""
Exact finite-time probabilities of the periodic TASEP.

All four formulas are contour averages over the normalized spectral
parameter ``zhat``.  For a node ``zhat`` the Bethe roots are computed once and
shared by every threshold ``a`` requested, so CDF tables cost one root solve
per node.

The two small-ring formulas (the transition probability and the general
one-point formula) sum integer powers over all ``L`` roots and are intended as
cross-checks for ``L <= 20``.  The flat and step formulas are Fredholm
determinants on the left roots and scale to ``L`` in the thousands; every
product over roots is accumulated as a sum of logarithms.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from ..errors import (BranchDiscontinuity, NegativeTime, ScaleExceeded,
                      ShapeMismatch)
from ..ring_bethe import (MAX_RING_SIZE, SystemShape, flat_partner_map,
                          log_qprime_right, log_zL, polynomial_roots,
                          solve_bethe_roots)
from .configuration import Configuration
from ..quadrature import (NodeValues, ProbabilityResult, QuadratureSpec,
                      contour_average)

__all__ = ['transition_probability', 'one_point_general', 'one_point_flat',
           'one_point_step', 'SMALL_RING_MAX', 'RADIUS_LADDER',
           'FREDHOLM_RADII']

SMALL_RING_MAX = 20


def _check_time(t):
    if t < 0:
        raise NegativeTime(f't must be non-negative, got {t}')


def _as_thresholds(a):
    scalar = not isinstance(a, (Sequence, np.ndarray))
    arr = np.atleast_1d(np.asarray(a))
    if arr.size and not np.all(arr == np.round(arr)):
        raise ValueError('thresholds a must be integers')
    return scalar, arr.astype(np.int64)


def _results(avg):
    return [ProbabilityResult(value=float(v.real), imag_residue=float(abs(v.imag)),
                              quad_delta=avg.quad_delta, nodes_used=avg.nodes_used,
                              radius=avg.radius, magnitude=float(mg),
                              noise_floor=float(nf))
            for v, mg, nf in zip(avg.values, avg.magnitude, avg.noise_floor)]


def _package(avg, scalar):
    out = _results(avg)
    return out[0] if scalar else out


# ====================
# small-ring formulas
# ====================

# Contour radii tried by the small-ring formulas.  Their integrands are
# analytic in the whole punctured plane, so any circle is admissible, and the
# circle with the smallest integrand keeps the rounding floor lowest.  Deep
# tails need large radii, the bulk prefers small ones.
RADIUS_LADDER = tuple(0.5 * 4.0 ** j for j in range(11))
_PROBE_NODES = 16


def _auto_radius_average(make_evaluate, n_out, quad, auto_radius):
    """
    Contour average for the small-ring formulas, one radius per output.

    ``make_evaluate(sel)`` must return an evaluator restricted to the output
    indices ``sel``.
    """
    if not auto_radius:
        return _results(contour_average(make_evaluate(np.arange(n_out)), quad))
    evaluate = make_evaluate(np.arange(n_out))
    probe = np.empty((len(RADIUS_LADDER), n_out))
    for r_idx, R in enumerate(RADIUS_LADDER):
        zs = R * np.exp(2j * math.pi * (np.arange(_PROBE_NODES) + 0.5)
                        / _PROBE_NODES)
        mags = np.zeros(n_out)
        for z in zs:
            with np.errstate(over='ignore', invalid='ignore'):
                vals = np.abs(evaluate(complex(z)))
            vals[~np.isfinite(vals)] = np.inf
            mags = np.maximum(mags, vals)
        probe[r_idx] = mags
    best = np.argmin(probe, axis=0)
    out = [None] * n_out
    for r_idx in np.unique(best):
        sel = np.nonzero(best == r_idx)[0]
        avg = contour_average(make_evaluate(sel), quad,
                              radius=RADIUS_LADDER[r_idx])
        for pos, res in zip(sel, _results(avg)):
            out[pos] = res
    return out


# Radii tried by the Fredholm formulas, which need 0 < r < 1.  The deep
# tails of both formulas are limited by cancellation that shrinks as the
# circle approaches the unit circle; the probe keeps the radius with the
# smallest rounding floor for each threshold.
FREDHOLM_RADII = (0.5, 0.7, 0.85, 0.95)
_FREDHOLM_PROBE_NODES = 8


def _fredholm_average(make_evaluate, n_out, quad, auto_radius, phase_check):
    if not auto_radius:
        return _results(contour_average(make_evaluate(np.arange(n_out)), quad,
                                        phase_check=phase_check))
    evaluate = make_evaluate(np.arange(n_out))
    probe = np.empty((len(FREDHOLM_RADII), n_out))
    for r_idx, R in enumerate(FREDHOLM_RADII):
        zs = R * np.exp(2j * math.pi * (np.arange(_FREDHOLM_PROBE_NODES) + 0.5)
                        / _FREDHOLM_PROBE_NODES)
        floor = np.zeros(n_out)
        for z in zs:
            with np.errstate(over='ignore', invalid='ignore'):
                sc = np.asarray(evaluate(complex(z)).scale, dtype=float)
            sc[~np.isfinite(sc)] = np.inf
            floor = np.maximum(floor, sc)
        probe[r_idx] = floor
    best = np.argmin(probe, axis=0)
    out = [None] * n_out
    # largest radius first: a group whose square-root phase turns too fast
    # for the node spacing falls back to the next smaller radius
    for r_idx in range(len(FREDHOLM_RADII) - 1, -1, -1):
        sel = np.nonzero(best == r_idx)[0]
        if sel.size == 0:
            continue
        try:
            avg = contour_average(make_evaluate(sel), quad,
                                  phase_check=phase_check,
                                  radius=FREDHOLM_RADII[r_idx])
        except BranchDiscontinuity:
            if r_idx == 0:
                raise
            best[sel] = r_idx - 1
            continue
        for pos, res in zip(sel, _results(avg)):
            out[pos] = res
    return out


def _root_sum(w, logw, logw1, pw, qw, t, rho, L):
    """
    ``(1/L) sum_w w^P (w+1)^Q e^{tw} / (w+rho)`` for integer arrays P, Q.
    """
    expo = (pw[..., None] * logw + qw[..., None] * logw1
            + t * w - np.log(w + rho))
    return np.exp(expo).sum(axis=-1) / L


def transition_probability(Y: Configuration, X, t: float,
                           quad: QuadratureSpec = QuadratureSpec(),
                           auto_radius: bool = True):
    """
    Probability of being in configuration ``X`` at time ``t`` starting from ``Y``.

    Parameters
    ----------
    Y : Configuration
        Initial configuration.
    X : Configuration or sequence of Configuration
        Final configuration(s) on the same ring.  Passing many at once shares
        the root solves between them.
    t : float
        Time, non-negative.
    quad : QuadratureSpec, optional
    auto_radius : bool, default=True
        Choose the contour radius from :data:`RADIUS_LADDER` by the size of
        the integrand instead of using ``quad.radius``.

    Returns
    -------
    ProbabilityResult or list of ProbabilityResult
    """
    _check_time(t)
    scalar = isinstance(X, Configuration)
    targets = [X] if scalar else list(X)
    shape = Y.shape
    if any(x.shape != shape for x in targets):
        raise ShapeMismatch('X and Y live on different rings')
    if shape.L > SMALL_RING_MAX:
        raise ScaleExceeded(f'transition_probability supports L <= '
                            f'{SMALL_RING_MAX}, got {shape.L}')
    N, L, rho = shape.N, shape.L, shape.rho
    i = np.arange(1, N + 1)
    xs = np.array([x.positions for x in targets], dtype=np.int64).reshape(-1, N)
    y = Y.as_array()
    # entry (i, j) needs w^(j-i+1) (w+1)^(-x_i + i + y_j - j); tabulate the
    # root sums once per node over the needed exponent ranges
    p_idx = (i[None, :] - i[:, None] + 1) - (2 - N)          # (N, N)
    q_all = (-xs + i)[:, :, None] + (y - i)[None, None, :]   # (n, N, N)
    q_min = int(q_all.min()) if q_all.size else 0
    q_idx = q_all - q_min
    p_vals = np.arange(2 - N, N + 1)
    q_vals = np.arange(q_min, int(q_all.max()) + 1 if q_all.size else 1)

    def make_evaluate(sel):
        qi = q_idx[sel]

        def evaluate(zhat):
            w = polynomial_roots(shape, zhat)
            weight = np.exp(t * w - np.log(w + rho)) / L
            pw = np.exp(p_vals[:, None] * np.log(w))            # (P, L)
            qw = np.exp(q_vals[:, None] * np.log(w + 1.0))      # (Q, L)
            table = (pw * weight) @ qw.T                         # (P, Q)
            mats = table[p_idx[None, :, :], qi]
            return np.linalg.det(mats)
        return evaluate

    out = _auto_radius_average(make_evaluate, len(targets), quad, auto_radius)
    return out[0] if scalar else out


def one_point_general(Y: Configuration, k: int, a, t: float,
                      quad: QuadratureSpec = QuadratureSpec(),
                      auto_radius: bool = True):
    """
    ``P(x_k(t) >= a)`` for an arbitrary initial configuration ``Y``.

    ``a`` may be an integer or a sequence of integers; in the latter case a
    list of results is returned, one per threshold.  See
    :func:`transition_probability` for ``auto_radius``.
    """
    _check_time(t)
    shape = Y.shape
    N, L, rho = shape.N, shape.L, shape.rho
    if not 1 <= k <= N:
        raise ValueError(f'k must satisfy 1 <= k <= N, got k={k}')
    if L > SMALL_RING_MAX:
        raise ScaleExceeded(f'one_point_general supports L <= '
                            f'{SMALL_RING_MAX}, got {L}')
    scalar, avals = _as_thresholds(a)
    i = np.arange(1, N + 1)[:, None]
    j = np.arange(1, N + 1)[None, :]
    y = Y.as_array()[None, :]
    pw = np.broadcast_to(j - i + 1 - k, (N, N))
    q0 = y - j + k + 1  # (w+1) exponent without the -a shift
    sign = -1.0 if ((k - 1) * (N + 1)) % 2 else 1.0

    def make_evaluate(sel):
        sub = avals[sel]

        def evaluate(zhat):
            w = polynomial_roots(shape, zhat)
            lw, lw1 = np.log(w), np.log(w + 1.0)
            pref = sign * np.exp((k - 1) * log_zL(shape, zhat))
            out = np.empty(sub.size, dtype=complex)
            for n, av in enumerate(sub):
                qw = np.broadcast_to(q0 - av, (N, N))
                m = _root_sum(w, lw, lw1, pw, qw, t, rho, L)
                out[n] = pref * np.linalg.det(m)
            return out
        return evaluate

    out = _auto_radius_average(make_evaluate, avals.size, quad, auto_radius)
    return out[0] if scalar else out


# =====================
# Fredholm determinants
# =====================

def _logdet_identity_plus(m):
    """
    ``log det(I + m)`` (LU based) and the log of its Hadamard bound.

    The bound ``prod_i ||row_i(I + m)||`` measures how much cancellation the
    determinant involves; the rounding error of the LU determinant is of the
    order of machine epsilon times the bound.
    """
    a = np.eye(m.shape[0]) + m
    sign, logabs = np.linalg.slogdet(a)
    bound = float(np.log(np.linalg.norm(a, axis=1)).sum())
    if sign == 0:
        return -np.inf + 0j, bound
    return logabs + 1j * np.angle(sign), bound


def _require_positive_real(name, z):
    # every fractional power base must sit in the right half-plane
    if np.any(np.asarray(z).real <= 0.0):
        raise AssertionError(f'fractional-power base {name} left the right '
                             'half-plane')


def one_point_flat(d: int, N: int, k: int, a, t: float,
                   quad: QuadratureSpec = QuadratureSpec(),
                   auto_radius: bool = True):
    """
    ``P(x_k(t) >= a)`` for the flat start ``(d, 2d, ..., N d)``, ``L = d N``.

    Parameters
    ----------
    d : int
        Spacing, at least 2.
    N : int
        Number of particles.
    k : int
        Tagged particle, ``1 <= k <= N``.
    a : int or sequence of int
        Threshold(s).
    t : float
        Time.
    quad : QuadratureSpec, optional
    auto_radius : bool, default=True
        Pick the radius per threshold from :data:`FREDHOLM_RADII` by the
        rounding floor instead of using ``quad.radius``.

    Returns
    -------
    ProbabilityResult or list of ProbabilityResult

    Raises
    ------
    BranchDiscontinuity
        If the square-root prefactor changes phase by ``pi`` or more between
        adjacent nodes.
    QuadratureDivergence
        If node doubling does not settle.
    """
    _check_time(t)
    if d < 2:
        raise ValueError('flat spacing d must be at least 2')
    L = d * N
    if L > MAX_RING_SIZE:
        raise ScaleExceeded(f'L={L} exceeds {MAX_RING_SIZE}')
    if not 1 <= k <= N:
        raise ValueError(f'k must satisfy 1 <= k <= N, got k={k}')
    shape = SystemShape(L, N)
    rho = shape.rho
    scalar, avals = _as_thresholds(a)
    ew = -N - k + 2

    def make_evaluate(sel):
        sub = avals[sel]

        def evaluate(zhat):
            rs = solve_bethe_roots(shape, zhat)
            pairing = flat_partner_map(rs, d)
            u, v = rs.left, rs.right
            diff_vu = v[:, None] - u[None, :]
            _require_positive_real('v - u', diff_vu)
            _require_positive_real('v + 1', v + 1.0)
            _require_positive_real('d (v + rho)', v + rho)
            log_diff = np.log(diff_vu)
            lqL = log_diff.sum(axis=1)                 # log q_left(v), principal
            # log q_right(u) modulo 2 pi i: Log(u - v) = Log(v - u) +- i pi
            lqR = log_diff.sum(axis=0) + 1j * math.pi * N
            lqp = log_qprime_right(rs, v, log_left=lqL)
            vp = v[pairing.partner]                     # V(u) for each left u
            log_u1 = np.log(u + 1.0)
            log_v1 = np.log(v + 1.0)
            base_u = lqR + ew * np.log(u) + t * u - np.log(u + rho)
            base_v = lqp + ew * np.log(v) + t * v - np.log(v + rho)
            cauchy = 1.0 / (u[:, None] - vp[None, :])
            # a-independent part of the square-root prefactor
            half = (-0.5 * np.log(d * (v + rho)).sum() - 0.5 * lqL.sum()
                    - 0.5 * d * log_v1.sum())
            sum_log_v1 = log_v1.sum()
            sum_v = v.sum()
            vals = np.empty(sub.size, dtype=complex)
            scale = np.empty(sub.size)
            for n, av in enumerate(sub):
                ea = -av + k + d
                lr = base_u - base_v[pairing.partner] + ea * (log_u1 - log_v1[pairing.partner])
                sq = np.exp(0.5 * lr)
                kern = sq[:, None] * cauchy * sq[None, :]
                logC = ((-av + k * d + L - N + 1) * sum_log_v1 + half + t * sum_v)
                logdet, bound = _logdet_identity_plus(kern)
                vals[n] = np.exp(logC + logdet)
                scale[n] = (np.exp(logC.real + bound)
                            * (1.0 + abs(logC) + np.abs(lr).max()))
            return NodeValues(vals, np.atleast_1d(half.imag), scale)
        return evaluate

    out = _fredholm_average(make_evaluate, avals.size, quad, auto_radius,
                            phase_check=True)
    return out[0] if scalar else out


def one_point_step(L: int, N: int, k: int, a, t: float,
                   quad: QuadratureSpec = QuadratureSpec(),
                   auto_radius: bool = True):
    """
    ``P(x_k(t) >= a)`` for the step start ``(-N+1, ..., 0)``.

    The kernel ``K(u, u') = f(u) sum_v 1/((u-v)(u'-v) f(v))`` has rank at
    most ``N``; its determinant is evaluated on the smaller of the two sides
    after a symmetric diagonal balancing.  Arguments and results are as
    for :func:`one_point_flat`.
    """
    _check_time(t)
    shape = SystemShape(L, N)
    if L > MAX_RING_SIZE:
        raise ScaleExceeded(f'L={L} exceeds {MAX_RING_SIZE}')
    if not 1 <= k <= N:
        raise ValueError(f'k must satisfy 1 <= k <= N, got k={k}')
    rho = shape.rho
    scalar, avals = _as_thresholds(a)
    ew = -N - k + 2

    def make_evaluate(sel):
        sub = avals[sel]

        def evaluate(zhat):
            rs = solve_bethe_roots(shape, zhat)
            u, v = rs.left, rs.right
            diff_vu = v[:, None] - u[None, :]
            log_diff = np.log(diff_vu)
            lqL = log_diff.sum(axis=1)
            lqR = log_diff.sum(axis=0) + 1j * math.pi * N
            lqp = log_qprime_right(rs, v, log_left=lqL)
            log_u1 = np.log(u + 1.0)
            log_v1 = np.log(v + 1.0)
            base_u = 2.0 * lqR + ew * np.log(u) + t * u - np.log(u + rho)
            base_v = 2.0 * lqp + ew * np.log(v) + t * v - np.log(v + rho)
            inv_uv = 1.0 / (-diff_vu)                  # 1/(u - v), shape (N, L-N)
            const = (k - 1) * np.log(-u).sum() + t * v.sum() - lqL.sum()
            sum_log_v1 = log_v1.sum()
            vals = np.empty(sub.size, dtype=complex)
            scale = np.empty(sub.size)
            for n, av in enumerate(sub):
                eb = -av - N + k + 1
                A = base_u + eb * log_u1
                B = base_v + eb * log_v1
                # det(I + P Q) with P(u,v) = e^{A_u - B_v}/(u-v), Q(v,u) = 1/(u-v)
                # equals det(I + G G^T), G(v,u) = e^{(A_u - B_v)/2}/(u-v)
                G = np.exp(0.5 * (A[None, :] - B[:, None])) * inv_uv
                if N <= L - N:
                    m = G @ G.T
                else:
                    m = G.T @ G
                logC = const + (-av + L - 2 * N + k) * sum_log_v1
                logdet, bound = _logdet_identity_plus(m)
                vals[n] = np.exp(logC + logdet)
                spread = np.abs(A).max() + np.abs(B).max()
                scale[n] = np.exp(logC.real + bound) * (1.0 + abs(logC) + spread)
            return NodeValues(vals, None, scale)
        return evaluate

    out = _fredholm_average(make_evaluate, avals.size, quad, auto_radius,
                            phase_check=False)
    return out[0] if scalar else out

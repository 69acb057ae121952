"""
Bethe root spectrum of the periodic TASEP.

The roots are the L solutions of ``w^N (w+1)^(L-N) = z^L``.  Writing
``z^L = (-1)^N r0^L zhat`` with ``r0 = rho^rho (1-rho)^(1-rho)`` the equation
becomes the normalized form

    (-w/rho)^N ((w+1)/(1-rho))^(L-N) = zhat,

which involves only quantities of order one.  The raw polynomial is never
formed: its coefficients overflow long before L reaches the thousands.

For ``0 < |zhat| < 1`` the roots split into ``N`` points with
``Re(w) > -rho`` (the *right* roots, clustering at 0 as zhat -> 0) and
``L - N`` points with ``Re(w) < -rho`` (the *left* roots, clustering at -1).
Each side is solved as ``L`` (resp. ``N``) independent scalar equations,
one per branch of an N-th (resp. (L-N)-th) root of zhat:

    right:  (-w/rho) ((w+1)/(1-rho))^((L-N)/N)  = exp((Log zhat + 2 pi i m)/N)
    left:   ((w+1)/(1-rho)) (-w/rho)^(N/(L-N))  = exp((Log zhat + 2 pi i m)/(L-N))

Both left-hand sides are conformal on their half-plane, so distinct branch
indices give distinct roots.  Newton's method on the logarithm of each
equation is seeded from the Gaussian asymptotics near the saddle ``-rho``
for small ``|m|`` and from the cluster points 0 / -1 for large ``|m|``.
"""

# =======
# Imports
# =======

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateZ, NonConvergence, PairingFailure, ScaleExceeded

__all__ = [
    'SystemShape',
    'root_defects',
    'RootSet',
    'FlatPairing',
    'MAX_RING_SIZE',
    'solve_bethe_roots',
    'flat_partner_map',
    'log_prod_left',
    'log_prod_right',
    'log_qprime_right',
    'log_zL',
    'polynomial_roots',
]

MAX_RING_SIZE = 4096
RESIDUAL_TOL = 1e-10
PAIRING_TOL = 1e-9

_TWO_PI = 2.0 * math.pi


# ============
# System shape
# ============

@dataclass(frozen=True)
class SystemShape:
    """
    Ring of ``L`` sites carrying ``N`` particles.

    Parameters
    ----------
    L : int
        Number of sites.
    N : int
        Number of particles, ``1 <= N < L``.
    """

    L: int
    N: int

    def __post_init__(self):
        L, N = self.L, self.N
        if int(L) != L or int(N) != N:
            raise ValueError('L and N must be integers')
        object.__setattr__(self, 'L', int(L))
        object.__setattr__(self, 'N', int(N))
        if not 1 <= self.N < self.L:
            raise ValueError(f'need 1 <= N < L, got L={L}, N={N}')

    @property
    def rho_exact(self) -> Fraction:
        return Fraction(self.N, self.L)

    @property
    def rho(self) -> float:
        return self.N / self.L

    @property
    def r0(self) -> float:
        rho = self.rho
        return math.exp(rho * math.log(rho) + (1.0 - rho) * math.log1p(-rho))


def log_zL(shape: SystemShape, zhat) -> complex:
    """
    Logarithm of ``z^L = (-1)^N r0^L zhat``, reduced modulo ``2 pi i``.

    Only ever used inside an exponential or modulo ``2 pi i``, so the branch
    choice is irrelevant; the value itself never underflows.
    """
    L, N = shape.L, shape.N
    rho = shape.rho
    val = (N * math.log(rho) + (L - N) * math.log1p(-rho)
           + np.log(complex(zhat)) + 1j * math.pi * (N % 2))
    return complex(val.real, _wrap(val.imag))


def _wrap(x):
    """Reduce an angle to ``(-pi, pi]``."""
    return x - _TWO_PI * np.round(x / _TWO_PI)


# ========
# Root set
# ========

@dataclass(frozen=True)
class RootSet:
    """
    Roots of ``q_z`` split by the vertical line ``Re(w) = -rho``.

    Attributes
    ----------
    shape : SystemShape
    zhat : complex
        Normalized spectral parameter.
    left : numpy.ndarray
        ``L - N`` roots with ``Re(w) < -rho``, ordered by branch index.
    right : numpy.ndarray
        ``N`` roots with ``Re(w) > -rho``, ordered by branch index.
    residual : float
        Largest normalized defect ``|(-w/rho)^N ((w+1)/(1-rho))^(L-N) - zhat|``.
    """

    shape: SystemShape
    zhat: complex
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    residual: float = 0.0
    left_index: np.ndarray = field(default=None, repr=False)
    right_index: np.ndarray = field(default=None, repr=False)

    @property
    def all(self) -> np.ndarray:
        return np.concatenate([self.left, self.right])


def _branch_indices(n):
    # centred range of n consecutive integers: -(n-1)//2, ..., n//2
    return np.arange(n) - (n - 1) // 2


# -------------------
# log residual (side)
# -------------------

def _log_residual(w, lam, side, rho, alpha):
    """
    Reduced logarithmic defect of one branch equation and its derivative.

    For the right side ``g(w) = Log(-w/rho) + alpha Log((w+1)/(1-rho))``,
    for the left side ``g(w) = Log((w+1)/(1-rho)) + alpha Log(-w/rho)``.
    The returned residual is ``g(w) - lam`` with the imaginary part wrapped
    into ``(-pi, pi]``, which is analytic near any root.
    """
    a = np.log(-w / rho)
    b = np.log((w + 1.0) / (1.0 - rho))
    if side == 'right':
        g = a + alpha * b
        dg = 1.0 / w + alpha / (w + 1.0)
    else:
        g = b + alpha * a
        dg = 1.0 / (w + 1.0) + alpha / w
    r = g - lam
    r = r.real + 1j * _wrap(r.imag)
    return r, dg


def _in_half_plane(w, side, rho):
    if side == 'right':
        return w.real > -rho
    return w.real < -rho


def _newton(w, lam, side, rho, alpha, max_iter=100, tol=1e-15):
    """
    Damped Newton iteration, vectorized over branches.

    A step is halved until it reduces the residual and keeps the iterate in
    the proper half-plane.  Returns the iterates and a convergence mask.
    """
    w = np.array(w, dtype=complex)
    r, dg = _log_residual(w, lam, side, rho, alpha)
    res = np.abs(r)
    active = res > tol
    stall = np.zeros(w.shape, dtype=int)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        step = -r[idx] / dg[idx]
        wi = w[idx]
        res_i = res[idx]
        accepted = np.zeros(idx.size, dtype=bool)
        w_new = wi.copy()
        r_new = r[idx].copy()
        dg_new = dg[idx].copy()
        res_new = res_i.copy()
        lam_i = lam[idx]
        s = np.ones(idx.size)
        for _half in range(40):
            todo = ~accepted
            if not todo.any():
                break
            cand = wi[todo] + s[todo] * step[todo]
            rc, dgc = _log_residual(cand, lam_i[todo], side, rho, alpha)
            ok = (_in_half_plane(cand, side, rho) & np.isfinite(rc)
                  & (np.abs(rc) < res_i[todo] * (1.0 - 1e-4 * s[todo])
                     + 1e-15))
            t_idx = np.nonzero(todo)[0]
            acc_idx = t_idx[ok]
            w_new[acc_idx] = cand[ok]
            r_new[acc_idx] = rc[ok]
            dg_new[acc_idx] = dgc[ok]
            res_new[acc_idx] = np.abs(rc[ok])
            accepted[acc_idx] = True
            s[t_idx[~ok]] *= 0.5
        w[idx] = w_new
        r[idx] = r_new
        dg[idx] = dg_new
        # a step that could not be accepted means the iteration stalled at
        # rounding level; such branches are judged by the residual check
        stall[idx[~accepted]] += 1
        res[idx] = res_new
        active = (res > tol) & (stall < 2)
    return w, res


def _seeds(shape, zhat, side):
    L, N = shape.L, shape.N
    rho = shape.rho
    n = N if side == 'right' else L - N
    m = _branch_indices(n)
    logz = np.log(complex(zhat))
    lam = (logz + 1j * _TWO_PI * m) / n
    # Gaussian seed near the saddle -rho.  Locally
    #   N Log(-w/rho) + (L-N) Log((w+1)/(1-rho)) ~ -N (w+rho)^2 / (2 rho^2 (1-rho)),
    # so (w+rho) = rho sqrt(1-rho) xi / sqrt(N) with xi^2 = -2 (Log zhat + 2 pi i m).
    xi = np.sqrt(-2.0 * (logz + 1j * _TWO_PI * m))
    scale = rho * math.sqrt(1.0 - rho) / math.sqrt(N)
    if side == 'right':
        near = -rho + scale * xi
        far = -rho * np.exp(lam)
    else:
        near = -rho - scale * xi
        far = -1.0 + (1.0 - rho) * np.exp(lam)
    return m, lam, near, far


def _alpha(shape, side):
    L, N = shape.L, shape.N
    return (L - N) / N if side == 'right' else N / (L - N)


def _solve_side(shape, zhat, side):
    rho = shape.rho
    alpha = _alpha(shape, side)
    m, lam, near, far = _seeds(shape, zhat, side)
    # choose the seed with the smaller starting residual when it lies in the
    # correct half-plane
    r_near, _ = _log_residual(near, lam, side, rho, alpha)
    r_far, _ = _log_residual(far, lam, side, rho, alpha)
    bad_near = ~_in_half_plane(near, side, rho) | ~np.isfinite(r_near)
    bad_far = ~_in_half_plane(far, side, rho) | ~np.isfinite(r_far)
    use_near = (np.abs(r_near) <= np.abs(r_far)) & ~bad_near | bad_far
    w0 = np.where(use_near, near, far)
    w, res = _newton(w0, lam, side, rho, alpha)
    # the normalized defect is roughly |zhat| * n * |log residual|
    n = m.size
    scale = n * abs(complex(zhat))
    failed = ~(res * scale <= 0.1 * RESIDUAL_TOL)
    if failed.any():
        idx = np.nonzero(failed)[0]
        w_h, res_h = _homotopy(shape, zhat, side, m[idx])
        better = res_h < res[idx]
        w[idx[better]] = w_h[better]
        res[idx[better]] = res_h[better]
    return m, w, res


def _homotopy(shape, zhat, side, m):
    """
    Track branches ``m`` while the modulus of zhat grows from 0.05.

    Used only when the direct Newton solve fails.  The track starts from the
    far seed, which is accurate for small ``|zhat|``, and is refined
    adaptively if an intermediate Newton solve does not converge.
    """
    rho = shape.rho
    alpha = _alpha(shape, side)
    n = shape.N if side == 'right' else shape.L - shape.N
    target = abs(complex(zhat))
    phase = np.angle(complex(zhat))
    start = min(0.05, 0.5 * target)
    w_out = np.empty(m.size, dtype=complex)
    res_out = np.empty(m.size)
    for i, mi in enumerate(np.atleast_1d(m)):
        def lam_at(mod):
            return np.array([(math.log(mod) + 1j * (phase + _TWO_PI * mi)) / n])
        lam0 = lam_at(start)
        if side == 'right':
            w = -rho * np.exp(lam0)
        else:
            w = -1.0 + (1.0 - rho) * np.exp(lam0)
        w, res = _newton(w, lam0, side, rho, alpha)
        s_log = np.linspace(math.log(start), math.log(target), 9)
        pos = 0
        cur = s_log[0]
        depth = 0
        while pos < len(s_log) - 1:
            nxt = s_log[pos + 1] if depth == 0 else cur + (s_log[pos + 1] - cur) / 2 ** depth
            w_try, res_try = _newton(w.copy(), lam_at(math.exp(nxt)), side, rho, alpha)
            if res_try[0] <= 1e-12:
                w, res, cur = w_try, res_try, nxt
                if abs(cur - s_log[pos + 1]) < 1e-15:
                    pos += 1
                    depth = 0
            else:
                depth += 1
                if depth > 30:
                    break
        w_out[i] = w[0]
        res_out[i] = res[0]
    return w_out, res_out


def _normalized_defect(w, shape, zhat):
    """``|(-w/rho)^N ((w+1)/(1-rho))^(L-N) - zhat|`` evaluated in log form."""
    L, N = shape.L, shape.N
    rho = shape.rho
    logz = np.log(complex(zhat))
    g = N * np.log(-w / rho) + (L - N) * np.log((w + 1.0) / (1.0 - rho)) - logz
    g = g.real + 1j * _wrap(g.imag)
    return np.abs(complex(zhat)) * np.abs(np.expm1(g))


def root_defects(roots: RootSet) -> np.ndarray:
    """Normalized defect of every root, in the order of :attr:`RootSet.all`."""
    return _normalized_defect(roots.all, roots.shape, roots.zhat)


# =================
# solve bethe roots
# =================

def solve_bethe_roots(shape: SystemShape, zhat: complex,
                      max_size: int = MAX_RING_SIZE) -> RootSet:
    """
    Solve for all ``L`` roots of ``w^N (w+1)^(L-N) = (-1)^N r0^L zhat``.

    Parameters
    ----------
    shape : SystemShape
        Ring size and particle number.
    zhat : complex
        Normalized spectral parameter with ``0 < |zhat| < 1``.
    max_size : int, default=4096
        Largest accepted ring size.

    Returns
    -------
    RootSet
        Left and right roots ordered by branch index.

    Raises
    ------
    DegenerateZ
        If ``|zhat|`` is not in ``(0, 1)``.
    ScaleExceeded
        If ``L > max_size``.
    NonConvergence
        If some branch cannot be solved to the residual tolerance.

    Examples
    --------
    >>> rs = solve_bethe_roots(SystemShape(4, 2), 0.5)
    >>> len(rs.left), len(rs.right)
    (2, 2)
    """
    zhat = complex(zhat)
    mod = abs(zhat)
    if not (0.0 < mod < 1.0) or not math.isfinite(mod):
        raise DegenerateZ(f'|zhat| must lie in (0, 1), got {mod!r}')
    if shape.L > max_size:
        raise ScaleExceeded(f'L={shape.L} exceeds the maximum {max_size}')

    rho = shape.rho
    m_r, right, _ = _solve_side(shape, zhat, 'right')
    m_l, left, _ = _solve_side(shape, zhat, 'left')

    res_r = _normalized_defect(right, shape, zhat)
    res_l = _normalized_defect(left, shape, zhat)
    residual = float(max(res_r.max(initial=0.0), res_l.max(initial=0.0)))
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        bad = np.concatenate([m_r[~(res_r <= RESIDUAL_TOL)],
                              m_l[~(res_l <= RESIDUAL_TOL)]])
        raise NonConvergence(
            f'root residual {residual:.3e} exceeds {RESIDUAL_TOL:g} '
            f'(L={shape.L}, N={shape.N}, zhat={zhat}, branches {bad.tolist()})')
    if not (np.all(right.real > -rho) and np.all(left.real < -rho)):
        raise NonConvergence('root landed on the wrong side of Re(w) = -rho')
    _check_distinct(np.concatenate([left, right]))

    return RootSet(shape=shape, zhat=zhat, left=left, right=right,
                   residual=residual, left_index=m_l, right_index=m_r)


def _check_distinct(w):
    if w.size < 2:
        return
    order = np.lexsort((w.imag, w.real))
    ws = w[order]
    # cheap screen on sorted neighbours, then an exact check when suspicious
    gaps = np.abs(np.diff(ws))
    if gaps.min() > 1e-9:
        return
    d = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(d, np.inf)
    if d.min() < 1e-9:
        raise NonConvergence('two branches converged to the same root')


# ================
# flat partner map
# ================

@dataclass(frozen=True)
class FlatPairing:
    """
    Pairing between left and right roots for the flat case ``L = d N``.

    Attributes
    ----------
    partner : numpy.ndarray
        ``partner[i]`` is the index into ``roots.right`` of ``V(left[i])``.
    preimages : tuple of numpy.ndarray
        ``preimages[j]`` lists the indices of left roots ``u`` with
        ``V(u) = right[j]``; each has ``d - 1`` entries.
    """

    d: int
    partner: np.ndarray
    preimages: tuple


def _flat_invariant(w, rho, d):
    # (-w/rho) ((w+1)/(1-rho))^(d-1): the normalized version of w (w+1)^(d-1)
    return (-w / rho) * ((w + 1.0) / (1.0 - rho)) ** (d - 1)


def flat_partner_map(roots: RootSet, d: int, tol: float = PAIRING_TOL) -> FlatPairing:
    """
    Match every left root with the right root sharing ``w (w+1)^(d-1)``.

    Parameters
    ----------
    roots : RootSet
        Roots of a system with ``L = d N``.
    d : int
        Spacing of the flat configuration.
    tol : float, default=1e-9
        Match tolerance on the normalized invariant.

    Raises
    ------
    PairingFailure
        If some left root has no match or more than one, or a right root
        does not receive exactly ``d - 1`` partners.
    """
    shape = roots.shape
    if shape.L != d * shape.N:
        raise PairingFailure(f'flat pairing needs L = d N, got L={shape.L}, '
                             f'N={shape.N}, d={d}')
    rho = shape.rho
    iu = _flat_invariant(roots.left, rho, d)
    iv = _flat_invariant(roots.right, rho, d)
    dist = np.abs(iu[:, None] - iv[None, :])
    close = dist <= tol
    counts = close.sum(axis=1)
    if np.any(counts != 1):
        bad = int(np.nonzero(counts != 1)[0][0])
        raise PairingFailure(
            f'left root {roots.left[bad]} has {counts[bad]} partners '
            f'(nearest distance {dist[bad].min():.3e})')
    partner = np.argmax(close, axis=1)
    preimages = tuple(np.nonzero(partner == j)[0] for j in range(shape.N))
    if any(p.size != d - 1 for p in preimages):
        raise PairingFailure('right roots do not each receive d-1 partners')
    return FlatPairing(d=d, partner=partner, preimages=preimages)


# =============
# log products
# =============

def log_prod_right(roots: RootSet, w):
    """
    ``sum_v Log(w - v)`` over right roots, principal log per factor.

    Accepts a scalar or an array of evaluation points.
    """
    w_arr = np.asarray(w, dtype=complex)
    out = np.log(w_arr[..., None] - roots.right).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def log_prod_left(roots: RootSet, w):
    """
    ``sum_u Log(w - u)`` over left roots, principal log per factor.
    """
    w_arr = np.asarray(w, dtype=complex)
    out = np.log(w_arr[..., None] - roots.left).sum(axis=-1)
    return complex(out) if out.ndim == 0 else out


def log_qprime_right(roots: RootSet, v=None, log_left=None):
    """
    Logarithm of ``q_right'(v)`` at right roots ``v``.

    Uses ``q_right'(v) = L v^(N-1) (v+1)^(L-N-1) (v+rho) / q_left(v)`` together
    with ``v^N (v+1)^(L-N) = z^L`` so that no large power is formed.  The
    result is determined modulo ``2 pi i``.

    Parameters
    ----------
    roots : RootSet
    v : array_like, optional
        Right roots to evaluate at (defaults to all of them).
    log_left : array_like, optional
        Precomputed ``log_prod_left(roots, v)``.
    """
    shape = roots.shape
    v = roots.right if v is None else np.asarray(v, dtype=complex)
    if log_left is None:
        log_left = log_prod_left(roots, v)
    return (math.log(shape.L) + log_zL(shape, roots.zhat) - np.log(v)
            - np.log(v + 1.0) + np.log(v + shape.rho) - log_left)


# ==================
# small-ring solver
# ==================

def polynomial_roots(shape: SystemShape, zhat: complex) -> np.ndarray:
    """
    All roots of ``q_z`` for a small ring and any ``zhat`` with ``|zhat| != 1``.

    Companion-matrix roots of the expanded polynomial, polished by Newton
    steps.  Only meant for ``L <= 20`` where the binomial coefficients are
    harmless; unlike :func:`solve_bethe_roots` it accepts ``|zhat| > 1``.
    """
    L, N = shape.L, shape.N
    if L > 40:
        raise ScaleExceeded(f'polynomial_roots is limited to small rings, got L={L}')
    zhat = complex(zhat)
    if zhat == 0 or abs(abs(zhat) - 1.0) < 1e-12:
        raise DegenerateZ(f'zhat={zhat} gives a repeated root')
    zL = np.exp(log_zL(shape, zhat))
    coeffs = np.zeros(L + 1, dtype=complex)
    for j in range(L - N + 1):
        coeffs[N + j] = math.comb(L - N, j)
    coeffs[0] -= zL
    w = np.roots(coeffs[::-1])
    for _ in range(4):
        f = w ** N * (w + 1.0) ** (L - N) - zL
        fp = w ** (N - 1) * (w + 1.0) ** (L - N - 1) * (L * w + N)
        w = w - f / fp
    _check_distinct(w)
    return w

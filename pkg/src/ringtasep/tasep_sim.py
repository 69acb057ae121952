"""
Continuous-time Monte Carlo of the TASEP on a ring.

Each trajectory is simulated with the equal-rate Gillespie scheme: the
waiting time is exponential with rate equal to the number of mobile
particles and the particle that jumps is uniform among them.  Positions are
kept in the lifted coordinate, so a particle that winds around the ring
keeps moving to the right, and every jump is also recorded on the bond it
crosses.

Trajectories run in parallel under numba.  Every sample reseeds the
generator of the thread that runs it from a seed derived from
``(seed, sample_index)``, so the output does not depend on how samples are
distributed over threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from numba import njit, prange
from scipy.stats import binomtest

from .errors import ShapeMismatch
from .finite_time.configuration import (Configuration, flat_configuration,
                                        step_configuration)
from .ring_bethe import SystemShape

__all__ = ['RingState', 'SimConfig', 'EnsembleResult', 'CdfTable',
           'init_state', 'run_until', 'tagged_displacement', 'current',
           'simulate_ensemble', 'ensemble_cdf', 'sample_seeds',
           'duality_violations', 'CHECK_EVERY', 'THREADS_ENV']

CHECK_EVERY = 1 << 10
THREADS_ENV = 'RINGTASEP_THREADS'

if 'NUMBA_THREADING_LAYER' not in os.environ:
    # the portable layer; results never depend on the choice
    numba.config.THREADING_LAYER = 'workqueue'


# ============
# numba kernel
# ============

@njit(cache=True)
def _setup(x, L, occ, mobile, where):
    N = x.size
    occ[:] = -1
    for j in range(N):
        occ[x[j] % L] = j
    count = 0
    where[:] = -1
    for j in range(N):
        if occ[(x[j] + 1) % L] == -1:
            mobile[count] = j
            where[j] = count
            count += 1
    return count


@njit(cache=True)
def _add(j, mobile, where, count):
    if where[j] == -1:
        mobile[count] = j
        where[j] = count
        count += 1
    return count


@njit(cache=True)
def _remove(j, mobile, where, count):
    i = where[j]
    if i != -1:
        last = mobile[count - 1]
        mobile[i] = last
        where[last] = i
        where[j] = -1
        count -= 1
    return count


@njit(cache=True)
def _consistent(x, L, occ, where, count):
    N = x.size
    for j in range(N - 1):
        if x[j + 1] - x[j] < 1:
            return False
    if x[0] + L - x[N - 1] < 1:
        return False
    n_mobile = 0
    for j in range(N):
        free = occ[(x[j] + 1) % L] == -1
        if free:
            n_mobile += 1
        if free != (where[j] != -1):
            return False
    return n_mobile == count


@njit(cache=True)
def _evolve(x, J, clock, t, L, occ, mobile, where, count):
    """Advance one trajectory in place; returns (clock, events, ok)."""
    events = 0
    while True:
        u = np.random.random()
        dt = -np.log1p(-u) / count
        if clock + dt > t:
            return t, events, True
        clock += dt
        j = mobile[int(np.random.random() * count)]
        s = x[j] % L
        s1 = (s + 1) % L
        occ[s] = -1
        occ[s1] = j
        x[j] += 1
        J[s] += 1
        events += 1
        # the jumper is blocked if the next site is taken
        if occ[(s1 + 1) % L] != -1:
            count = _remove(j, mobile, where, count)
        # whoever sits behind the vacated site can now move
        p = occ[(s - 1) % L]
        if p != -1:
            count = _add(p, mobile, where, count)
        if events % CHECK_EVERY == 0:
            if not _consistent(x, L, occ, where, count):
                return clock, events, False


@njit(cache=True, parallel=True)
def _ensemble(x0, L, t, seeds, X, J, ok):
    S = seeds.size
    N = x0.size
    for i in prange(S):
        np.random.seed(seeds[i])
        x = x0.copy()
        occ = np.empty(L, np.int64)
        mobile = np.empty(N, np.int64)
        where = np.empty(N, np.int64)
        count = _setup(x, L, occ, mobile, where)
        Ji = np.zeros(L, np.int64)
        _, _, good = _evolve(x, Ji, 0.0, t, L, occ, mobile, where, count)
        X[i, :] = x
        J[i, :] = Ji
        ok[i] = good


@njit(cache=True)
def _jmax(y0, L, b):
    N = y0.size
    best = -(1 << 62)
    for r in range(N):
        q = (b - 1 - y0[r]) // L
        v = r + 1 + q * N
        if v > best:
            best = v
    return best


@njit(cache=True, parallel=True)
def _duality(y0, L, X, J, out):
    S, N = X.shape
    for i in prange(S):
        bad = 0
        for k in range(1, N + 1):
            xk0 = y0[k - 1]
            xkt = X[i, k - 1]
            for b in range(xk0 + 1, xkt + L + 1):
                lhs = xkt >= b
                rhs = J[i, (b - 1) % L] >= _jmax(y0, L, b) - k + 1
                if lhs != rhs:
                    bad += 1
        out[i] = bad


# =============
# Python facade
# =============

@dataclass
class RingState:
    """
    One trajectory: lifted positions, bond currents and the clock.

    ``currents[s]`` counts jumps from ring site ``s`` to ``s + 1 (mod L)``.
    """

    shape: SystemShape
    initial: np.ndarray
    positions: np.ndarray
    currents: np.ndarray
    clock: float = 0.0
    events: int = 0

    @property
    def occupancy(self) -> np.ndarray:
        occ = np.zeros(self.shape.L, dtype=bool)
        occ[self.positions % self.shape.L] = True
        return occ

    @property
    def jump_counts(self) -> np.ndarray:
        return self.positions - self.initial


@dataclass(frozen=True)
class SimConfig:
    """
    Ensemble settings.

    ``threads`` is a hint only; ``None`` falls back to the
    ``RINGTASEP_THREADS`` environment variable and then to numba's default.
    """

    seed: int = 0
    samples: int = 10_000
    threads: Optional[int] = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError('samples must be positive')
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError('seed must be a 64-bit unsigned integer')


def _initial(ic, shape: SystemShape, d: Optional[int] = None) -> Configuration:
    if isinstance(ic, Configuration):
        return ic
    if ic == 'flat':
        if shape.L % shape.N:
            raise ShapeMismatch(
                f'flat start needs L = d N, got L={shape.L}, N={shape.N}')
        return flat_configuration(shape.L // shape.N, shape.N)
    if ic == 'step':
        return step_configuration(shape.L, shape.N)
    raise ValueError(f'unknown initial condition {ic!r}')


def init_state(ic, shape: SystemShape) -> RingState:
    """Fresh trajectory at time zero; ``ic`` is ``'flat'``, ``'step'`` or a Configuration."""
    y = _initial(ic, shape).as_array()
    return RingState(shape, y.copy(), y.copy(),
                     np.zeros(shape.L, dtype=np.int64))


def run_until(state: RingState, t: float, rng: np.random.Generator) -> RingState:
    """
    Advance a single trajectory to time ``t`` (a pure-Python reference loop).

    This path draws from a numpy ``Generator`` and is meant for small,
    inspectable runs; ensembles go through :func:`simulate_ensemble`.
    """
    if t < state.clock:
        raise ValueError(f'cannot run backwards from {state.clock} to {t}')
    L = state.shape.L
    x = state.positions
    occ = np.full(L, -1, dtype=np.int64)
    occ[x % L] = np.arange(x.size)
    while True:
        mobile = np.flatnonzero(occ[(x + 1) % L] == -1)
        dt = rng.exponential(1.0 / mobile.size)
        if state.clock + dt > t:
            state.clock = t
            return state
        state.clock += dt
        j = mobile[rng.integers(mobile.size)]
        s = x[j] % L
        occ[s], occ[(s + 1) % L] = -1, j
        x[j] += 1
        state.currents[s] += 1
        state.events += 1


def tagged_displacement(state: RingState, k: int) -> int:
    """``x_k(t) - x_k(0)`` in the lift, i.e. the number of jumps of particle ``k``."""
    if not 1 <= k <= state.shape.N:
        raise ValueError(f'k must satisfy 1 <= k <= N, got {k}')
    return int(state.positions[k - 1] - state.initial[k - 1])


def current(state: RingState, m: int) -> int:
    """Jumps across the bond ``(m, m+1)``; ``m`` is taken modulo ``L``."""
    return int(state.currents[m % state.shape.L])


def sample_seeds(seed: int, samples: int) -> np.ndarray:
    """
    Per-sample 32-bit seeds, each drawn from ``SeedSequence((seed, i))``.

    The seed of sample ``i`` depends on nothing but ``seed`` and ``i``.
    """
    out = np.empty(samples, dtype=np.uint32)
    for i in range(samples):
        out[i] = np.random.SeedSequence((seed, i)).generate_state(1)[0]
    return out


def _resolve_threads(threads):
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else None
    if threads is not None:
        limit = numba.config.NUMBA_NUM_THREADS
        numba.set_num_threads(max(1, min(int(threads), limit)))


@dataclass
class EnsembleResult:
    """
    Final states of an ensemble.

    Attributes
    ----------
    shape : SystemShape
    initial : numpy.ndarray
        Initial lifted positions.
    t : float
    positions : numpy.ndarray
        ``(samples, N)`` lifted positions at time ``t``.
    currents : numpy.ndarray
        ``(samples, L)`` bond currents indexed by ring site.
    """

    shape: SystemShape
    initial: np.ndarray
    t: float
    positions: np.ndarray
    currents: np.ndarray

    @property
    def samples(self) -> int:
        return self.positions.shape[0]

    def observable(self, spec: str) -> np.ndarray:
        """
        Values of ``'tagged:K'`` (position ``x_K(t)``) or ``'current:M'``
        (``J_M(t)``, ``M`` in the step labelling, taken modulo ``L``).
        """
        kind, _, arg = spec.partition(':')
        try:
            idx = int(arg)
        except ValueError:
            raise ValueError(f'bad observable {spec!r}') from None
        if kind == 'tagged':
            if not 1 <= idx <= self.shape.N:
                raise ValueError(f'tagged index must lie in 1..{self.shape.N}')
            return self.positions[:, idx - 1]
        if kind == 'current':
            return self.currents[:, idx % self.shape.L]
        raise ValueError(f'bad observable {spec!r}; use tagged:K or current:M')


def simulate_ensemble(ic, shape: SystemShape, t: float,
                      config: SimConfig = SimConfig()) -> EnsembleResult:
    """
    Run ``config.samples`` independent trajectories up to time ``t``.

    Raises
    ------
    RuntimeError
        If a periodic consistency check fails inside a trajectory.
    """
    if t < 0:
        raise ValueError(f't must be non-negative, got {t}')
    y0 = _initial(ic, shape).as_array()
    _resolve_threads(config.threads)
    S = config.samples
    X = np.empty((S, shape.N), dtype=np.int64)
    J = np.empty((S, shape.L), dtype=np.int64)
    ok = np.empty(S, dtype=np.bool_)
    _ensemble(y0, shape.L, float(t), sample_seeds(config.seed, S), X, J, ok)
    if not ok.all():
        raise RuntimeError(f'{int((~ok).sum())} trajectories broke exclusion')
    return EnsembleResult(shape, y0, float(t), X, J)


def duality_violations(result: EnsembleResult) -> np.ndarray:
    """
    Per-trajectory count of failures of the particle/current duality.

    For every particle ``k`` and every threshold ``b`` from ``x_k(0) + 1`` to
    ``x_k(t) + L`` the event ``x_k(t) >= b`` is compared with
    ``J_{(b-1) mod L}(t) >= J(b) - k + 1``, where ``J(b)`` is the largest
    lifted particle index starting at or left of ``b - 1``.
    """
    out = np.empty(result.samples, dtype=np.int64)
    _duality(result.initial, result.shape.L, result.positions,
             result.currents, out)
    return out


@dataclass
class CdfTable:
    threshold: np.ndarray
    prob: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    samples: int

    def rows(self):
        for i in range(self.threshold.size):
            yield (int(self.threshold[i]), float(self.prob[i]),
                   float(self.ci_low[i]), float(self.ci_high[i]), self.samples)


def ensemble_cdf(values, thresholds) -> CdfTable:
    """
    Empirical ``P(value >= a)`` per threshold with Wilson 95% intervals.

    Parameters
    ----------
    values : array_like of int
        One observable value per trajectory.
    thresholds : array_like of int
    """
    values = np.sort(np.asarray(values))
    n = values.size
    if n < 100:
        raise ValueError(f'need at least 100 samples, got {n}')
    thr = np.asarray(thresholds, dtype=np.int64)
    hits = n - np.searchsorted(values, thr, side='left')
    lo = np.empty(thr.size)
    hi = np.empty(thr.size)
    for i, h in enumerate(hits):
        ci = binomtest(int(h), n).proportion_ci(0.95, method='wilson')
        lo[i], hi[i] = ci.low, ci.high
    return CdfTable(thr, hits / n, lo, hi, n)

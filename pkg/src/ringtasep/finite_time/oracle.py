"""
Brute-force reference: the Kolmogorov forward equation on a truncated state
space, solved by uniformization.

States are lifted configurations reachable from ``Y`` with total displacement
at most ``K``.  With uniformization rate ``Lambda = N`` every jump consumes one
event of a Poisson(``N t``) clock, so truncating both the event count and the
displacement at the ``1e-12`` upper quantile of that Poisson law loses at most
``1e-12`` of probability mass.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy import sparse
from scipy.stats import poisson

from ..errors import NegativeTime, TruncationOverflow
from .configuration import Configuration

__all__ = ['generator_oracle', 'poisson_cutoff', 'STATE_CAP']

STATE_CAP = 200_000
TAIL_TOL = 1e-12


def poisson_cutoff(mean: float, tail: float = TAIL_TOL) -> int:
    """Smallest ``J`` with ``P(Poisson(mean) > J) < tail``."""
    if mean <= 0:
        return 0
    J = int(poisson.isf(tail, mean))
    while poisson.sf(J, mean) >= tail:
        J += 1
    return J


def _enumerate(y, L, kmax, cap):
    N = len(y)
    start = tuple(int(p) for p in y)
    index = {start: 0}
    states = [start]
    rows, cols = [], []
    queue = deque([(start, 0)])
    while queue:
        x, disp = queue.popleft()
        src = index[x]
        for i in range(N):
            nxt = x[i + 1] if i + 1 < N else x[0] + L
            if x[i] + 1 >= nxt:
                continue
            if disp + 1 > kmax:
                continue
            new = x[:i] + (x[i] + 1,) + x[i + 1:]
            dst = index.get(new)
            if dst is None:
                dst = len(states)
                if dst >= cap:
                    raise TruncationOverflow(
                        f'more than {cap} states within displacement {kmax}')
                index[new] = dst
                states.append(new)
                queue.append((new, disp + 1))
            rows.append(src)
            cols.append(dst)
    return states, np.asarray(rows), np.asarray(cols)


def generator_oracle(Y: Configuration, t: float, cap: int = STATE_CAP) -> dict:
    """
    Law of the configuration at time ``t`` started from ``Y``.

    Parameters
    ----------
    Y : Configuration
    t : float
        Time, non-negative.
    cap : int, default=200000
        Largest admissible number of states.

    Returns
    -------
    dict
        Maps position tuples to probabilities.  Entries below ``1e-300`` are
        dropped.

    Raises
    ------
    TruncationOverflow
        If the truncated state space exceeds ``cap``.
    """
    if t < 0:
        raise NegativeTime(f't must be non-negative, got {t}')
    y = Y.positions
    if t == 0:
        return {tuple(y): 1.0}
    N, L = Y.shape.N, Y.shape.L
    lam = float(N)
    J = poisson_cutoff(lam * t)
    states, rows, cols = _enumerate(y, L, J, cap)
    n = len(states)
    # uniformized one-step kernel, applied to row vectors: p <- p + p Q / lam
    out_rate = np.zeros(n)
    # every allowed jump counts toward the exit rate, including jumps that
    # leave the truncated region (their mass is simply lost)
    for s, x in enumerate(states):
        for i in range(N):
            nxt = x[i + 1] if i + 1 < N else x[0] + L
            if x[i] + 1 < nxt:
                out_rate[s] += 1.0
    T = sparse.csr_matrix((np.ones(rows.size) / lam, (cols, rows)), shape=(n, n))
    stay = 1.0 - out_rate / lam

    p = np.zeros(n)
    p[0] = 1.0
    weights = poisson.pmf(np.arange(J + 1), lam * t)
    acc = weights[0] * p
    for j in range(1, J + 1):
        p = stay * p + T @ p
        acc += weights[j] * p
    return {states[s]: float(acc[s]) for s in range(n) if acc[s] > 1e-300}

"""Particle configurations on the ring in winding-lifted coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch
from ..ring_bethe import SystemShape

__all__ = ['Configuration', 'flat_configuration', 'step_configuration']


@dataclass(frozen=True)
class Configuration:
    """
    Ordered positions ``x_1 < ... < x_N < x_1 + L``.

    Positions are integers in the lifted coordinate: a particle that has
    travelled once around the ring is ``L`` further to the right.
    """

    positions: tuple
    shape: SystemShape

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        object.__setattr__(self, 'positions', pos)
        if len(pos) != self.shape.N:
            raise ShapeMismatch(
                f'{len(pos)} positions given for N={self.shape.N}')
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ShapeMismatch(f'positions not strictly increasing: {pos}')
        if pos[-1] >= pos[0] + self.shape.L:
            raise ShapeMismatch(
                f'positions {pos} wrap past x_1 + L with L={self.shape.L}')

    @classmethod
    def from_positions(cls, positions, L: int):
        positions = tuple(positions)
        return cls(positions, SystemShape(L, len(positions)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.int64)

    def __len__(self):
        return len(self.positions)


def flat_configuration(d: int, N: int) -> Configuration:
    """``(d, 2d, ..., N d)`` on a ring of ``L = d N`` sites."""
    return Configuration(tuple(d * j for j in range(1, N + 1)),
                         SystemShape(d * N, N))


def step_configuration(L: int, N: int) -> Configuration:
    """``(-N+1, ..., -1, 0)``: a packed block ending at the origin."""
    return Configuration(tuple(range(-N + 1, 1)), SystemShape(L, N))

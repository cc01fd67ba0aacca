"""
Evolved state of the v ≡ 0 sector.

Only (a, c) are stepped; b is recovered from them whenever needed.
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from numerics.field import Field, Grid1D


@dataclass(frozen=True)
class State:
    """The pair (a, c) at time t, both on one grid."""

    t: float
    a: Field
    c: Field

    def __post_init__(self) -> None:
        if self.a.grid != self.c.grid:
            raise ValueError('a and c live on different grids')
        object.__setattr__(self, 't', float(self.t))

    @property
    def grid(self) -> Grid1D:
        return self.a.grid

    @classmethod
    def zeros(cls, grid: Grid1D, t: float = 0.0) -> 'State':
        return cls(t, Field.zeros(grid), Field.zeros(grid))

    @classmethod
    def from_stacked(cls, t: float, values: np.ndarray, grid: Grid1D) -> 'State':
        return cls(t, Field(grid, values[0]), Field(grid, values[1]))

    def stacked(self) -> np.ndarray:
        """(2, n) array with a in row 0 and c in row 1."""
        return np.vstack([self.a.values, self.c.values])

    def swapped(self) -> 'State':
        """(a, c) -> (c, a), the partner of t -> -t."""
        return State(self.t, self.c, self.a)

    def sup_norms(self) -> dict:
        return {'a': self.a.sup(), 'c': self.c.sup()}


@dataclass(frozen=True)
class Rhs:
    """Time derivatives of a and c."""

    da_dt: Field
    dc_dt: Field

    def __post_init__(self) -> None:
        if self.da_dt.grid != self.dc_dt.grid:
            raise ValueError('da_dt and dc_dt live on different grids')


@dataclass(frozen=True)
class Snapshot:
    """A state together with the b recovered from it."""

    state: State
    b: Field

    @property
    def t(self) -> float:
        return self.state.t


Trajectory = List[Snapshot]

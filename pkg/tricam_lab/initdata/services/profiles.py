"""
Admissible initial data.

Each named profile returns a nonnegative pair (u0, w0) of compactly
concentrated momenta; lift_initial turns a momentum into the evolved
potential through G₁.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from config import settings
from numerics.exceptions import InvalidParameterError, OutOfDomainError
from numerics.field import Field, Grid1D, ensure_finite
from numerics.kernels import BackendLike, conv_g1
from initdata.services.mollifier import bump_field, check_index
from initdata.services.peakons import PeakonParams, smoothed_peakon_density

logger = logging.getLogger('numerics')


@dataclass(frozen=True)
class ProfileParams:
    """
    Knobs shared by the profile constructors.
    u0 carries `amplitude` on every bump; w0 scales its first bump by w_ratio
    so the pair is not symmetric and b does not vanish.
    """

    amplitude: float = 1.0
    width: float = 1.0
    centre: float = 0.0
    separation: float = 4.0
    w_ratio: float = 0.5
    moll_n: int = settings.DEFAULT_MOLL_N
    seed: int = 0
    bumps: int = 4

    def validate(self) -> None:
        if not np.isfinite(self.amplitude) or self.amplitude < 0:
            raise InvalidParameterError(f'amplitude must be >= 0, got {self.amplitude}')
        if not np.isfinite(self.width) or self.width <= 0:
            raise InvalidParameterError(f'width must be > 0, got {self.width}')
        if not np.isfinite(self.separation) or self.separation < 0:
            raise InvalidParameterError(f'separation must be >= 0, got {self.separation}')
        if not np.isfinite(self.w_ratio) or self.w_ratio < 0:
            raise InvalidParameterError(f'w_ratio must be >= 0, got {self.w_ratio}')
        if int(self.bumps) != self.bumps or self.bumps < 1:
            raise InvalidParameterError(f'bumps must be a positive integer, got {self.bumps}')
        check_index(self.moll_n)

    def pair_positions(self) -> Tuple[float, float]:
        half = 0.5 * self.separation
        return self.centre - half, self.centre + half

    def to_dict(self) -> Dict:
        return asdict(self)


def _check_positions(grid: Grid1D, *positions: float) -> None:
    for x in positions:
        if not grid.contains(x):
            raise OutOfDomainError(f'Profile centre {x} lies outside [{grid.x_min}, {grid.x_max})')


def gaussian_bump(params: ProfileParams, grid: Grid1D) -> Tuple[Field, Field]:
    """u0 centred at `centre`, w0 half a separation to the right."""
    w_centre = params.centre + 0.5 * params.separation
    _check_positions(grid, params.centre, w_centre)

    def gaussian(centre, height):
        d = grid.nearest_image(grid.x, centre)
        return Field(grid, height * np.exp(-0.5 * (d / params.width) ** 2))

    return (
        gaussian(params.centre, params.amplitude),
        gaussian(w_centre, params.w_ratio * params.amplitude),
    )


def two_bump(params: ProfileParams, grid: Grid1D) -> Tuple[Field, Field]:
    """Two compact ρ bumps of half-width `width`; supports must not overlap."""
    left, right = params.pair_positions()
    _check_positions(grid, left, right)
    if params.separation < 2.0 * params.width:
        raise InvalidParameterError(
            f'two-bump supports overlap: separation {params.separation} < 2*width {2 * params.width}'
        )
    a = params.amplitude
    u0 = bump_field(grid, left, params.width, a) + bump_field(grid, right, params.width, a)
    w0 = (bump_field(grid, left, params.width, params.w_ratio * a)
          + bump_field(grid, right, params.width, a))
    return u0, w0


def smoothed_peakon(params: ProfileParams, grid: Grid1D) -> Tuple[Field, Field]:
    """Mollified momenta of a peakon pair, mass 2 per unit peak."""
    left, right = params.pair_positions()
    a = params.amplitude
    u_peaks = PeakonParams.of([(a, left), (a, right)], 'a')
    w_peaks = PeakonParams.of([(params.w_ratio * a, left), (a, right)], 'c')
    return (
        smoothed_peakon_density(u_peaks, params.moll_n, grid),
        smoothed_peakon_density(w_peaks, params.moll_n, grid),
    )


def random_bumps(params: ProfileParams, grid: Grid1D) -> Tuple[Field, Field]:
    """Seeded sums of ρ bumps kept away from the wrap point."""
    rng = np.random.default_rng(params.seed)
    margin = 0.25 * grid.length

    def draw() -> Field:
        total = Field.zeros(grid)
        for _ in range(int(params.bumps)):
            centre = rng.uniform(grid.x_min + margin, grid.x_max - margin)
            half_width = params.width * rng.uniform(0.5, 1.5)
            height = params.amplitude * rng.uniform(0.2, 1.0)
            total = total + bump_field(grid, centre, half_width, height)
        return total

    return draw(), draw()


PROFILES: Dict[str, Callable[[ProfileParams, Grid1D], Tuple[Field, Field]]] = {
    'gaussian-bump': gaussian_bump,
    'smoothed-peakon': smoothed_peakon,
    'two-bump': two_bump,
    'random-bumps': random_bumps,
}


def admissible_profiles(name: str, params: Optional[ProfileParams], grid: Grid1D) -> Tuple[Field, Field]:
    """Build (u0, w0) for a named profile."""
    if name not in PROFILES:
        raise InvalidParameterError(
            f'Unknown profile {name!r}; choose from {", ".join(PROFILES)}'
        )
    params = params or ProfileParams()
    params.validate()
    u0, w0 = PROFILES[name](params, grid)
    logger.info('Built %s profile on n=%d (mass u0=%.6g)', name, grid.n, np.sum(u0.values) * grid.dx)
    return u0, w0


def lift_initial(u0: Field, backend: BackendLike = None) -> Field:
    """a0 = G₁∗u0, the inverse of u = a - a_xx."""
    ensure_finite(u0, 'initial momentum')
    return conv_g1(u0, backend)

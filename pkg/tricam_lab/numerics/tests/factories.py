import factory
import numpy as np

from numerics.field import Field, Grid1D


def trig_polynomial(grid, seed, modes, offset):
    """Random real trig polynomial with 1/m decaying coefficients."""
    rng = np.random.default_rng(seed)
    values = np.full(grid.n, float(offset))
    for m in range(1, modes + 1):
        k = 2.0 * np.pi * m / grid.length
        a, b = rng.standard_normal(2) / m
        values += a * np.cos(k * grid.x) + b * np.sin(k * grid.x)
    return Field(grid, values)


def gaussian_field(grid, centre, width, height):
    return Field(grid, height * np.exp(-0.5 * ((grid.x - centre) / width) ** 2))


class GridFactory(factory.Factory):
    """Default lab grid, [-20, 20) with 1024 periodic samples."""

    class Meta:
        model = Grid1D

    x_min = -20.0
    x_max = 20.0
    n = 1024
    periodic = True


class SmoothFieldFactory(factory.Factory):
    """Random band-limited field, seeded so every instance is reproducible."""

    class Meta:
        model = trig_polynomial

    grid = factory.SubFactory(GridFactory)
    seed = factory.Sequence(lambda n: n)
    modes = 8
    offset = 0.0


class GaussianFieldFactory(factory.Factory):
    """Unit-width Gaussian bump somewhere near the middle of the grid."""

    class Meta:
        model = gaussian_field

    grid = factory.SubFactory(GridFactory)
    centre = factory.Faker('pyfloat', min_value=-3.0, max_value=3.0)
    width = 1.0
    height = factory.Faker('pyfloat', min_value=0.5, max_value=2.0)

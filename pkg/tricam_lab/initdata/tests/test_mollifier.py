import math

import numpy as np
import pytest

from initdata.services.mollifier import (
    bump,
    bump_transform,
    max_resolvable_index,
    mollification_error,
    mollifier,
    mollify,
)
from initdata.tests.factories import FineGridFactory
from numerics.exceptions import InvalidParameterError, OutOfDomainError, UnderResolvedSupportError
from numerics.field import Field, integrate, make_grid
from numerics.tests.factories import GaussianFieldFactory, GridFactory

CASCADE = (8, 16, 32, 64)


class TestBump:
    """Tests for the unnormalised bump."""

    def test_value_at_origin(self):
        assert bump(np.array([0.0]))[0] == pytest.approx(math.exp(-1.0))
        assert bump(np.array([0.0]))[0] == pytest.approx(0.367879, abs=1e-6)

    def test_zero_on_and_outside_unit_interval(self):
        assert np.all(bump(np.array([-1.0, 1.0, 1.5, -3.0])) == 0.0)

    def test_transform_at_zero_is_one(self):
        assert bump_transform(0.0)[0] == pytest.approx(1.0, abs=1e-14)

    def test_transform_bounded_by_mass(self):
        xi = np.linspace(0.0, 50.0, 101)
        assert np.all(np.abs(bump_transform(xi)) <= 1.0 + 1e-14)


class TestMollifier:
    """Tests for sampled ρₙ."""

    def setup_method(self):
        self.grid = GridFactory()

    @pytest.mark.parametrize('n', [1, 2, 4, 6])
    def test_unit_mass(self, n):
        assert integrate(mollifier(n, self.grid)) == pytest.approx(1.0, abs=1e-13)

    def test_compact_support(self):
        n = 4
        rho = mollifier(n, self.grid)
        outside = np.abs(self.grid.x) >= 1.0 / n
        assert np.all(rho.values[outside] == 0.0)
        assert np.all(rho.values[~outside] >= 0.0)

    def test_unit_mass_on_fine_grid(self):
        grid = FineGridFactory()
        for n in CASCADE:
            assert integrate(mollifier(n, grid)) == pytest.approx(1.0, abs=1e-13)

    def test_under_resolved_support_rejected(self):
        with pytest.raises(UnderResolvedSupportError):
            mollifier(8, self.grid)

    def test_resolvable_limit(self):
        assert max_resolvable_index(self.grid) == 6
        assert max_resolvable_index(FineGridFactory()) == 64

    def test_bad_index_rejected(self):
        with pytest.raises(InvalidParameterError):
            mollifier(0, self.grid)

    def test_centre_outside_rejected(self):
        with pytest.raises(OutOfDomainError):
            mollifier(2, self.grid, centre=25.0)

    def test_off_node_centre_keeps_unit_mass(self):
        rho = mollifier(4, self.grid, centre=0.3 * self.grid.dx)
        assert integrate(rho) == pytest.approx(1.0, abs=1e-13)


class TestMollify:
    """Tests for ρₙ∗f."""

    def setup_method(self):
        self.grid = GridFactory()

    def test_constant_preserved(self):
        out = mollify(Field.constant(self.grid, 1.0), 4)
        assert np.max(np.abs(out.values - 1.0)) < 1e-14

    def test_cosine_is_scaled(self):
        grid = make_grid(0.0, 8.0 * np.pi, 512)
        cos = np.cos(3.0 * grid.x)
        out = mollify(Field(grid, cos), 2).values
        factor = out[0]
        assert abs(factor) <= 1.0
        assert np.max(np.abs(out - factor * cos)) < 1e-12
        assert factor == pytest.approx(bump_transform(1.5)[0], abs=1e-3)

    def test_nonnegativity_and_mass(self):
        f = GaussianFieldFactory(grid=self.grid)
        out = mollify(f, 6)
        assert out.min() >= -1e-12
        assert integrate(out) == pytest.approx(integrate(f), abs=1e-10)

    def test_h1_error_decreases_along_cascade(self):
        grid = FineGridFactory()
        f = Field.from_function(grid, lambda x: np.exp(-0.5 * x ** 2))
        errors = [mollification_error(f, n).h1 for n in CASCADE]
        assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
        assert errors[-1] < 0.05 * errors[0]

    def test_error_reports_exponent(self):
        grid = FineGridFactory()
        f = Field.from_function(grid, lambda x: np.exp(-0.5 * x ** 2))
        result = mollification_error(f, 8, epsilon=0.5)
        assert result.p == 1.5
        assert result.l1 > 0.0 and result.lp > 0.0

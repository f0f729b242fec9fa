"""
Тесты первой собственной пары.
"""

from math import pi

import numpy as np
import pytest

from app.eigen import first_eigenpair, rayleigh
from app.exceptions import NoConvergence, ZeroField
from app.grid import build_grid


class TestFirstEigenpair:
    def test_laplacian_in_ball(self, fine_grid3):
        pair = first_eigenpair(fine_grid3, 2.0)
        assert pair.lambda1 == pytest.approx(pi**2, rel=1e-3)

    def test_laplacian_in_disk(self):
        pair = first_eigenpair(build_grid(1024, 3.0, 2), 2.0)
        # квадрат первого нуля J₀
        assert pair.lambda1 == pytest.approx(5.7832, rel=1e-2)

    def test_eigenfunction_normalization(self, grid3):
        phi = first_eigenpair(grid3, 2.0).phi1
        assert phi.sup_norm == pytest.approx(1.0)
        assert np.all(phi.interior > 0)
        assert phi.values[-1] == 0.0
        assert np.all(np.diff(phi.values) <= 0)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_pair_residual(self, grid3, p):
        pair = first_eigenpair(grid3, p)
        assert pair.residual_sup <= 1e-6
        assert pair.p == p

    def test_iteration_limit(self, grid3):
        with pytest.raises(NoConvergence) as exc_info:
            first_eigenpair(grid3, 2.0, max_iter=1)
        assert exc_info.value.last_value > 0


class TestRayleigh:
    def test_zero_field(self, grid3):
        with pytest.raises(ZeroField):
            rayleigh(grid3.field(0.0), 2.0)

    def test_bounded_below_by_eigenvalue(self, grid3):
        pair = first_eigenpair(grid3, 2.0)
        trial = grid3.sample(lambda r: 1.0 - r**2)
        assert rayleigh(trial, 2.0) >= pair.lambda1 * (1.0 - 1e-9)

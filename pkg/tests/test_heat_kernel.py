import math

import numpy as np
import pytest
from scipy import special

from bilap.core_model import dispersion, v_sq
from bilap.fixtures import delta, dip, hump, pair
from bilap.heat_kernel import HeatKernel
from bilap.helpers import const
from bilap.helpers.exceptions import DomainError, UnsupportedGenerator
from bilap.quadrature import TorusGrid, integrate_torus


def grid_secular_integral(gen, z, n, power=1):
    def integrand(points):
        return v_sq(gen, points) / (dispersion(points) - z) ** power

    return integrate_torus(integrand, TorusGrid(gen.d, n))


class TestHeatTrace:
    @pytest.mark.parametrize("gen", [delta(2), dip(1), hump(3), pair()])
    def test_starts_at_norm(self, gen):
        assert pytest.approx(gen.norm_sq, rel=1e-14) == HeatKernel(gen).heat_trace(0.0)

    def test_top_trace_of_delta_matches_bottom(self):
        kernel = HeatKernel(delta(2))
        t = np.array([0.5, 2.0, 10.0])

        np.testing.assert_allclose(kernel.heat_trace(t), kernel.heat_trace(t, const.TOP), rtol=1e-14)

    def test_delta_trace_is_bessel_power(self):
        t = 3.0
        expected = special.ive(0, t) ** 3

        assert pytest.approx(expected, rel=1e-13) == HeatKernel(delta(3)).heat_trace(t)

    def test_supports(self):
        kernel = HeatKernel(dip(2))

        assert not kernel.supports(const.BOTTOM)
        assert kernel.supports(const.TOP)


class TestSecularIntegral:
    def test_below_the_band(self):
        kernel = HeatKernel(delta(1))

        assert pytest.approx(grid_secular_integral(delta(1), -1.0, 256), rel=1e-9) == kernel.secular_integral(-1.0)

    def test_above_the_band(self):
        z = 17.0

        value = HeatKernel(delta(2)).secular_integral(z)

        assert value < 0
        assert pytest.approx(grid_secular_integral(delta(2), z, 128), rel=1e-9) == value

    def test_above_the_band_with_top_zero_at_bottom(self):
        gen = dip(1)

        assert pytest.approx(grid_secular_integral(gen, 5.0, 256), rel=1e-9) == HeatKernel(gen).secular_integral(5.0)

    def test_derivative(self):
        kernel = HeatKernel(delta(1))

        expected = grid_secular_integral(delta(1), -1.0, 256, power=2)

        assert pytest.approx(expected, rel=1e-6) == kernel.secular_integral_dz(-1.0)

    def test_inside_the_band(self):
        with pytest.raises(DomainError):
            HeatKernel(delta(1)).secular_integral(2.0)

    def test_vanishing_bottom_is_unsupported(self):
        with pytest.raises(UnsupportedGenerator):
            HeatKernel(dip(1)).secular_integral(-1.0)


class TestThresholdIntegrals:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_bottom_diverges_in_low_dimension(self, d):
        assert math.inf == HeatKernel(delta(d)).threshold_integral()

    def test_top_diverges_in_low_dimension(self):
        kernel = HeatKernel(delta(2))

        assert math.inf == kernel.top_threshold_integral()
        assert math.inf == kernel.top_threshold_integral_squared()

    def test_top_threshold_in_three_dimensions(self):
        kernel = HeatKernel(delta(3))
        value = kernel.top_threshold_integral()

        assert math.isfinite(value)
        assert value > -kernel.secular_integral(37.0)

    def test_dip_bottom(self):
        with pytest.raises(UnsupportedGenerator):
            HeatKernel(dip(1)).threshold_integral()

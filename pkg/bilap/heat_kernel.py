"""
Dimension-free evaluation of the torus integrals through the heat trace of the dispersion.

With s(q) = Σ(1 - cos q_i), s'(q) = Σ(1 + cos q_i) = 2d - s(q) and 𝔢 = s²,

    K(t)  = ∫ |v|² e^{-t s}  dq = Σ_m b_m Π_i ive(m_i, t)
    Kπ(t) = ∫ |v|² e^{-t s'} dq = Σ_m (-1)^{Σ m} b_m Π_i ive(m_i, t)

where |v|² = (2π)^{-d} Σ_m b_m cos(m·q). Every resolvent-type integral of |v|² is then a
one-dimensional Laplace or Fourier-sine transform of K or Kπ.

For large t, K decays like |v(0)|² (2πt)^{-d/2}. When v(0) = 0 that tail is a cancellation
among the Bessel terms and cannot be evaluated to relative accuracy, so the bottom-edge
integrals need n_o = 0 and the top-edge ones n^o = 0.
"""
import logging
import math
from collections import defaultdict
from functools import cached_property
from typing import Callable, Dict, Tuple

import numpy as np
from scipy import integrate, special

from bilap.config import config
from bilap.core_model import GeneratorPotential, RayJet
from bilap.helpers import const
from bilap.helpers.exceptions import DomainError, UnsupportedGenerator

logger = logging.getLogger(__name__)


def _quad(func: Callable[[float], float], lo: float, hi: float, **kwargs) -> float:
    kwargs.setdefault("epsabs", 0.0)
    kwargs.setdefault("epsrel", config.KERNEL_QUAD_TOL)
    kwargs.setdefault("limit", config.KERNEL_QUAD_LIMIT)
    result = integrate.quad(func, lo, hi, full_output=1, **kwargs)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        logger.debug("quad on [%g, %g]: %s (abserr %.2e)", lo, hi, result[3].splitlines()[0], abserr)
    return value


class HeatKernel:
    def __init__(self, gen: GeneratorPotential):
        self.gen = gen
        self.d = gen.d
        table: Dict[Tuple[int, ...], float] = defaultdict(float)
        for x, cx in gen.sites:
            for y, cy in gen.sites:
                table[tuple(a - b for a, b in zip(x, y))] += 0.5 * cx * cy
                table[tuple(a + b for a, b in zip(x, y))] += 0.5 * cx * cy
        modes = sorted(m for m, b in table.items() if b != 0.0)
        self.modes = np.abs(np.array(modes, dtype=int).reshape(len(modes), self.d))
        self.coefficients = np.array([table[m] for m in modes])
        self.signs = np.where(np.sum(self.modes, axis=1) % 2 == 0, 1.0, -1.0)
        self.orders = np.unique(self.modes)
        self.n_bottom = RayJet(gen).vanishing_order
        self.n_top = RayJet(gen, at_top=True).vanishing_order

    def supports(self, edge: str) -> bool:
        return (self.n_bottom if edge == const.BOTTOM else self.n_top) == 0

    def _require(self, edge: str) -> None:
        if not self.supports(edge):
            order = self.n_bottom if edge == const.BOTTOM else self.n_top
            raise UnsupportedGenerator(
                f"heat-kernel engine needs v != 0 at the {edge} edge, vanishing order there is {order}"
            )

    def heat_trace(self, t, edge: str = const.BOTTOM):
        """
        K(t) at the bottom edge, Kπ(t) at the top
        :param t: scalar or array, t >= 0
        :param edge:
        :return:
        """
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        bessel = special.ive(self.orders[:, None], t_arr[None, :])
        lookup = np.searchsorted(self.orders, self.modes)
        factors = np.prod(bessel[lookup], axis=1)
        coefficients = self.coefficients * self.signs if edge == const.TOP else self.coefficients
        values = coefficients @ factors
        if np.ndim(t) == 0:
            return float(values[0])
        return values

    def _k(self, t: float) -> float:
        return self.heat_trace(t, const.BOTTOM)

    def _k_top(self, t: float) -> float:
        return self.heat_trace(t, const.TOP)

    def _laplace(self, func: Callable[[float], float], rate: float = 0.0) -> float:
        """∫_0^∞ func(t) e^{-rate t} dt, split where the tail of the heat trace sets in"""
        head = _quad(lambda t: func(t) * math.exp(-rate * t), 0.0, 1.0)
        tail = _quad(lambda t: func(t) * math.exp(-rate * t), 1.0, np.inf)
        return head + tail

    def _sine_transform(self, a: float, lo: float) -> float:
        """∫_lo^∞ sin(a t) K(t) dt"""
        first = integrate.quad(self._k, lo, np.inf, weight="sin", wvar=a, limlst=200, full_output=1)
        target = max(config.KERNEL_QUAD_TOL * abs(first[0]), 1e-300)
        second = integrate.quad(
            self._k, lo, np.inf, weight="sin", wvar=a, epsabs=target, limlst=200, full_output=1
        )
        if len(second) > 3:
            logger.debug("sine transform at a=%.3e: %s", a, second[3].splitlines()[0])
        return second[0]

    def threshold_integral(self) -> float:
        """∫ |v|²/𝔢 = ∫ t K dt; +inf when 2 n_o + d <= 4"""
        self._require(const.BOTTOM)
        return self._threshold_value

    @cached_property
    def _threshold_value(self) -> float:
        if self.d < 5:
            return math.inf
        return self._laplace(lambda t: t * self._k(t))

    def threshold_integral_squared(self) -> float:
        """∫ |v|²/𝔢² = ∫ t³ K dt / 6; +inf when 2 n_o + d <= 8"""
        self._require(const.BOTTOM)
        if self.d < 9:
            return math.inf
        return self._laplace(lambda t: t ** 3 * self._k(t)) / 6.0

    def top_threshold_integral(self) -> float:
        """∫ |v|²/(4d² - 𝔢) = (1/4d) [∫ Kπ + ∫ e^{-2dt} K]; +inf when 2 n^o + d <= 2"""
        self._require(const.TOP)
        if self.d < 3:
            return math.inf
        two_d = 2.0 * self.d
        return (self._laplace(self._k_top) + self._laplace(self._k, two_d)) / (2.0 * two_d)

    def top_threshold_integral_squared(self) -> float:
        """∫ |v|²/(4d² - 𝔢)²; +inf when 2 n^o + d <= 4"""
        self._require(const.TOP)
        if self.d < 5:
            return math.inf
        two_d = 2.0 * self.d
        cross = (self._laplace(self._k_top) + self._laplace(self._k, two_d)) / two_d
        return (
            self._laplace(lambda t: t * self._k_top(t))
            + cross
            + self._laplace(lambda t: t * self._k(t), two_d)
        ) / (4.0 * two_d ** 2)

    def _bottom_remainder(self, a: float) -> float:
        """∫_0^∞ (t - sin(a t)/a) K(t) dt"""
        horizon = 20.0 * math.pi / a

        def kernel_gap(t: float) -> float:
            x = a * t
            if x < 1e-3:
                gap = x ** 3 / 6.0 - x ** 5 / 120.0
            else:
                gap = x - math.sin(x)
            return gap / a * self._k(t)

        points = [p for p in (1.0, 1.0 / a) if 0.0 < p < horizon]
        head = _quad(kernel_gap, 0.0, horizon, points=points or None)
        linear_tail = _quad(lambda t: t * self._k(t), horizon, np.inf)
        sine_tail = self._sine_transform(a, horizon)
        return head + linear_tail - sine_tail / a

    def secular_integral(self, z: float) -> float:
        """
        I(z) = ∫ |v|²/(𝔢 - z) for z outside [0, 4d²]
        :param z:
        :return:
        """
        top = 4.0 * self.d ** 2
        if 0.0 <= z <= top:
            raise DomainError(f"z = {z} lies in the essential spectrum [0, {top}]")
        if z < 0:
            self._require(const.BOTTOM)
            a = math.sqrt(-z)
            if self.d >= 5:
                return self.threshold_integral() - self._bottom_remainder(a)
            return self._sine_transform(a, 0.0) / a
        self._require(const.TOP)
        b = math.sqrt(z)
        two_d = 2.0 * self.d
        return -(self._laplace(self._k_top, b - two_d) + self._laplace(self._k, b)) / (2.0 * b)

    def secular_integral_dz(self, z: float) -> float:
        """∂I/∂z = ∫ |v|²/(𝔢 - z)², five-point central difference"""
        top = 4.0 * self.d ** 2
        distance = -z if z < 0 else z - top
        h = config.KERNEL_DERIVATIVE_STEP * distance
        values = [self.secular_integral(z + k * h) for k in (-2, -1, 1, 2)]
        return (values[0] - 8.0 * values[1] + 8.0 * values[2] - values[3]) / (12.0 * h)

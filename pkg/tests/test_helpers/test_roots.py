import math

import pytest

from bilap.helpers.exceptions import BracketFailure
from bilap.helpers.roots import bisect_newton, expand_bracket


def secular_like(delta: float) -> float:
    # increasing on (0, inf), root at delta = 0.01
    return 1.0 - 0.1 / math.sqrt(delta)


class TestExpandBracket:
    def test_shrinks_toward_edge(self):
        bracket = expand_bracket(secular_like, 1.0)

        # 0.01 is hit exactly and stepped over
        assert (0.001, 0.1) == pytest.approx((bracket.lo, bracket.hi))
        assert bracket.f_lo < 0 < bracket.f_hi

    def test_grows_away_from_edge(self):
        bracket = expand_bracket(lambda x: x - 100.0, 1.0)

        assert bracket.lo < 100.0 <= bracket.hi

    def test_exact_zero_at_start(self):
        bracket = expand_bracket(lambda x: x - 1.0, 1.0)

        assert bracket.lo < 1.0 < bracket.hi
        assert bracket.f_lo < 0 < bracket.f_hi

    def test_exact_zero_while_growing(self):
        bracket = expand_bracket(lambda x: x - 4.0, 1.0)

        assert (2.0, 8.0) == (bracket.lo, bracket.hi)
        assert bracket.f_lo < 0 < bracket.f_hi

    def test_failure(self):
        with pytest.raises(BracketFailure):
            expand_bracket(lambda x: 1.0, 1.0, max_steps=10)


class TestBisectNewton:
    def test_root_to_relative_width(self):
        bracket = expand_bracket(secular_like, 1.0)

        result = bisect_newton(secular_like, None, bracket.lo, bracket.hi, 1e-13)

        assert pytest.approx(0.01, rel=1e-12) == result.root
        assert result.hi - result.lo <= 1e-13 * result.hi

    def test_newton_polish_reduces_residual(self):
        def slope(x):
            return 0.05 * x ** -1.5

        result = bisect_newton(secular_like, slope, 1e-4, 1.0, 1e-13)

        assert abs(result.value) < 1e-13

    def test_until_ratio_stops_early(self):
        result = bisect_newton(secular_like, None, 1e-6, 1.0, 1e-13, until_ratio=1.25)

        assert result.hi <= 1.25 * result.lo
        assert result.lo <= 0.01 <= result.hi

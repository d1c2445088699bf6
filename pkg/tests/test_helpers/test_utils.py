import math

import numpy as np
import pytest

from bilap.helpers.utils import Utils, jsonable, str_or_bool, strictly_monotone


class TestUtils:
    def test_pairwise_sum_matches_sum(self):
        values = np.arange(13, dtype=float)

        assert 78.0 == Utils.pairwise_sum(values)

    def test_pairwise_sum_keeps_trailing_axes(self):
        values = np.ones((5, 2))

        np.testing.assert_array_equal(np.array([5.0, 5.0]), Utils.pairwise_sum(values))

    def test_pairwise_sum_of_empty(self):
        assert 0.0 == Utils.pairwise_sum(np.zeros((0,)))

    def test_geometric_ladder(self):
        expected = [1.0, 0.5, 0.25]

        assert expected == Utils.geometric_ladder(1.0, 0.5, 3)

    @pytest.mark.parametrize("value, expected", [(1, 8), (8, 8), (9, 16), (1000.5, 1024)])
    def test_next_power_of_two(self, value, expected):
        assert expected == Utils.next_power_of_two(value)

    def test_relative_diff(self):
        assert 0.0 == Utils.relative_diff(0.0, 0.0)
        assert pytest.approx(0.5) == Utils.relative_diff(1.0, 2.0)

    def test_format_float(self):
        assert "0.10000000000000001" == Utils.format_float(0.1)
        assert "inf" == Utils.format_float(math.inf)
        assert "-inf" == Utils.format_float(-math.inf)
        assert "" == Utils.format_float(None)
        assert "3" == Utils.format_float(3)
        assert "true" == Utils.format_float(True)

    def test_sign_changes(self):
        assert 1 == Utils.sign_changes([-2.0, -1.0, 0.0, 1.0, 2.0])
        assert 2 == Utils.sign_changes([1.0, -1.0, 1.0])


def test_jsonable_spells_out_infinities():
    data = {"a": math.inf, 1: (np.float64(2.0), np.int64(3)), "b": np.array([True])}

    assert {"a": "inf", "1": [2.0, 3], "b": [True]} == jsonable(data)


def test_strictly_monotone():
    assert strictly_monotone([3, 2, 1])
    assert not strictly_monotone([3, 3, 1])
    assert strictly_monotone([1, 2, 3], decreasing=False)


@pytest.mark.parametrize("value, expected", [("yes", True), ("0", False), ("other", "other")])
def test_str_or_bool(value, expected):
    assert expected == str_or_bool(value)

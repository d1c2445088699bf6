import numpy as np
import pytest

from bilap.fixtures import delta, dip
from bilap.helpers.exceptions import DomainError, NoRoot, SizeExceeded
from bilap.lattice_oracle import (
    MomentumGridModel,
    compare_on_grid,
    dense_eig_extremal,
    oracle_compare,
    periodic_laplacian,
    realspace_planewave_check,
    secular_root,
)
from bilap.quadrature import TorusGrid


class TestPlaneWaves:
    def test_constant_wave(self):
        check = realspace_planewave_check(2, 8, 0)

        assert 0.0 == check.multiplier
        assert check.deviation <= 1e-12

    def test_alternating_wave_hits_band_top(self):
        check = realspace_planewave_check(1, 8, 4)

        assert pytest.approx(4.0) == check.multiplier
        assert check.deviation <= 1e-12

    def test_mixed_frequency(self):
        check = realspace_planewave_check(2, 8, (1, 3))

        assert (1, 3) == check.k
        assert check.deviation <= 1e-12

    def test_frequency_of_wrong_length(self):
        with pytest.raises(DomainError):
            realspace_planewave_check(3, 8, (1, 2))

    def test_laplacian_kills_constants(self):
        np.testing.assert_array_equal(np.zeros((4, 4)), periodic_laplacian(np.ones((4, 4))))


class TestMomentumGridModel:
    def test_delta_norm(self):
        model = MomentumGridModel.build(delta(2), TorusGrid(2, 8))

        assert 64 == model.n_total
        assert pytest.approx(1.0, rel=1e-13) == model.norm_sq

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            MomentumGridModel.build(delta(1), TorusGrid(2, 8))

    def test_zero_coupling(self):
        model = MomentumGridModel.build(dip(1), TorusGrid(1, 16))

        with pytest.raises(DomainError):
            secular_root(model, 0.0)
        lowest, highest = dense_eig_extremal(model, 0.0)
        assert pytest.approx(np.min(model.diag), abs=1e-14) == lowest
        assert pytest.approx(np.max(model.diag), abs=1e-13) == highest

    def test_no_root_when_edge_weight_vanishes(self):
        model = MomentumGridModel(
            grid=TorusGrid(1, 4), diag=np.array([0.0, 1.0, 2.0]), u=np.array([0.0, 0.1, 0.1])
        )

        with pytest.raises(NoRoot):
            secular_root(model, 1.0)

    def test_root_below_and_above(self):
        model = MomentumGridModel.build(delta(1), TorusGrid(1, 64))

        below = secular_root(model, 1.0)
        above = secular_root(model, -1.0)

        assert below < np.min(model.diag)
        assert above > np.max(model.diag)
        assert abs(model.secular(1.0, below)) <= 1e-12
        assert abs(model.secular(-1.0, above)) <= 1e-12

    def test_dense_cap(self, monkeypatch):
        from bilap.config import config

        monkeypatch.setattr(config, "DENSE_EIG_CAP", 32)
        model = MomentumGridModel.build(delta(1), TorusGrid(1, 64))

        with pytest.raises(SizeExceeded):
            dense_eig_extremal(model, 1.0)


class TestCompare:
    @pytest.mark.parametrize("mu", [1.0, -1.0])
    def test_secular_root_matches_dense_eigenvalue(self, mu):
        row = compare_on_grid(delta(1), TorusGrid(1, 64), mu)

        assert row.abs_diff <= 1e-10

    def test_zero_coupling_row(self):
        row = compare_on_grid(delta(1), TorusGrid(1, 8), 0.0)

        assert row.e_secular is None
        assert row.abs_diff is None

    def test_converges_to_continuum(self, delta_2d):
        report = oracle_compare(delta_2d, 1.0, 8, levels=3)

        assert [8, 16, 32] == [row.n for row in report.rows]
        assert report.max_abs_diff <= 1e-10
        assert report.gaps_decreasing
        assert "N" in report.rows[0].to_row()

import pytest

from bilap.config import Config
from bilap.helpers.base_config import BaseConfig


class SampleConfig(BaseConfig):
    UPDATE_FROM_ENV = True
    ENV_KEY_PREFIX = "sample"
    ENV_WHITELIST = ("WORKERS", "LADDERS", "VERBOSE")

    WORKERS = 1
    VERBOSE = False
    TOL = 1e-12
    LADDERS = {1: "8,16", 2: "4,8"}


class TestBaseConfig:
    def test_env_override(self):
        cfg = SampleConfig()
        cfg.update_from_env({"sample__WORKERS": "4", "sample__VERBOSE": "true"})

        assert 4 == cfg.WORKERS
        assert cfg.VERBOSE is True

    def test_env_override_of_nested_int_key(self):
        cfg = SampleConfig()
        cfg.LADDERS = dict(SampleConfig.LADDERS)
        cfg.update_from_env({"sample__LADDERS__2": "16,32"})

        assert "16,32" == cfg.LADDERS[2]

    def test_setting_outside_whitelist_is_skipped(self):
        cfg = SampleConfig()
        cfg.update_from_env({"sample__TOL": "0.5"})

        assert 1e-12 == cfg.TOL

    def test_bad_value_is_skipped(self):
        cfg = SampleConfig()
        cfg.update_from_env({"sample__WORKERS": "many"})

        assert 1 == cfg.WORKERS

    def test_missing_prefix(self):
        class Broken(BaseConfig):
            UPDATE_FROM_ENV = True

        with pytest.raises(RuntimeError):
            Broken()

    def test_as_dict_lists_settings_only(self):
        snapshot = SampleConfig().as_dict()

        assert ["LADDERS", "TOL", "VERBOSE", "WORKERS"] == sorted(snapshot)


def test_library_config_snapshot_has_tolerances():
    snapshot = Config().as_dict()

    assert 1e-11 == snapshot["ROOT_RESIDUAL_TOL"]
    assert 4096 == snapshot["DENSE_EIG_CAP"]
    assert "ENV_WHITELIST" not in snapshot

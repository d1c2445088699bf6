import math

import pytest
import ujson

from bilap.helpers import const
from bilap.reports import Report, config_hash, save_report, write_csv


def make_report(**kwargs) -> Report:
    defaults = {
        "command": "sweep",
        "run_config": {"problem": {"d": 1}, "sweep": {"mu_list": [0.5, 1.0]}},
        "payload": {"value": 0.1, "limit": math.inf},
        "table": [{"mu": 0.5, "e": -0.25, "status": "ok"}, {"mu": 1.0, "e": None, "status": "error: no luck"}],
        "columns": ("mu", "e", "status"),
    }
    defaults.update(kwargs)
    return Report(**defaults)


class TestConfigHash:
    def test_is_stable(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})

    def test_follows_config(self):
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_follows_library_settings(self, monkeypatch):
        from bilap.config import config

        before = config_hash({"a": 1})
        monkeypatch.setattr(config, "ROOT_RESIDUAL_TOL", 1e-10)

        assert before != config_hash({"a": 1})


class TestSaveReport:
    def test_json_file(self, tmp_path):
        report = make_report()

        paths = save_report(report, tmp_path)

        assert [tmp_path / f"bilap_sweep_{report.config_hash[:12]}.json"] == paths
        data = ujson.loads(paths[0].read_text(encoding="utf-8"))
        assert "inf" == data["payload"]["limit"]
        assert report.config_hash == data["config_hash"]
        assert "timings" not in data

    def test_reruns_are_byte_identical(self, tmp_path):
        first = save_report(make_report(), tmp_path / "a")[0].read_bytes()
        second = save_report(make_report(), tmp_path / "b")[0].read_bytes()

        assert first == second

    def test_csv_table(self, tmp_path):
        paths = save_report(make_report(), tmp_path, fmt=const.CSV_FORMAT)

        expected = "mu,e,status\n0.5,-0.25,ok\n1,,error: no luck\n"
        assert 2 == len(paths)
        assert ".csv" == paths[1].suffix
        assert expected == paths[1].read_text(encoding="utf-8")

    def test_timings_go_to_their_own_file(self, tmp_path):
        paths = save_report(make_report(timings={"total_seconds": 1.5}), tmp_path)

        assert paths[1].name.endswith("_timings.json")
        assert {"total_seconds": 1.5} == ujson.loads(paths[1].read_text(encoding="utf-8"))["timings"]

    def test_no_rewrite_keeps_old_file(self, tmp_path):
        first = save_report(make_report(), tmp_path)[0]
        second = save_report(make_report(), tmp_path, rewrite=False)[0]

        assert first != second
        assert first.exists()
        assert second.exists()


def test_write_csv_formats_floats(tmp_path):
    path = tmp_path / "table.csv"

    write_csv([{"x": 0.1, "flag": True, "n": 3, "inf": -math.inf}], ("x", "flag", "n", "inf"), path)

    assert "x,flag,n,inf\n0.10000000000000001,true,3,-inf\n" == path.read_text(encoding="utf-8")

import json
from pathlib import Path

import pytest

from bilap.cli import LadderSpec, load_run_config, main, parse_run_config, run_command
from bilap.helpers import const
from bilap.helpers.exceptions import ConfigError

DELTA_1D = {"d": 1, "generator": {"fixture": "delta"}}


def write_config(directory: Path, data) -> str:
    path = directory / "run.json"
    path.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
    return str(path)


def field_of(raw, command="sweep") -> str:
    with pytest.raises(ConfigError) as ex:
        parse_run_config(raw, command)
    return ex.value.field


class TestParseRunConfig:
    def test_needs_one_command_block(self):
        assert "config" == field_of({"problem": DELTA_1D})
        assert "config" == field_of({"problem": DELTA_1D, "sweep": {}, "fit": {}})

    def test_block_must_match_command(self):
        assert "fit" == field_of({"problem": DELTA_1D, "fit": {}}, command="sweep")

    def test_dimension_range(self):
        assert "problem.d" == field_of({"problem": {"d": 7, "generator": {"fixture": "delta"}}, "sweep": {}})

    def test_unknown_fixture(self):
        assert "problem.generator.fixture" == field_of({"problem": {"d": 1, "generator": {"fixture": "x"}}, "sweep": {}})

    def test_fixture_outside_its_dimensions(self):
        raw = {"problem": {"d": 2, "generator": {"fixture": "pair"}}, "sweep": {}}

        assert "problem.generator.fixture" == field_of(raw)

    def test_inline_generator_is_validated(self):
        raw = {"problem": {"d": 1, "generator": {"sites": [{"x": [1], "v": 1.0}]}}, "sweep": {}}

        assert "problem.generator" == field_of(raw)

    def test_generator_file(self, tmp_path):
        from bilap.fixtures import dip

        dip(1).dump(tmp_path / "dip.json")
        raw = {"problem": {"d": 1, "generator": {"file": "dip.json"}}, "sweep": {}}

        run = parse_run_config(raw, "sweep", base_dir=tmp_path)

        assert dip(1) == run.problem.generator

    def test_missing_generator_file(self, tmp_path):
        raw = {"problem": {"d": 1, "generator": {"file": "none.json"}}, "sweep": {}}

        with pytest.raises(ConfigError) as ex:
            parse_run_config(raw, "sweep", base_dir=tmp_path)

        assert "problem.generator.file" == ex.value.field

    def test_bad_method(self):
        raw = {"problem": dict(DELTA_1D, method="fast"), "sweep": {}}

        assert "problem.method" == field_of(raw)

    def test_bad_quadrature(self):
        raw = {"problem": DELTA_1D, "quadrature": {"tol_q": -1.0}, "sweep": {}}

        assert "quadrature.tol_q" == field_of(raw)

    def test_bad_format(self):
        raw = {"problem": DELTA_1D, "sweep": {}, "output": {"format": "xml"}}

        assert "output.format" == field_of(raw)

    def test_overrides(self):
        raw = {"problem": DELTA_1D, "sweep": {}, "output": {"dir": "a", "format": "json"}}

        run = parse_run_config(raw, "sweep", out="b", fmt="csv")

        assert Path("b") == run.output_dir
        assert const.CSV_FORMAT == run.fmt

    def test_problem_is_optional_for_identity_checks(self):
        run = parse_run_config({"appendix_verify": {"samples": 3}}, "appendix-verify")

        assert run.problem is None

    def test_problem_is_required_elsewhere(self):
        assert "problem" == field_of({"sweep": {}})


class TestLadderSpec:
    def test_field_paths(self):
        with pytest.raises(ConfigError) as ex:
            LadderSpec.parse({"mu_start": 0.1, "ratio": 2.0, "count": 4}, "sweep.ladder")

        assert "sweep.ladder.ratio" == ex.value.field

    def test_missing_field(self):
        with pytest.raises(ConfigError) as ex:
            LadderSpec.parse({"ratio": 0.5, "count": 4}, "fit.ladder")

        assert "fit.ladder.mu_start" == ex.value.field

    def test_top_side_counts_down(self, delta_1d):
        ladder = LadderSpec.parse({"mu_start": 0.1, "ratio": 0.5, "count": 3, "side": "top"}, "sweep.ladder")

        assert pytest.approx([-0.1, -0.05, -0.025]) == ladder.mu_list(delta_1d)

    def test_offsets_from_threshold(self, dip_1d):
        ladder = LadderSpec.parse({"mu_start": 0.01, "ratio": 0.5, "count": 2, "from_threshold": True}, "fit.ladder")

        assert pytest.approx([0.26, 0.255], abs=1e-12) == ladder.mu_list(dip_1d)


class TestCommands:
    def test_eigenvalue_without_spectrum(self):
        run = parse_run_config({"problem": {"d": 1, "generator": {"fixture": "dip"}}, "eigenvalue": {"mu": 0.1}}, "eigenvalue")

        report = run_command(run)

        assert const.STATUS_NO_DISCRETE_SPECTRUM == report.status
        assert const.EXIT_OK == report.exit_code
        assert "total_seconds" in report.timings

    def test_eigenvalue(self):
        run = parse_run_config({"problem": DELTA_1D, "eigenvalue": {"mu": 1.0, "uniqueness_probe": True}}, "eigenvalue")

        payload = run_command(run).payload

        assert payload["result"]["e"] < 0
        assert 1 == payload["sign_changes"]
        assert payload["eigenfunction_residual"] <= 1e-9

    def test_sweep_table(self):
        run = parse_run_config({"problem": DELTA_1D, "sweep": {"mu_list": [1.0, -1.0, 0.0]}}, "sweep")

        report = run_command(run)

        assert [-1.0, 0.0, 1.0] == [row["mu"] for row in report.table]
        assert const.SWEEP_COLUMNS == report.columns

    def test_sweep_needs_couplings(self):
        run = parse_run_config({"problem": DELTA_1D, "sweep": {}}, "sweep")

        with pytest.raises(ConfigError):
            run_command(run)

    def test_fit_compares_prediction(self):
        ladder = {"mu_start": 1e-2, "ratio": 0.5, "count": 6}
        run = parse_run_config({"problem": DELTA_1D, "fit": {"ladder": ladder}}, "fit")

        report = run_command(run)

        rows = {row["quantity"]: row for row in report.table}
        assert ("quantity", "predicted", "fitted", "rel_diff") == report.columns
        assert pytest.approx(4.0 / 3.0) == rows["gap exponent"]["predicted"]
        assert rows["gap exponent"]["rel_diff"] < 0.05
        assert "gap prefactor (morse)" in rows
        assert rows["r_squared"]["rel_diff"] is None

    def test_oracle(self):
        run = parse_run_config({"problem": DELTA_1D, "oracle": {"mu": [1.0, -1.0], "N": 16, "levels": 2}}, "oracle")

        report = run_command(run)

        assert const.EXIT_OK == report.exit_code
        assert 4 == len(report.table)
        assert [] == report.payload["failures"]

    def test_appendix_verify(self):
        run = parse_run_config({"appendix_verify": {"samples": 20, "seed": 3}}, "appendix-verify")

        report = run_command(run)

        assert [] == report.payload["failed"], report.payload["suites"]
        assert const.EXIT_OK == report.exit_code


class TestMain:
    def test_malformed_json(self, tmp_path):
        path = write_config(tmp_path, "{not json")

        assert const.EXIT_CONFIG_ERROR == main(["thresholds", "--config", path])

    def test_missing_config_file(self, tmp_path):
        assert const.EXIT_CONFIG_ERROR == main(["thresholds", "--config", str(tmp_path / "none.json")])

    def test_thresholds(self, tmp_path, capsys):
        path = write_config(tmp_path, {"problem": DELTA_1D, "thresholds": {}})

        code = main(["thresholds", "--config", path, "--out", str(tmp_path / "out")])

        assert const.EXIT_OK == code
        summary = json.loads(capsys.readouterr().out)
        report = json.loads(Path(summary["files"][0]).read_text(encoding="utf-8"))
        assert 0.0 == report["payload"]["thresholds"]["mu_lower"]
        assert "no threshold state at 0" == report["payload"]["classification"]["bottom"]
        assert "c_1" == report["payload"]["predictions"]["bottom"]["case"]["constant"]

    def test_csv_output(self, tmp_path, capsys):
        path = write_config(tmp_path, {"problem": DELTA_1D, "sweep": {"mu_list": [0.5, 1.0]}})

        code = main(["sweep", "--config", path, "--out", str(tmp_path), "--format", "csv"])

        assert const.EXIT_OK == code
        files = json.loads(capsys.readouterr().out)["files"]
        assert any(name.endswith(".csv") for name in files)

    def test_fixtures(self, capsys):
        assert const.EXIT_OK == main(["fixtures"])

        names = [row["name"] for row in json.loads(capsys.readouterr().out)]
        assert "delta" in names

    def test_load_run_config_resolves_relative_generator(self, tmp_path):
        from bilap.fixtures import hump

        hump(1).dump(tmp_path / "hump.json")
        path = write_config(tmp_path, {"problem": {"d": 1, "generator": {"file": "hump.json"}}, "thresholds": {}})

        run = load_run_config(path, "thresholds")

        assert hump(1) == run.problem.generator

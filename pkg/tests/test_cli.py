"""End-to-end tests of the clipnoise command line at desk scale."""

import json

import pandas as pd
import pytest

from clipnoise import cli
from clipnoise.config import CSV_COLUMNS, DEFAULT_BINS, RunConfig
from clipnoise.errors import ConfigError, DegenerateInputError
from clipnoise.pipeline import experiments, verify

FAST = ["--n", "64", "--frames", "4", "--threads", "1", "--quiet"]


def _header(path):
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.startswith("#")]


def _without_timestamp(path):
    with open(path, encoding="utf-8") as f:
        return [line for line in f if not line.startswith("# generated_at:")]


class TestSweeps:
    def test_kurtosis_grid(self, tmp_path):
        out = tmp_path / "kurt.csv"
        assert cli.run(["kurtosis", "--alpha-grid", "0.5:5:0.5", *FAST, "--out", str(out)]) == 0
        rows = pd.read_csv(out, comment="#")
        assert list(rows.columns) == CSV_COLUMNS["kurtosis"]
        assert len(rows) == 10
        assert (rows["alpha1"] == rows["alpha2"]).all()

    def test_header_lines(self, tmp_path):
        out = tmp_path / "beta.csv"
        assert cli.run(["beta", "--alpha-grid", "1,2", "--alpha2-grid", "3", "--seed", "5", *FAST,
                        "--out", str(out)]) == 0
        header = _header(out)
        assert header[0] == "# clipnoise 1.0.0"
        assert "# command: beta" in header
        assert "# seed: 5" in header
        assert "# samples_per_point: 256" in header
        assert "# flagged: none" in header
        config = json.loads(next(h for h in header if h.startswith("# config:")).split(":", 1)[1])
        assert config["alpha_grid"] == [1.0, 2.0] and config["alpha2_grid"] == [3.0]

    def test_pdf_rows_match_bins(self, tmp_path):
        out = tmp_path / "pdf.csv"
        args = ["pdf", "--alpha1", "1", "--alpha2", "2", "--bins", "50", "--n", "256", "--frames", "4", "--quiet"]
        assert cli.run([*args, "--out", str(out)]) == 0
        rows = pd.read_csv(out, comment="#")
        assert list(rows.columns) == CSV_COLUMNS["pdf"]
        assert len(rows) == 50
        assert any(line.startswith("# beta: ") for line in _header(out))

    def test_stdout(self, capsys):
        assert cli.run(["kurtosis", "--alpha1", "2", *FAST]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# clipnoise 1.0.0"
        assert lines[-2] == "alpha1,alpha2,kurtosis"
        assert lines[-1].startswith("2,2,")

    def test_deterministic_except_timestamp(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            assert cli.run(["kurtosis", "--alpha-grid", "1,3", "--seed", "11", *FAST, "--out", str(path)]) == 0
        assert _without_timestamp(paths[0]) == _without_timestamp(paths[1])

    def test_samples_rounds_up_to_frames(self, tmp_path):
        out = tmp_path / "k.csv"
        assert cli.run(["kurtosis", "--alpha1", "1", "--n", "64", "--samples", "100", "--threads", "1",
                        "--quiet", "--out", str(out)]) == 0
        assert "# samples_per_point: 128" in _header(out)


class TestBuildSpec:
    def test_default_distance_grids(self):
        spec = cli.build_spec(RunConfig(command="hellinger"))
        assert len(spec.alpha1_grid) == 10 and spec.alpha2_grid == (2.0, 3.0)
        assert not spec.diagonal

    def test_kurtosis_defaults_to_diagonal(self):
        spec = cli.build_spec(RunConfig(command="kurtosis"))
        assert spec.diagonal and len(spec.points()) == 10

    def test_single_point(self):
        spec = cli.build_spec(RunConfig(command="beta", alpha1=1.0, alpha2=2.0))
        assert spec.points() == [(1.0, 2.0)]

    def test_effective_config_round_trips(self):
        spec = cli.build_spec(RunConfig(command="kl", alpha_grid="1,2", alpha2_grid="3"))
        again = cli.build_spec(cli.effective_config("kl", spec))
        assert again == spec

    @pytest.mark.parametrize("config, field", [
        (RunConfig(command="kurtosis", alpha_grid="1,9"), "alpha_grid"),
        (RunConfig(command="beta", alpha1=1.0, alpha2=0.05), "alpha2"),
        (RunConfig(command="kurtosis", alpha1=1.0, n=48), "n"),
        (RunConfig(command="kurtosis", alpha1=1.0, bins=0), "bins"),
        (RunConfig(command="hellinger", alpha1=1.0, frames=2), "frames"),
        (RunConfig(command="hellinger", alpha1=1.0, samples=1000), "samples"),
    ])
    def test_errors_name_the_key(self, config, field):
        with pytest.raises(ConfigError) as excinfo:
            cli.build_spec(config)
        assert excinfo.value.field == field


class TestConfigFile:
    def test_flags_win(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "alpha_grid": "1,2,3", "seed": 3, "n": 64, "frames": 4}))
        out = tmp_path / "k.csv"
        assert cli.run(["kurtosis", "--config", str(cfg), "--seed", "9", "--threads", "1", "--quiet",
                        "--out", str(out)]) == 0
        assert "# seed: 9" in _header(out)
        assert len(pd.read_csv(out, comment="#")) == 3

    def test_command_mismatch(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kl"}))
        assert cli.run(["kurtosis", "--config", str(cfg), "--quiet"]) == 2

    def test_saved_config_rerun_with_samples(self, tmp_path):
        first = tmp_path / "first.csv"
        assert cli.run(["kurtosis", "--alpha-grid", "1,2", *FAST, "--out", str(first)]) == 0
        saved = next(h for h in _header(first) if h.startswith("# config:")).split(":", 1)[1]
        cfg = tmp_path / "run.json"
        cfg.write_text(saved.strip())

        again = tmp_path / "again.csv"
        assert cli.run(["kurtosis", "--config", str(cfg), "--samples", "512", "--threads", "1", "--quiet",
                        "--out", str(again)]) == 0
        assert "# samples_per_point: 512" in _header(again)

    def test_frames_flag_replaces_file_samples(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "alpha1": 1.0, "n": 64, "samples": 1000}))
        out = tmp_path / "k.csv"
        assert cli.run(["kurtosis", "--config", str(cfg), *FAST, "--out", str(out)]) == 0
        assert "# samples_per_point: 256" in _header(out)

    def test_single_alpha1_flag_replaces_file_grid(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "alpha_grid": "1,2,3", "n": 64, "frames": 4}))
        out = tmp_path / "k.csv"
        assert cli.run(["kurtosis", "--config", str(cfg), "--alpha1", "5", "--threads", "1", "--quiet",
                        "--out", str(out)]) == 0
        assert pd.read_csv(out, comment="#")["alpha1"].tolist() == [5.0]

    def test_grid_flag_replaces_file_alpha1(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "alpha1": 5.0, "n": 64, "frames": 4}))
        out = tmp_path / "k.csv"
        assert cli.run(["kurtosis", "--config", str(cfg), "--alpha-grid", "1,2", "--threads", "1", "--quiet",
                        "--out", str(out)]) == 0
        assert pd.read_csv(out, comment="#")["alpha1"].tolist() == [1.0, 2.0]

    def test_single_alpha2_flag_replaces_file_grid(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "beta", "alpha_grid": "1", "alpha2_grid": "2,3", "n": 64, "frames": 4}))
        out = tmp_path / "b.csv"
        assert cli.run(["beta", "--config", str(cfg), "--alpha2", "4", "--threads", "1", "--quiet",
                        "--out", str(out)]) == 0
        rows = pd.read_csv(out, comment="#")
        assert rows["alpha2"].tolist() == [4.0]
        assert rows["alpha1"].tolist() == [1.0]

    def test_range_error_names_file_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "alpha1": 9, "n": 64, "frames": 4}, indent=2))
        assert cli.run(["kurtosis", "--config", str(cfg), "--threads", "1", "--quiet"]) == 2
        assert "line 3, field 'alpha1'" in capsys.readouterr().err

    def test_grid_error_names_file_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "n": 64, "alpha_grid": "1:2"}, indent=2))
        assert cli.run(["kurtosis", "--config", str(cfg), "--frames", "4", "--threads", "1", "--quiet"]) == 2
        assert "line 4, field 'alpha_grid'" in capsys.readouterr().err

    def test_overridden_file_value_is_not_checked(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "alpha1": 9, "n": 64, "frames": 4}, indent=2))
        assert cli.run(["kurtosis", "--config", str(cfg), "--alpha1", "1", "--threads", "1", "--quiet"]) == 0

    def test_flag_error_has_no_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"command": "kurtosis", "n": 64, "frames": 4}, indent=2))
        assert cli.run(["kurtosis", "--config", str(cfg), "--qam", "5", "--threads", "1", "--quiet"]) == 2
        err = capsys.readouterr().err
        assert "field 'qam'" in err and "line" not in err


class TestExitStatus:
    @pytest.mark.parametrize("argv", [
        ["kurtosis", "--frobnicate"],
        ["kurtosis", "--alpha1", "9", *FAST],
        ["kurtosis", "--n", "48", "--frames", "1", "--quiet"],
        ["kurtosis", "--frames", "4", "--samples", "100", "--quiet"],
        ["kurtosis", "--alpha-grid", "1:2", *FAST],
        ["pdf", "--alpha1", "1", *FAST],
        ["hellinger", "--alpha1", "1", *FAST],
        ["nosuchcommand"],
    ])
    def test_usage_errors(self, argv):
        assert cli.run(argv) == 2

    def test_bad_config_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text("{\n  \"n\": \"big\"\n}\n")
        assert cli.run(["kurtosis", "--config", str(cfg), "--quiet"]) == 2

    def test_missing_output_directory(self, tmp_path):
        out = tmp_path / "absent" / "k.csv"
        assert cli.run(["kurtosis", "--alpha1", "1", *FAST, "--out", str(out)]) == 2
        assert not out.exists()

    def test_computation_error_leaves_no_file(self, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            raise DegenerateInputError("zero variance")

        monkeypatch.setattr(experiments, "kurtosis_sweep", broken)
        out = tmp_path / "k.csv"
        assert cli.run(["kurtosis", "--alpha1", "1", *FAST, "--out", str(out)]) == 1
        assert list(tmp_path.iterdir()) == []

    def test_invalid_thread_environment(self, monkeypatch, capsys):
        monkeypatch.setenv("CLIPNOISE_THREADS", "auto")
        assert cli.run(["kurtosis", "--alpha1", "1", "--n", "64", "--frames", "4", "--quiet"]) == 2
        assert "CLIPNOISE_THREADS" in capsys.readouterr().err

    def test_version(self, capsys):
        assert cli.run(["--version"]) == 0
        assert "clipnoise 1.0.0" in capsys.readouterr().out


class TestVerifyCommand:
    def _checks(self, status):
        return [lambda scale: {"name": "Stub", "status": status, "value": 0, "threshold": 0, "message": "stub"}]

    def test_report_written(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setattr(verify, "CHECKS", self._checks("pass"))
        out = tmp_path / "report.json"
        assert cli.run(["verify", "--scale", "0.5", "--quiet", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["status"] == "pass" and report["scale"] == 0.5
        assert "| Stub | ✅ | stub |" in capsys.readouterr().out

    def test_failure_exit_status(self, monkeypatch):
        monkeypatch.setattr(verify, "CHECKS", self._checks("fail"))
        assert cli.run(["verify", "--quiet"]) == 1

    def test_bad_scale(self):
        assert cli.run(["verify", "--scale", "0", "--quiet"]) == 2


def test_default_bins_in_effective_config():
    spec = cli.build_spec(RunConfig(command="pdf", alpha1=1.0, alpha2=1.0, n=64, frames=4))
    assert cli.effective_config("pdf", spec).bins == DEFAULT_BINS

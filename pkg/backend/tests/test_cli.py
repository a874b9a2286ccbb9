import csv
import os

import pytest

import discord_lab
from core.exceptions import ConfigInvalid
from schemas.scenario import RunReport


def _rows(path: str) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


class TestConfigFile:
    def test_flags_override_file(self, tmp_path):
        config = tmp_path / "run.env"
        config.write_text("# stationary run\nscenario=steady\nmu=-1\na=0.5\nfeedback=true\n")
        args = discord_lab.build_parser().parse_args(["run", "--config", str(config), "--mu", "1", "--output", str(tmp_path)])
        cfg = discord_lab.load_config(args)
        assert cfg.scenario.value == "steady"
        assert cfg.mu == [1.0]
        assert cfg.a == [0.5]
        assert cfg.feedback is True

    def test_unknown_key(self, tmp_path):
        config = tmp_path / "run.env"
        config.write_text("scenario=steady\ncolour=blue\n")
        with pytest.raises(ConfigInvalid):
            discord_lab.read_config_file(str(config))

    def test_bad_boolean(self, tmp_path):
        config = tmp_path / "run.env"
        config.write_text("brute_force=maybe\n")
        with pytest.raises(ConfigInvalid):
            discord_lab.read_config_file(str(config))


class TestMain:
    def test_steady_run(self, tmp_path):
        code = discord_lab.main(["run", "--scenario", "steady", "--mu", "1", "--a", "1", "--output", str(tmp_path)])
        assert code == 0
        rows = _rows(os.path.join(tmp_path, "steady.csv"))
        assert abs(float(rows[0]["Q"]) - 0.38) <= 0.01

    def test_sweep(self, tmp_path):
        code = discord_lab.main(["sweep", "--mu=-1,1", "--a", "1", "--xi", "0.5", "--output", str(tmp_path)])
        assert code == 0
        assert len(_rows(os.path.join(tmp_path, "sweep.csv"))) == 2

    def test_missing_scenario(self, tmp_path):
        assert discord_lab.main(["run", "--output", str(tmp_path)]) == 1

    def test_invalid_value(self, tmp_path):
        assert discord_lab.main(["run", "--scenario", "steady", "--a", "1.5", "--output", str(tmp_path)]) == 1

    def test_missing_config_file(self, tmp_path):
        assert discord_lab.main(["run", "--config", str(tmp_path / "none.env")]) == 1

    def test_numeric_failure(self, tmp_path):
        code = discord_lab.main([
            "run", "--scenario", "evolve", "--mode", "full", "--dt", "1", "--t-max", "50", "--output", str(tmp_path),
        ])
        assert code == 2

    def test_validate_prints_table(self, tmp_path, monkeypatch, capsys):
        report = RunReport(scenario="validate", parameters={})

        def fake_run(output=None, random_states=50, t_max=10.0):
            assert output == str(tmp_path)
            return report

        monkeypatch.setattr("services.validation_service.validation_service.run", fake_run)
        assert discord_lab.main(["validate", "--output", str(tmp_path)]) == 0
        assert "check" in capsys.readouterr().out
